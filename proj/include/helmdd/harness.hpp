#pragma once

#include <cmath>
#include <iosfwd>
#include <optional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "helmdd/assembly.hpp"
#include "helmdd/config.hpp"
#include "helmdd/decomp.hpp"
#include "helmdd/grid.hpp"
#include "helmdd/pml.hpp"
#include "helmdd/schwarz.hpp"

namespace helmdd {

/// coef * k^power; "30k", "0.3k^2", "k^2.5" or a plain number (power 0).
struct StrengthRule {
    double coef = 30.0;
    double power = 1.0;
    std::string text = "30k";

    static StrengthRule parse(const std::string& s);
    double resolve(double k) const { return power == 0.0 ? coef : coef * std::pow(k, power); }
};

/// PML width: multiples of the wavelength ("lambda", "2lambda"), element layers ("3h") or a number.
struct WidthRule {
    enum class Kind { Wavelengths, Layers, Fixed };
    Kind kind = Kind::Wavelengths;
    double value = 1.0;
    std::string text = "lambda";

    static WidthRule parse(const std::string& s);
    double resolve(double k, double h) const;
};

OverlapRule parse_overlap(const std::string& s);

struct SourceSpec {
    enum class Kind { Gaussian, ElementBump };
    Kind kind = Kind::Gaussian;
    /// Empty means the centre of Omega_int.
    std::optional<Point> center;
    /// Gaussian standard deviation as a fraction of the wavelength (default 1/8), or absolute if set.
    double width_wavelengths = 0.125;
    std::optional<double> width_absolute;
    /// Integral of f.
    double amplitude = 1.0;

    double sigma(double k) const;
    /// Resolved source; throws if the Gaussian's 6-sigma box leaves Omega_int.
    SourceFunction resolve(const Grid& grid, double k) const;
};

struct ExperimentConfig {
    std::vector<double> ks{20.0, 30.0, 40.0};
    std::string wavespeed = "constant";
    double l = 1.0;
    double d = 1.0;
    double pollution_constant = 1.0;
    double h_target = 0.0;  // > 0 overrides the pollution rule
    int p = 2;
    int quad_order = 0;
    PmlProfile::Kind pml_kind = PmlProfile::Kind::Cubic;
    WidthRule kappa = WidthRule::parse("lambda");
    std::optional<WidthRule> kappa_interior;
    StrengthRule strength = StrengthRule::parse("30k");
    double kappa_lin_fraction = 0.5;
    std::vector<std::pair<int, int>> layouts{{2, 1}, {4, 1}, {8, 1}};
    std::vector<std::string> overlaps{"2h", "h"};
    std::vector<Method> methods{Method::RAS, Method::RMS};
    std::vector<std::vector<int>> sweep_override;
    double tol = 1e-6;
    int max_iters = 100;
    SourceSpec source;
    std::string initial_guess = "zero";
    unsigned seed = 0;
    std::size_t max_dofs = 1'500'000;
    std::string output = "results.csv";
    /// Raw key/value pairs, echoed into every output.
    Config raw;

    static ExperimentConfig from(const Config& cfg);
    static ExperimentConfig load(const std::string& path) { return from(Config::load(path)); }
};

/// Everything that depends only on k: mesh, coefficients, source.
struct Problem {
    double k = 0.0;
    double wavelength = 0.0;
    double kappa = 0.0;  // snapped
    double strength = 0.0;
    Grid grid;
    CoefficientField field;
    SourceFunction source;
    Rect omega_int;
};

Problem build_problem(const ExperimentConfig& cfg, double k);
/// Global matrix, load and reference solution for a problem.
std::shared_ptr<const GlobalSystem> build_system(const ExperimentConfig& cfg, const Problem& prob);

struct ResultRow {
    Method method = Method::RAS;
    double k = 0.0;
    int n1 = 1;
    int n2 = 1;
    std::string delta_rule;
    double delta_value = 0.0;
    int overlap_layers = 0;
    double kappa = 0.0;
    double a = 0.0;
    int p = 2;
    double h = 0.0;
    int dofs = 0;
    int iters = -1;
    double final_rel_res = 0.0;
    double rho = -1.0;
    int rho_index = 0;
    std::string status = "ok";
    double t_assemble = 0.0;
    double t_factor = 0.0;
    double t_iterate = 0.0;
    std::vector<double> residual_history;
};

/// Iteration index at which the designated rate is read: N1 + N2 - 1 for RAS, four subdomain
/// sweeps for RMS (one checkerboard iteration, two strip iterations).
int rate_index(Method method, int n1, int n2, int sweeps_per_iteration);

struct TableOptions {
    int threads = 0;  // 0 keeps the OpenMP default
    bool keep_history = false;
    std::string layout_dir;  // when set, a JSON layout report per cell goes here
};

std::vector<ResultRow> run_table(const ExperimentConfig& cfg, const TableOptions& options = {});

/// CSV with a '#'-prefixed config echo, then the header and one line per row.
void write_csv(std::ostream& os, const ExperimentConfig& cfg, const std::vector<ResultRow>& rows,
               bool include_timings = true);
/// Writes through a temporary file and renames it into place.
void write_csv_file(const std::string& path, const ExperimentConfig& cfg, const std::vector<ResultRow>& rows);

/// k, N1, N2, delta_rule, rho_RAS, rho_RMS pivot of table rows.
void write_rate_csv(std::ostream& os, const ExperimentConfig& cfg, const std::vector<ResultRow>& rows);

struct AccuracyReport {
    double k = 0.0;
    double a = 0.0;
    double kappa = 0.0;
    double h = 0.0;
    int dofs = 0;
    int annulus_nodes = 0;
    double rel_error = 0.0;
    double source_factor = 0.0;  // integral of f J0(k|y - x0|)
};

/// Direct PML solve with a centred Gaussian source against the free-space Hankel solution on
/// the annulus { |x - x0| >= lambda, dist(x, boundary of Omega_int) >= lambda/2 }.
AccuracyReport pml_accuracy_test(const ExperimentConfig& cfg, double k);

}  // namespace helmdd
