#include "helmdd/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <regex>
#include <sstream>

#include <omp.h>

#include "helmdd/hankel.hpp"

namespace helmdd {

namespace {

double parse_number(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw Error("cannot parse " + what + " '" + s + "'");
    }
}

/// "a/b", "a" or "" (meaning 1).
double parse_fraction(const std::string& s, const std::string& what) {
    const std::string t = trim(s);
    if (t.empty()) return 1.0;
    const auto slash = t.find('/');
    if (slash == std::string::npos) return parse_number(t, what);
    const std::string num = trim(t.substr(0, slash));
    return (num.empty() ? 1.0 : parse_number(num, what)) / parse_number(trim(t.substr(slash + 1)), what);
}

std::function<double(Point)> named_wavespeed(const std::string& name, const Rect& omega_int) {
    if (name == "constant") return {};
    if (name == "bump") {
        // Smooth compactly supported slowdown in the middle of Omega_int: 1 - c vanishes outside.
        const Point c{0.5 * (omega_int.x_lo + omega_int.x_hi), 0.5 * (omega_int.y_lo + omega_int.y_hi)};
        const double radius = 0.25 * std::min(omega_int.width(), omega_int.height());
        return [c, radius](Point x) {
            const double s2 = ((x.x - c.x) * (x.x - c.x) + (x.y - c.y) * (x.y - c.y)) / (radius * radius);
            if (s2 >= 1.0) return 1.0;
            return 1.0 - 0.2 * std::exp(1.0 - 1.0 / (1.0 - s2));
        };
    }
    throw Error("unknown wavespeed profile '" + name + "' (expected constant or bump)");
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "experiment.k",     "experiment.wavespeed", "domain.l",          "domain.d",
        "mesh.pollution_constant", "mesh.h",        "mesh.p",            "mesh.quad_order",
        "pml.kind",         "pml.kappa",            "pml.kappa_interior", "pml.strength",
        "pml.kappa_lin",    "layout.subdomains",    "layout.overlap",    "schwarz.methods",
        "schwarz.tol",      "schwarz.max_iters",    "schwarz.sweeps",    "schwarz.initial_guess",
        "source.kind",      "source.center",        "source.width",      "source.amplitude",
        "run.seed",         "run.max_dofs",         "run.output"};
    return keys;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

StrengthRule StrengthRule::parse(const std::string& s) {
    static const std::regex re(R"(^\s*([0-9.eE+-]*)\s*\*?\s*k\s*(\^\s*([0-9.]+))?\s*$)");
    StrengthRule r;
    r.text = trim(s);
    std::smatch m;
    if (std::regex_match(r.text, m, re)) {
        r.coef = m[1].str().empty() ? 1.0 : parse_number(m[1].str(), "PML strength");
        r.power = m[3].matched ? parse_number(m[3].str(), "PML strength exponent") : 1.0;
    } else {
        r.coef = parse_number(r.text, "PML strength");
        r.power = 0.0;
    }
    if (r.coef < 0.0) throw Error("PML strength must be non-negative");
    return r;
}

WidthRule WidthRule::parse(const std::string& s) {
    WidthRule r;
    r.text = trim(s);
    if (const auto pos = r.text.find("lambda"); pos != std::string::npos) {
        r.kind = Kind::Wavelengths;
        std::string rest = r.text;
        rest.erase(pos, 6);
        r.value = parse_fraction(rest, "PML width");
    } else if (!r.text.empty() && r.text.back() == 'h') {
        r.kind = Kind::Layers;
        r.value = parse_fraction(r.text.substr(0, r.text.size() - 1), "PML width");
    } else {
        r.kind = Kind::Fixed;
        r.value = parse_fraction(r.text, "PML width");
    }
    if (!(r.value > 0.0)) throw Error("PML width must be positive");
    return r;
}

double WidthRule::resolve(double k, double h) const {
    switch (kind) {
        case Kind::Wavelengths: return value * 2.0 * std::numbers::pi / k;
        case Kind::Layers: return value * h;
        case Kind::Fixed: return value;
    }
    return value;
}

OverlapRule parse_overlap(const std::string& s) {
    const std::string t = trim(s);
    if (!t.empty() && t.back() == 'h') return OverlapRule::layers(parse_fraction(t.substr(0, t.size() - 1), "overlap"));
    return OverlapRule::fixed(parse_fraction(t, "overlap"));
}

double SourceSpec::sigma(double k) const {
    if (width_absolute) return *width_absolute;
    return width_wavelengths * 2.0 * std::numbers::pi / k;
}

SourceFunction SourceSpec::resolve(const Grid& grid, double k) const {
    const Rect& in = grid.interior();
    const Point c = center.value_or(Point{0.5 * (in.x_lo + in.x_hi), 0.5 * (in.y_lo + in.y_hi)});
    if (!in.contains_closed(c)) throw Error("source centre lies outside Omega_int");
    if (kind == Kind::Gaussian) {
        const double s = sigma(k);
        const Rect box{c.x - 3.0 * s, c.x + 3.0 * s, c.y - 3.0 * s, c.y + 3.0 * s};
        if (box.x_lo < in.x_lo || box.x_hi > in.x_hi || box.y_lo < in.y_lo || box.y_hi > in.y_hi)
            throw Error("Gaussian source: 6-sigma box is not contained in Omega_int");
        const double scale = amplitude / (2.0 * std::numbers::pi * s * s);
        return [c, s, scale](Point x) {
            const double r2 = (x.x - c.x) * (x.x - c.x) + (x.y - c.y) * (x.y - c.y);
            return cplx{scale * std::exp(-0.5 * r2 / (s * s)), 0.0};
        };
    }
    // Indicator of the element containing the centre, normalised to the requested integral.
    const int ex = std::min(grid.nx() - 1, static_cast<int>((c.x - grid.domain().x_lo) / grid.hx()));
    const int ey = std::min(grid.ny() - 1, static_cast<int>((c.y - grid.domain().y_lo) / grid.hy()));
    const Rect cell = grid.block_rect({ex, ex + 1, ey, ey + 1});
    const double value = amplitude / (grid.hx() * grid.hy());
    return [cell, value](Point x) { return cell.contains_closed(x) ? cplx{value, 0.0} : cplx{}; };
}

ExperimentConfig ExperimentConfig::from(const Config& cfg) {
    cfg.reject_unknown(known_keys());
    ExperimentConfig e;
    e.raw = cfg;
    e.ks.clear();
    for (const auto& s : cfg.list_or("experiment.k", {"20", "30", "40"})) e.ks.push_back(parse_number(s, "k"));
    for (double k : e.ks)
        if (!(k >= 1.0)) throw Error("experiment.k: wavenumbers must be >= 1");
    e.wavespeed = cfg.get_or("experiment.wavespeed", "constant");
    e.l = cfg.number_or("domain.l", 1.0);
    e.d = cfg.number_or("domain.d", 1.0);
    e.pollution_constant = cfg.number_or("mesh.pollution_constant", 1.0);
    e.h_target = cfg.number_or("mesh.h", 0.0);
    e.p = cfg.integer_or("mesh.p", 2);
    e.quad_order = cfg.integer_or("mesh.quad_order", 0);
    const std::string kind = cfg.get_or("pml.kind", "cubic");
    if (kind == "cubic")
        e.pml_kind = PmlProfile::Kind::Cubic;
    else if (kind == "smooth_capped")
        e.pml_kind = PmlProfile::Kind::SmoothCapped;
    else
        throw Error("pml.kind: expected cubic or smooth_capped, got '" + kind + "'");
    e.kappa = WidthRule::parse(cfg.get_or("pml.kappa", "lambda"));
    if (auto ki = cfg.get("pml.kappa_interior")) e.kappa_interior = WidthRule::parse(*ki);
    e.strength = StrengthRule::parse(cfg.get_or("pml.strength", "30k"));
    e.kappa_lin_fraction = cfg.number_or("pml.kappa_lin", 0.5);
    e.layouts.clear();
    for (const auto& s : cfg.list_or("layout.subdomains", {"2x1", "4x1", "8x1"})) {
        const auto x = s.find('x');
        if (x == std::string::npos) throw Error("layout.subdomains: expected N1xN2, got '" + s + "'");
        const int n1 = static_cast<int>(parse_number(s.substr(0, x), "N1"));
        const int n2 = static_cast<int>(parse_number(s.substr(x + 1), "N2"));
        if (n1 < 1 || n2 < 1) throw Error("layout.subdomains: counts must be positive");
        e.layouts.emplace_back(n1, n2);
    }
    e.overlaps = cfg.list_or("layout.overlap", {"2h", "h"});
    for (const auto& o : e.overlaps) parse_overlap(o);
    e.methods.clear();
    for (const auto& s : cfg.list_or("schwarz.methods", {"RAS", "RMS"})) e.methods.push_back(parse_method(s));
    e.tol = cfg.number_or("schwarz.tol", 1e-6);
    e.max_iters = cfg.integer_or("schwarz.max_iters", 100);
    if (auto sw = cfg.get("schwarz.sweeps")) {
        std::stringstream ss(*sw);
        std::string seq;
        while (std::getline(ss, seq, '|')) {
            std::stringstream is(seq);
            std::vector<int> v;
            int j = 0;
            while (is >> j) v.push_back(j);
            if (!v.empty()) e.sweep_override.push_back(v);
        }
    }
    e.initial_guess = cfg.get_or("schwarz.initial_guess", "zero");
    if (e.initial_guess != "zero" && e.initial_guess != "random")
        throw Error("schwarz.initial_guess: expected zero or random");
    const std::string skind = cfg.get_or("source.kind", "gaussian");
    if (skind == "gaussian")
        e.source.kind = SourceSpec::Kind::Gaussian;
    else if (skind == "element_bump")
        e.source.kind = SourceSpec::Kind::ElementBump;
    else
        throw Error("source.kind: expected gaussian or element_bump, got '" + skind + "'");
    if (auto c = cfg.get("source.center")) {
        const auto parts = split_list(*c);
        if (parts.size() != 2) throw Error("source.center: expected 'x, y'");
        e.source.center = Point{parse_number(parts[0], "source.center"), parse_number(parts[1], "source.center")};
    }
    if (auto w = cfg.get("source.width")) {
        const std::string t = trim(*w);
        if (const auto pos = t.find("lambda"); pos != std::string::npos) {
            std::string rest = t;
            rest.erase(pos, 6);
            e.source.width_wavelengths = parse_fraction(rest, "source.width");
        } else {
            e.source.width_absolute = parse_number(t, "source.width");
        }
    }
    e.source.amplitude = cfg.number_or("source.amplitude", 1.0);
    e.seed = static_cast<unsigned>(cfg.integer_or("run.seed", 0));
    e.max_dofs = static_cast<std::size_t>(cfg.number_or("run.max_dofs", 1.5e6));
    e.output = cfg.get_or("run.output", "results.csv");
    return e;
}

Problem build_problem(const ExperimentConfig& cfg, double k) {
    const Rect omega_int{0.0, cfg.l, 0.0, cfg.d};
    const MeshRule rule = cfg.h_target > 0.0 ? MeshRule::target(cfg.h_target) : MeshRule::pollution(cfg.pollution_constant);
    // The element size is fixed by Omega_int alone, so it is known before kappa is resolved.
    const double h_target = rule.resolve(k);
    const double h = std::max(cfg.l / std::ceil(cfg.l / h_target * (1.0 - 1e-9)),
                              cfg.d / std::ceil(cfg.d / h_target * (1.0 - 1e-9)));
    const double kappa_req = cfg.kappa.resolve(k, h);
    Grid grid = build_grid(omega_int, kappa_req, k, rule, cfg.p, cfg.max_dofs);
    const double kappa = std::min(grid.kappa_x(), grid.kappa_y());
    const double a = cfg.strength.resolve(k);
    const PmlProfile profile = cfg.pml_kind == PmlProfile::Kind::Cubic
                                   ? PmlProfile::cubic(a, kappa)
                                   : PmlProfile::smooth_capped(a, kappa, cfg.kappa_lin_fraction * kappa);
    CoefficientField field = make_field(omega_int, profile, k, named_wavespeed(cfg.wavespeed, omega_int));
    SourceFunction source = cfg.source.resolve(grid, k);
    return Problem{k, 2.0 * std::numbers::pi / k, kappa, a, std::move(grid), std::move(field), std::move(source),
                   omega_int};
}

std::shared_ptr<const GlobalSystem> build_system(const ExperimentConfig& cfg, const Problem& prob) {
    CsrMatrix a = assemble_matrix(prob.grid, {prob.grid.all_elements(), prob.field, cfg.quad_order});
    CVector f = assemble_load(prob.grid, {prob.source, prob.omega_int, cfg.quad_order});
    return std::make_shared<const GlobalSystem>(make_global_system(std::move(a), std::move(f)));
}

int rate_index(Method method, int n1, int n2, int sweeps_per_iteration) {
    if (method == Method::RAS) return n1 + n2 - 1;
    return std::max(1, 4 / std::max(1, sweeps_per_iteration));
}

std::vector<ResultRow> run_table(const ExperimentConfig& cfg, const TableOptions& options) {
    if (options.threads > 0) omp_set_num_threads(options.threads);
    std::vector<ResultRow> rows;
    for (double k : cfg.ks) {
        // One block of cells per (layout, overlap); both methods share the subdomain factors.
        struct Group {
            int n1, n2;
            std::string overlap;
        };
        std::vector<Group> groups;
        for (const auto& [n1, n2] : cfg.layouts)
            for (const auto& o : cfg.overlaps) groups.push_back({n1, n2, o});

        auto blank_row = [&](const Group& g, Method m) {
            ResultRow r;
            r.method = m;
            r.k = k;
            r.n1 = g.n1;
            r.n2 = g.n2;
            r.delta_rule = g.overlap;
            r.p = cfg.p;
            return r;
        };

        std::optional<Problem> prob;
        std::shared_ptr<const GlobalSystem> sys;
        double t_global = 0.0;
        try {
            const auto t0 = std::chrono::steady_clock::now();
            prob.emplace(build_problem(cfg, k));
            sys = build_system(cfg, *prob);
            t_global = seconds_since(t0);
        } catch (const std::exception& e) {
            for (const Group& g : groups)
                for (Method m : cfg.methods) {
                    ResultRow r = blank_row(g, m);
                    r.status = std::string("error: ") + e.what();
                    rows.push_back(r);
                }
            continue;
        }

        CVector u0(sys->f.size(), cplx{});
        if (cfg.initial_guess == "random") {
            std::mt19937_64 rng(cfg.seed);
            std::uniform_real_distribution<double> dist(-1.0, 1.0);
            for (auto& z : u0) z = {dist(rng), dist(rng)};
        }

        std::vector<std::vector<ResultRow>> group_rows(groups.size());
        const int ng = static_cast<int>(groups.size());
#pragma omp parallel for schedule(dynamic) if (options.threads > 1)
        for (int gi = 0; gi < ng; ++gi) {
            const Group& g = groups[gi];
            std::vector<ResultRow>& out = group_rows[gi];
            try {
                const OverlapRule overlap = parse_overlap(g.overlap);
                const double kappa_int = cfg.kappa_interior ? cfg.kappa_interior->resolve(k, prob->grid.h()) : prob->kappa;
                const SubdomainLayout layout = build_layout(prob->grid, g.n1, g.n2, overlap, kappa_int);
                const PartitionOfUnity pou = build_pou(prob->grid, layout);
                if (!options.layout_dir.empty()) {
                    std::string tag = g.overlap;
                    for (char& ch : tag)
                        if (ch == '/') ch = '_';
                    std::ostringstream name;
                    name << options.layout_dir << "/layout_k" << k << "_" << g.n1 << "x" << g.n2 << "_" << tag << ".json";
                    const std::string fname = name.str();
                    std::ofstream(fname) << layout_report(prob->grid, layout) << '\n';
                }
                const auto tf = std::chrono::steady_clock::now();
                SchwarzContext ctx = build_context(prob->grid, layout, pou, prob->field, sys, cfg.quad_order);
                const double t_factor = seconds_since(tf);
                ctx.tol = cfg.tol;
                ctx.max_iters = cfg.max_iters;
                SweepOrder order = default_sweep_order(layout);
                if (!cfg.sweep_override.empty()) order.sequences = cfg.sweep_override;
                order.validate(layout.size());
                for (Method m : cfg.methods) {
                    ResultRow r = blank_row(g, m);
                    r.delta_value = layout.delta;
                    r.overlap_layers = std::max(layout.overlap_layers_x, layout.overlap_layers_y);
                    r.kappa = prob->kappa;
                    r.a = prob->strength;
                    r.h = prob->grid.h();
                    r.dofs = prob->grid.num_free();
                    r.t_assemble = t_global;
                    r.t_factor = t_factor;
                    const int sweeps = m == Method::RMS ? static_cast<int>(order.sequences.size()) : 1;
                    r.rho_index = rate_index(m, g.n1, g.n2, sweeps);
                    RunOptions ro;
                    ro.min_iterations = r.rho_index;
                    const auto ti = std::chrono::steady_clock::now();
                    const IterationTrace tr = run_iteration(ctx, m, order, u0, ro);
                    r.t_iterate = seconds_since(ti);
                    r.iters = tr.iterations;
                    // Final residual at the convergence point, not after the extra rate iterations.
                    const int last = tr.iterations >= 0 ? tr.iterations : static_cast<int>(tr.records.size()) - 1;
                    r.final_rel_res = tr.records[last].rel_residual;
                    r.rho = rate_after(tr, r.rho_index);
                    r.status = tr.outcome == Outcome::Converged ? "ok" : "max_iters";
                    if (options.keep_history)
                        for (const auto& rec : tr.records) r.residual_history.push_back(rec.rel_residual);
                    out.push_back(std::move(r));
                }
            } catch (const std::exception& e) {
                out.clear();
                for (Method m : cfg.methods) {
                    ResultRow r = blank_row(g, m);
                    r.h = prob->grid.h();
                    r.dofs = prob->grid.num_free();
                    r.status = std::string("error: ") + e.what();
                    out.push_back(r);
                }
            }
        }
        for (auto& gr : group_rows)
            for (auto& r : gr) rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

void write_echo(std::ostream& os, const ExperimentConfig& cfg) {
    os << "# helmdd results\n";
    for (const auto& [key, value] : cfg.raw.entries()) os << "# " << key << " = " << value << '\n';
}

std::string csv_field(std::string s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

}  // namespace

void write_csv(std::ostream& os, const ExperimentConfig& cfg, const std::vector<ResultRow>& rows, bool include_timings) {
    write_echo(os, cfg);
    os << "method,k,N1,N2,delta_rule,delta_value,kappa,a,p,h,dofs,iters,final_rel_res,rho,status";
    if (include_timings) os << ",t_assemble,t_factor,t_iterate";
    os << '\n';
    os << std::setprecision(10);
    for (const ResultRow& r : rows) {
        os << to_string(r.method) << ',' << r.k << ',' << r.n1 << ',' << r.n2 << ',' << csv_field(r.delta_rule) << ','
           << r.delta_value << ',' << r.kappa << ',' << r.a << ',' << r.p << ',' << r.h << ',' << r.dofs << ','
           << r.iters << ',' << r.final_rel_res << ',' << r.rho << ',' << csv_field(r.status);
        if (include_timings) os << ',' << r.t_assemble << ',' << r.t_factor << ',' << r.t_iterate;
        os << '\n';
    }
}

void write_csv_file(const std::string& path, const ExperimentConfig& cfg, const std::vector<ResultRow>& rows) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw Error("cannot write '" + tmp + "'");
        write_csv(out, cfg, rows);
        if (!out) throw Error("write failed for '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

void write_rate_csv(std::ostream& os, const ExperimentConfig& cfg, const std::vector<ResultRow>& rows) {
    write_echo(os, cfg);
    os << "k,N1,N2,delta_rule,rho_RAS,rho_RMS\n";
    os << std::setprecision(10);
    struct Key {
        double k;
        int n1, n2;
        std::string delta;
        bool operator<(const Key& o) const {
            return std::tie(k, n1, n2, delta) < std::tie(o.k, o.n1, o.n2, o.delta);
        }
    };
    std::map<Key, std::pair<double, double>> pivot;
    std::vector<Key> order;
    for (const ResultRow& r : rows) {
        const Key key{r.k, r.n1, r.n2, r.delta_rule};
        if (!pivot.count(key)) {
            pivot[key] = {-1.0, -1.0};
            order.push_back(key);
        }
        (r.method == Method::RAS ? pivot[key].first : pivot[key].second) = r.rho;
    }
    for (const Key& key : order)
        os << key.k << ',' << key.n1 << ',' << key.n2 << ',' << csv_field(key.delta) << ',' << pivot[key].first << ','
           << pivot[key].second << '\n';
}

AccuracyReport pml_accuracy_test(const ExperimentConfig& cfg, double k) {
    if (cfg.wavespeed != "constant") throw Error("accuracy test requires a constant wavespeed");
    if (cfg.source.kind != SourceSpec::Kind::Gaussian) throw Error("accuracy test requires a Gaussian source");
    const Problem prob = build_problem(cfg, k);
    const double lambda = prob.wavelength;
    const double sigma = cfg.source.sigma(k);
    if (sigma > lambda / 8.0 * (1.0 + 1e-12)) throw Error("accuracy test: source width must be at most lambda/8");
    const auto sys = build_system(cfg, prob);
    const Grid& grid = prob.grid;
    const CVector u = grid.expand_free(sys->u_ref);
    const Rect& in = prob.omega_int;
    const Point x0 = cfg.source.center.value_or(Point{0.5 * (in.x_lo + in.x_hi), 0.5 * (in.y_lo + in.y_hi)});
    // Outside its support a radial source acts on the Hankel field through int f(y) J0(k|y - x0|) dy,
    // which for the normalised Gaussian is amplitude * exp(-k^2 sigma^2 / 2).
    const double factor = cfg.source.amplitude * std::exp(-0.5 * k * k * sigma * sigma);
    double num = 0.0, den = 0.0;
    int count = 0;
    for (int i = 0; i < grid.num_nodes(); ++i) {
        const Point x = grid.node(i);
        const double r = std::hypot(x.x - x0.x, x.y - x0.y);
        const double dist = std::min({x.x - in.x_lo, in.x_hi - x.x, x.y - in.y_lo, in.y_hi - x.y});
        if (r < lambda || dist < 0.5 * lambda) continue;
        const cplx ref = factor * hankel_reference(k, x0, x);
        num += std::norm(u[i] - ref);
        den += std::norm(ref);
        ++count;
    }
    if (count == 0) throw Error("accuracy test: the annulus contains no nodes");
    return {k, prob.strength, prob.kappa, grid.h(), grid.num_free(), count, std::sqrt(num / den), factor};
}

}  // namespace helmdd
