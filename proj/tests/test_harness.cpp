#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "helmdd/hankel.hpp"
#include "support.hpp"

using namespace helmdd;
namespace fs = std::filesystem;

namespace {

Config parse(const std::string& text) {
    std::istringstream is(text);
    return Config::parse(is, "test.cfg");
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "helmdd_test_harness";
    fs::create_directories(dir);
    return dir / name;
}

int run(const std::string& cmd, std::string* output = nullptr) {
    const fs::path log = scratch("cmd.log");
    const int status = std::system((cmd + " > " + log.string() + " 2>&1").c_str());
    if (output) {
        std::ifstream in(log);
        std::stringstream ss;
        ss << in.rdbuf();
        *output = ss.str();
    }
    return status;
}

const char* kSmall = R"(# two-strip smoke configuration
experiment.k = 10
mesh.h = 0.0625
layout.subdomains = 2x1
layout.overlap = 2h, h
schwarz.methods = RAS, RMS
)";

}  // namespace

TEST_CASE("config parsing") {
    const Config c = parse("a.b = 1  # comment\n\n  section.list = x, y ,z\n");
    CHECK(c.get_or("a.b", "") == "1");
    CHECK(c.list_or("section.list", {}) == std::vector<std::string>{"x", "y", "z"});
    CHECK(c.number_or("a.b", 0) == 1.0);
    CHECK(c.integer_or("missing.key", 7) == 7);
    CHECK_THROWS_WITH_AS(parse("a.b = 1\na.b = 2\n"), doctest::Contains("duplicate key 'a.b'"), Error);
    CHECK_THROWS_WITH_AS(parse("nodot = 1\n"), doctest::Contains("test.cfg:1"), Error);
    CHECK_THROWS_AS(parse("just words\n"), Error);
    CHECK_THROWS_WITH_AS(parse("a.b = x\n").number_or("a.b", 0), doctest::Contains("a.b"), Error);
    CHECK_THROWS_WITH_AS(Config::load("/nonexistent/dir/x.cfg"), doctest::Contains("/nonexistent/dir/x.cfg"), Error);
}

TEST_CASE("experiment config: defaults and unknown keys") {
    const ExperimentConfig d = ExperimentConfig::from(parse(""));
    CHECK(d.ks == std::vector<double>{20, 30, 40});
    CHECK(d.p == 2);
    CHECK(d.strength.resolve(20.0) == doctest::Approx(600.0));
    CHECK(d.kappa.resolve(20.0, 0.01) == doctest::Approx(2 * std::numbers::pi / 20));
    CHECK(d.tol == 1e-6);
    CHECK(d.overlaps == std::vector<std::string>{"2h", "h"});
    CHECK_THROWS_WITH_AS(ExperimentConfig::from(parse("pml.strenght = 30k\n")), doctest::Contains("pml.strenght"), Error);
    CHECK_THROWS_AS(ExperimentConfig::from(parse("pml.kind = radial\n")), Error);
    CHECK_THROWS_AS(ExperimentConfig::from(parse("layout.subdomains = 2by1\n")), Error);
    CHECK_THROWS_AS(ExperimentConfig::from(parse("schwarz.methods = GMRES\n")), Error);
    const ExperimentConfig e = ExperimentConfig::from(
        parse("layout.subdomains = 2x2, 4x1\nschwarz.sweeps = 0 1 2 3 | 3 2 1 0\nsource.width = lambda/10\n"
              "source.center = 0.4, 0.6\npml.kind = smooth_capped\n"));
    CHECK(e.layouts == std::vector<std::pair<int, int>>{{2, 2}, {4, 1}});
    CHECK(e.sweep_override == std::vector<std::vector<int>>{{0, 1, 2, 3}, {3, 2, 1, 0}});
    CHECK(e.source.width_wavelengths == doctest::Approx(0.1));
    CHECK(e.source.center->x == 0.4);
    CHECK(e.pml_kind == PmlProfile::Kind::SmoothCapped);
}

TEST_CASE("rule parsing") {
    CHECK(StrengthRule::parse("30k").resolve(100) == doctest::Approx(3000));
    CHECK(StrengthRule::parse("0.3k^2").resolve(100) == doctest::Approx(3000));
    CHECK(StrengthRule::parse("k^2.5").resolve(100) == doctest::Approx(100000));
    CHECK(StrengthRule::parse("5e3").resolve(100) == doctest::Approx(5000));
    CHECK_THROWS_AS(StrengthRule::parse("lots"), Error);
    CHECK(WidthRule::parse("lambda").resolve(2 * std::numbers::pi, 0.1) == doctest::Approx(1.0));
    CHECK(WidthRule::parse("2lambda").resolve(2 * std::numbers::pi, 0.1) == doctest::Approx(2.0));
    CHECK(WidthRule::parse("3h").resolve(10, 0.1) == doctest::Approx(0.3));
    CHECK(WidthRule::parse("0.25").resolve(10, 0.1) == doctest::Approx(0.25));
    CHECK_THROWS_AS(WidthRule::parse("-1"), Error);
    CHECK(parse_overlap("1/80").kind == OverlapRule::Kind::Fixed);
    CHECK(parse_overlap("1/80").value == doctest::Approx(0.0125));
    CHECK(parse_overlap("2h").value == 2.0);
    CHECK(parse_overlap("h").kind == OverlapRule::Kind::Layers);
    CHECK(parse_overlap("h").value == 1.0);
}

TEST_CASE("Hankel function checks") {
    // Large-argument asymptotics.
    CHECK(std::abs(hankel1_0(50.0)) == doctest::Approx(std::sqrt(2.0 / (std::numbers::pi * 50.0))).epsilon(0.01));
    // Wronskian J0 Y0' - J0' Y0 = 2 / (pi z) with J0' = -J1, Y0' = -Y1.
    for (double z : {0.1, 1.0, 7.5, 40.0}) {
        const cplx h0 = hankel1_0(z), h1 = hankel1_1(z);
        const double w = -h0.real() * h1.imag() + h1.real() * h0.imag();
        CHECK(std::abs(w - 2.0 / (std::numbers::pi * z)) <= 1e-8);
    }
    // Tabulated values at z = 1: J0 = 0.7651976866, Y0 = 0.0882569642.
    CHECK(hankel1_0(1.0).real() == doctest::Approx(0.7651976866).epsilon(1e-9));
    CHECK(hankel1_0(1.0).imag() == doctest::Approx(0.0882569642).epsilon(1e-9));
    const Point x0{0.5, 0.5};
    const cplx east = hankel_reference(20, x0, {0.8, 0.5});
    CHECK(std::abs(east - hankel_reference(20, x0, {0.5, 0.2})) <= 1e-13 * std::abs(east));
    CHECK(std::abs(east - hankel_reference(20, x0, {0.5 + 0.3 / std::sqrt(2.0), 0.5 + 0.3 / std::sqrt(2.0)})) <=
          1e-12 * std::abs(east));
    CHECK_THROWS_AS(hankel_reference(20, x0, x0), Error);
    CHECK_THROWS_AS(hankel1_0(0.0), Error);
}

TEST_CASE("Gaussian source: normalisation and support check") {
    const ExperimentConfig cfg = testing::small_config(20.0, 1.0 / 40);
    const Problem prob = build_problem(cfg, 20.0);
    const CVector b = assemble_load(prob.grid, {prob.source, prob.omega_int, 0});
    cplx total{};
    for (const cplx& v : b) total += v;
    CHECK(total.real() == doctest::Approx(1.0).epsilon(1e-6));
    SourceSpec wide;
    wide.width_absolute = 0.2;
    CHECK_THROWS_WITH_AS(wide.resolve(prob.grid, 20.0), doctest::Contains("6-sigma"), Error);
    SourceSpec bump;
    bump.kind = SourceSpec::Kind::ElementBump;
    const CVector e = assemble_load(prob.grid, {bump.resolve(prob.grid, 20.0), prob.omega_int, 0});
    total = {};
    for (const cplx& v : e) total += v;
    CHECK(total.real() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("build_problem resolves the PML and mesh rules") {
    Config c;
    c.set("experiment.k", "20");
    const ExperimentConfig cfg = ExperimentConfig::from(c);
    const Problem prob = build_problem(cfg, 20.0);
    CHECK(prob.grid.h() <= std::pow(20.0, -1.25));
    CHECK(prob.kappa >= prob.wavelength);
    CHECK(prob.kappa < prob.wavelength + prob.grid.h());
    CHECK(prob.strength == doctest::Approx(600.0));
    CHECK(prob.grid.order() == 2);
    Config capped = c;
    capped.set("run.max_dofs", "1000");
    CHECK_THROWS_WITH_AS(build_problem(ExperimentConfig::from(capped), 20.0), doctest::Contains("max-dofs"), Error);
}

TEST_CASE("rate index") {
    CHECK(rate_index(Method::RAS, 2, 2, 1) == 3);
    CHECK(rate_index(Method::RAS, 4, 1, 1) == 4);
    CHECK(rate_index(Method::RMS, 2, 2, 4) == 1);
    CHECK(rate_index(Method::RMS, 4, 1, 2) == 2);
}

TEST_CASE("run_table rows, CSV schema and reproducibility") {
    const ExperimentConfig cfg = ExperimentConfig::from(parse(kSmall));
    const auto rows = run_table(cfg);
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) {
        CHECK(r.status == "ok");
        CHECK(r.iters >= 1);
        CHECK(r.final_rel_res <= 1e-6);
        CHECK(r.rho > 0.0);
        CHECK(r.dofs > 0);
    }
    std::ostringstream a, b;
    write_csv(a, cfg, rows, false);
    write_csv(b, cfg, run_table(cfg), false);
    CHECK(a.str() == b.str());
    const std::string text = a.str();
    CHECK(text.find("# experiment.k = 10") != std::string::npos);
    CHECK(text.find("method,k,N1,N2,delta_rule,delta_value,kappa,a,p,h,dofs,iters,final_rel_res,rho,status\n") !=
          std::string::npos);

    std::ostringstream rate;
    write_rate_csv(rate, cfg, rows);
    CHECK(rate.str().find("k,N1,N2,delta_rule,rho_RAS,rho_RMS\n") != std::string::npos);

    const fs::path out = scratch("rows.csv");
    write_csv_file(out.string(), cfg, rows);
    CHECK(fs::exists(out));
    CHECK_FALSE(fs::exists(out.string() + ".tmp"));
}

TEST_CASE("failed cells are recorded and the run continues") {
    ExperimentConfig cfg = ExperimentConfig::from(parse(kSmall));
    cfg.overlaps = {"0.5h", "h"};
    const auto rows = run_table(cfg);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].status.find("error:") == 0);
    CHECK(rows[0].status.find("below the mesh size") != std::string::npos);
    CHECK(rows[2].status == "ok");
}

TEST_CASE("command line") {
    const std::string cli = HELMDD_CLI;
    std::string out;
    CHECK(run(cli + " table --config /nonexistent/strip.cfg", &out) != 0);
    CHECK(out.find("/nonexistent/strip.cfg") != std::string::npos);

    const fs::path bad = scratch("bad.cfg");
    std::ofstream(bad) << "layout.overlapp = h\n";
    CHECK(run(cli + " table --config " + bad.string(), &out) != 0);
    CHECK(out.find("layout.overlapp") != std::string::npos);

    const fs::path good = scratch("good.cfg");
    std::ofstream(good) << kSmall;
    const fs::path dir = scratch("cli_out");
    CHECK(run(cli + " table --threads 1 --config " + good.string() + " --out " + dir.string(), &out) == 0);
    CHECK(fs::exists(dir / "results.csv"));
    CHECK(fs::exists(dir / "layouts"));
    CHECK(run(cli + " rate --config " + good.string() + " --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "rate.csv"));
    CHECK(run(cli + " export-matrix --config " + good.string() + " --out " + dir.string()) == 0);
    std::ifstream a(dir / "A.coo");
    const CsrMatrix m = read_coo(a);
    CHECK(m.rows > 0);
    CHECK(run(cli + " table --config " + good.string() + " --max-dofs 100 --strict --out " + dir.string(), &out) != 0);
    CHECK(run(cli + " bogus") != 0);
}
