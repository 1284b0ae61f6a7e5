#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <omp.h>

#include "helmdd/harness.hpp"

namespace fs = std::filesystem;
using namespace helmdd;

namespace {

struct Common {
    std::string config;
    std::string out = ".";
    int threads = 0;
    long long max_dofs = 0;
    bool strict = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "experiment config file")->required();
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--threads", c.threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
    sub->add_option("--max-dofs", c.max_dofs, "override the dof cap from the config")->check(CLI::PositiveNumber);
    sub->add_flag("--strict", c.strict, "exit nonzero on any failed cell or accuracy gate");
}

ExperimentConfig load(const Common& c) {
    ExperimentConfig cfg = ExperimentConfig::load(c.config);
    if (c.max_dofs > 0) cfg.max_dofs = static_cast<std::size_t>(c.max_dofs);
    if (c.threads > 0) omp_set_num_threads(c.threads);
    fs::create_directories(c.out);
    return cfg;
}

constexpr double kAccuracyGate = 0.05;

/// Returns false when any k misses the gate.
bool run_accuracy(const ExperimentConfig& cfg, const Common& c, std::ostream& log) {
    const fs::path path = fs::path(c.out) / "accuracy.csv";
    std::ofstream csv(path);
    csv << "k,a,kappa,h,dofs,annulus_nodes,rel_error,source_factor,pass\n" << std::setprecision(10);
    bool ok = true;
    for (double k : cfg.ks) {
        const AccuracyReport r = pml_accuracy_test(cfg, k);
        const bool pass = r.rel_error <= kAccuracyGate;
        ok = ok && pass;
        csv << r.k << ',' << r.a << ',' << r.kappa << ',' << r.h << ',' << r.dofs << ',' << r.annulus_nodes << ','
            << r.rel_error << ',' << r.source_factor << ',' << (pass ? 1 : 0) << '\n';
        log << "accuracy k=" << r.k << " a=" << r.a << " kappa=" << r.kappa << " dofs=" << r.dofs
            << " rel_error=" << r.rel_error << (pass ? " ok" : " FAIL") << '\n';
    }
    log << "wrote " << path.string() << '\n';
    return ok;
}

bool all_ok(const std::vector<ResultRow>& rows, std::ostream& log) {
    bool ok = true;
    for (const auto& r : rows)
        if (r.status != "ok") {
            ok = false;
            log << "cell " << to_string(r.method) << " k=" << r.k << " " << r.n1 << "x" << r.n2 << " delta="
                << r.delta_rule << ": " << r.status << '\n';
        }
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Helmholtz PML finite elements with overlapping Schwarz iterations"};
    app.require_subcommand(1);

    Common table_opts, acc_opts, rate_opts, export_opts;
    auto* table = app.add_subcommand("table", "iteration-count table over (k, layout, overlap, method)");
    add_common(table, table_opts);
    auto* accuracy = app.add_subcommand("accuracy", "PML solve against the free-space Hankel solution");
    add_common(accuracy, acc_opts);
    auto* rate = app.add_subcommand("rate", "rate of residual reduction against k");
    add_common(rate, rate_opts);
    auto* exportm = app.add_subcommand("export-matrix", "write A and f of the first k as coordinate lists");
    add_common(exportm, export_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (table->parsed()) {
            const ExperimentConfig cfg = load(table_opts);
            if (table_opts.strict && !run_accuracy(cfg, table_opts, std::cerr)) {
                std::cerr << "error: PML accuracy gate failed; table not run\n";
                return 2;
            }
            TableOptions opt;
            opt.threads = table_opts.threads;
            opt.layout_dir = (fs::path(table_opts.out) / "layouts").string();
            fs::create_directories(opt.layout_dir);
            const auto rows = run_table(cfg, opt);
            const fs::path path = fs::path(table_opts.out) / fs::path(cfg.output).filename();
            write_csv_file(path.string(), cfg, rows);
            std::cout << "wrote " << path.string() << " (" << rows.size() << " rows)\n";
            if (!all_ok(rows, std::cerr) && table_opts.strict) return 3;
        } else if (accuracy->parsed()) {
            const ExperimentConfig cfg = load(acc_opts);
            if (!run_accuracy(cfg, acc_opts, std::cout) && acc_opts.strict) return 2;
        } else if (rate->parsed()) {
            const ExperimentConfig cfg = load(rate_opts);
            TableOptions opt;
            opt.threads = rate_opts.threads;
            const auto rows = run_table(cfg, opt);
            const fs::path path = fs::path(rate_opts.out) / "rate.csv";
            {
                std::ofstream out(path.string() + ".tmp");
                write_rate_csv(out, cfg, rows);
            }
            fs::rename(path.string() + ".tmp", path);
            write_csv_file((fs::path(rate_opts.out) / "rate_cells.csv").string(), cfg, rows);
            std::cout << "wrote " << path.string() << '\n';
            if (!all_ok(rows, std::cerr) && rate_opts.strict) return 3;
        } else if (exportm->parsed()) {
            const ExperimentConfig cfg = load(export_opts);
            const Problem prob = build_problem(cfg, cfg.ks.front());
            const CsrMatrix a = assemble_matrix(prob.grid, {prob.grid.all_elements(), prob.field, cfg.quad_order});
            const CVector f = assemble_load(prob.grid, {prob.source, prob.omega_int, cfg.quad_order});
            std::ofstream fa(fs::path(export_opts.out) / "A.coo");
            std::ofstream ff(fs::path(export_opts.out) / "f.coo");
            write_coo(fa, a);
            write_coo(ff, f);
            std::cout << "wrote A.coo (" << a.rows << " rows, " << a.nnz() << " nonzeros) and f.coo to "
                      << export_opts.out << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
