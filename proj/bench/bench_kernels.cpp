// OpenMP kernels against their serial references on a k = 40 two-strip problem.
#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "helmdd/harness.hpp"

using namespace helmdd;

namespace {

struct Fixture {
    ExperimentConfig cfg;
    Problem prob;
    std::shared_ptr<const GlobalSystem> sys;
    SubdomainLayout layout;
    PartitionOfUnity pou;
    SchwarzContext ctx;
    CVector u;

    static ExperimentConfig make_config() {
        Config c;
        c.set("experiment.k", "40");
        return ExperimentConfig::from(c);
    }

    Fixture()
        : cfg(make_config()),
          prob(build_problem(cfg, 40.0)),
          sys(build_system(cfg, prob)),
          layout(build_layout(prob.grid, 4, 1, OverlapRule::layers(2), prob.kappa)),
          pou(build_pou(prob.grid, layout)),
          ctx(build_context(prob.grid, layout, pou, prob.field, sys)) {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        u.resize(sys->f.size());
        for (auto& z : u) z = {d(rng), d(rng)};
    }
};

Fixture& fixture() {
    static Fixture f;
    return f;
}

void BM_matvec(benchmark::State& s) {
    auto& f = fixture();
    for (auto _ : s) benchmark::DoNotOptimize(matvec(f.sys->a, f.u));
}
void BM_matvec_serial(benchmark::State& s) {
    auto& f = fixture();
    for (auto _ : s) benchmark::DoNotOptimize(matvec_serial(f.sys->a, f.u));
}
void BM_assemble(benchmark::State& s) {
    auto& f = fixture();
    const auto& g = f.prob.grid;
    for (auto _ : s) benchmark::DoNotOptimize(assemble_matrix(g, {g.all_elements(), f.prob.field, 0}));
}
void BM_assemble_serial(benchmark::State& s) {
    auto& f = fixture();
    const auto& g = f.prob.grid;
    for (auto _ : s)
        benchmark::DoNotOptimize(assemble_matrix(g, {g.all_elements(), f.prob.field, 0}, Execution::Serial));
}
void BM_ras_step(benchmark::State& s) {
    auto& f = fixture();
    for (auto _ : s) benchmark::DoNotOptimize(ras_step(f.ctx, f.u));
}
void BM_ras_step_serial(benchmark::State& s) {
    auto& f = fixture();
    for (auto _ : s) benchmark::DoNotOptimize(ras_step_serial(f.ctx, f.u));
}

}  // namespace

BENCHMARK(BM_matvec)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_matvec_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_assemble)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_assemble_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ras_step)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ras_step_serial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
