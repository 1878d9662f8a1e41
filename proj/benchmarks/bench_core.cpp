#include <benchmark/benchmark.h>

#include "banditcv/algorithms.hpp"
#include "banditcv/control_variates.hpp"
#include "banditcv/environments.hpp"

using namespace banditcv;

namespace {

void BM_SolveSpd(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(1);
    Matrix m(n, n);
    for (double& v : m.data) v = rng.uniform(-1.0, 1.0);
    Matrix a = transpose(m) * m;
    for (int i = 0; i < n; ++i) a(i, i) += 1.0;
    Vector b(n);
    for (double& v : b) v = rng.uniform(-1.0, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(solve_spd(a, b));
}
BENCHMARK(BM_SolveSpd)->Arg(5)->Arg(8)->Arg(20);

void BM_Chi2Quantile(benchmark::State& state) {
    const int dof = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(chi2_quantile(0.95, dof));
}
BENCHMARK(BM_Chi2Quantile)->Arg(8)->Arg(98)->Arg(998)->Arg(4998);

void BM_GateTable(benchmark::State& state) {
    const int t_max = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(build_gate_table(t_max, 0.05, 2));
}
BENCHMARK(BM_GateTable)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_Refresh(benchmark::State& state) {
    const int t = static_cast<int>(state.range(0));
    Rng rng(2);
    ObservationLog log(5, 1);
    for (int s = 0; s < t; ++s) {
        Vector x(5);
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        log.append(x, rng.gaussian(0.0, 1.0), {rng.gaussian(0.0, 1.0)}, {0.0});
    }
    const Vector theta(5, 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(refresh(log, theta, 1.0, 0.05));
}
BENCHMARK(BM_Refresh)->Arg(100)->Arg(1000)->Arg(5000);

void BM_LearnerStep(benchmark::State& state) {
    const ProblemInstance inst = make_linear_instance(3);
    Rng hist(0);
    VariantConfig config;
    config.variant = static_cast<Variant>(state.range(0));
    AfcLearner learner = make_learner(inst, config, hist);
    learner.gate_table =
        std::make_shared<const std::vector<double>>(build_gate_table(1 << 20, 0.05, 2));
    const ActionSet set{inst.actions};
    uint64_t t = 0;
    for (auto _ : state) {
        Rng noise(derive_seed(9, {t})), extra(derive_seed(10, {t}));
        benchmark::DoNotOptimize(step(learner, inst, set, noise, extra));
        t += 1;
    }
}
BENCHMARK(BM_LearnerStep)
    ->Arg(static_cast<int>(Variant::vanilla))
    ->Arg(static_cast<int>(Variant::af))
    ->Arg(static_cast<int>(Variant::is));

}  // namespace

BENCHMARK_MAIN();
