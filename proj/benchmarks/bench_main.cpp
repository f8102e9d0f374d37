#include "dmimo/fp_optimizer.hpp"
#include "dmimo/mc_oracle.hpp"

#include <benchmark/benchmark.h>

namespace {

dmimo::ProblemSpec problem(int aps, int ues, double qos) {
    dmimo::SystemConfig sys;
    sys.geometry.num_aps = aps;
    sys.geometry.num_ues = ues;
    return dmimo::draw_problem(sys, qos, 1);
}

void BM_SinrEvaluate(benchmark::State& state) {
    const int aps = static_cast<int>(state.range(0));
    const int ues = aps / 2;
    const dmimo::ProblemSpec ps = problem(aps, ues, 0.0);
    const dmimo::SinrModel model = dmimo::candidate_model(ps);
    const dmimo::Vector eta = dmimo::Vector::Constant(ues, 0.7);
    const dmimo::Matrix d = dmimo::Matrix::Constant(aps, ues, 0.6);
    for (auto _ : state) benchmark::DoNotOptimize(model.evaluate(eta, d));
}
BENCHMARK(BM_SinrEvaluate)->Arg(20)->Arg(60)->Arg(120);

void BM_Optimize(benchmark::State& state) {
    const int aps = static_cast<int>(state.range(0));
    const int ues = aps / 2;
    const dmimo::ProblemSpec ps = problem(aps, ues, 10.0);
    const dmimo::Matrix d0 = dmimo::initial_association(ps.lsfc.beta, dmimo::AssociationScheme::lsfc95);
    const dmimo::Vector eta0 = dmimo::Vector::Ones(ues);
    for (auto _ : state) benchmark::DoNotOptimize(dmimo::optimize(ps, eta0, d0));
}
BENCHMARK(BM_Optimize)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_BruteForce(benchmark::State& state) {
    dmimo::SystemConfig sys;
    sys.geometry.num_aps = 3;
    sys.geometry.num_ues = 2;
    sys.geometry.antennas_per_ap = 4;
    const dmimo::ProblemSpec ps = dmimo::draw_problem(sys, 0.0, 1);
    for (auto _ : state) benchmark::DoNotOptimize(dmimo::brute_force_small(ps, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_BruteForce)->Arg(6)->Arg(11)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
