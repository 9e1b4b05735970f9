#include "cir/cir.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace cir;

ReferenceSignal two_channel() {
    return ReferenceSignal::generated({ChannelReference{ReferenceKind::Sawtooth},
                                       ChannelReference{ReferenceKind::Sine}});
}

void BM_CirStep(benchmark::State& state) {
    const auto sd = systems::spring_damper(0.05);
    const auto noise = NoiseSpec::isotropic(4, 2, 1e-4, 1e-4);
    CirController controller(sd, noise);
    const Vector y = Vector::Constant(2, 0.1);
    const Vector r = Vector::Constant(2, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(controller.step(y, r, r));
    }
}
BENCHMARK(BM_CirStep);

void BM_UmvGain(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal;
    Matrix A = Matrix::NullaryExpr(n, n, [&] { return 0.3 * normal(rng); });
    Matrix B = Matrix::NullaryExpr(n, 2, [&] { return normal(rng); });
    Matrix C = Matrix::NullaryExpr(2, n, [&] { return normal(rng); });
    const StateSpaceModel m(A, B, C);
    const auto noise = NoiseSpec::isotropic(n, 2, 1e-3, 1e-3);
    const Matrix P = Matrix::Identity(n, n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(umv_gain(P, m, noise));
    }
}
BENCHMARK(BM_UmvGain)->Arg(4)->Arg(16)->Arg(64);

void BM_Pinv(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(2);
    std::normal_distribution<double> normal;
    const Matrix M = Matrix::NullaryExpr(2 * n, n, [&] { return normal(rng); });
    for (auto _ : state) {
        benchmark::DoNotOptimize(pinv(M));
    }
}
BENCHMARK(BM_Pinv)->Arg(8)->Arg(64)->Arg(200);

void BM_ProjectReference(benchmark::State& state) {
    const auto steps = static_cast<int>(state.range(0));
    const auto batch = reachable_batch(systems::tall_demo(), steps);
    const Vector Y = Vector::Ones(2 * steps);
    for (auto _ : state) {
        benchmark::DoNotOptimize(project_reference(Y, batch.M));
    }
}
BENCHMARK(BM_ProjectReference)->Arg(50)->Arg(200);

void BM_MonteCarlo(benchmark::State& state) {
    const auto sd = systems::spring_damper(0.05);
    const auto noise = NoiseSpec::isotropic(4, 2, 1e-4, 1e-4);
    const Scenario scenario{sd, noise, [sd, noise] { return std::make_unique<CirController>(sd, noise); },
                            two_channel(), 400, Vector()};
    for (auto _ : state) {
        benchmark::DoNotOptimize(monte_carlo(scenario, static_cast<int>(state.range(0)), 1));
    }
}
BENCHMARK(BM_MonteCarlo)->Arg(10)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
