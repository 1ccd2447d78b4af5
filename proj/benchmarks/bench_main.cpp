#include <benchmark/benchmark.h>

#include <numeric>

#include "wsig/fnn.hpp"
#include "wsig/sig_kernel.hpp"
#include "wsig/signature.hpp"
#include "wsig/weighted_paths.hpp"

namespace {

void BM_TensorMul(benchmark::State& state) {
    const auto level = static_cast<std::size_t>(state.range(0));
    const std::vector<double> u{0.3, -0.2}, v{0.1, 0.4};
    const auto a = wsig::exp_of_vector(u, level);
    const auto b = wsig::exp_of_vector(v, level);
    for (auto _ : state) benchmark::DoNotOptimize(wsig::tensor_mul(a, b));
}
BENCHMARK(BM_TensorMul)->Arg(3)->Arg(5)->Arg(7)->Arg(9);

void BM_SignatureStream(benchmark::State& state) {
    const auto k = static_cast<std::size_t>(state.range(0));
    const auto x = wsig::time_augment(wsig::sample_bm(1, k, 1.0, 1).paths[0]);
    for (auto _ : state) benchmark::DoNotOptimize(wsig::signature_stream(x, 7));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(k));
}
BENCHMARK(BM_SignatureStream)->Arg(100)->Arg(400);

void BM_PVarAlphaNorm(benchmark::State& state) {
    const auto x = wsig::time_augment(wsig::sample_bm(1, 100, 1.0, 2).paths[0]);
    const auto s = wsig::signature_stream(x, 2);
    for (auto _ : state) benchmark::DoNotOptimize(wsig::pvar_alpha_norm(s, 2.1, 0.4));
}
BENCHMARK(BM_PVarAlphaNorm);

void BM_FnnGrad(benchmark::State& state) {
    auto batch = wsig::sample_bm(static_cast<std::size_t>(state.range(0)), 100, 1.0, 3);
    wsig::cache_weights(batch, wsig::WeightSpec{});
    const auto targets = wsig::evaluate_targets(batch, [](std::size_t k, const wsig::DiscretePath& x) {
        return x.value(k, 0);
    });
    const auto theta = wsig::FnnParams::initialize(40, 30, 1, true, 4);
    std::vector<std::size_t> idx(batch.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (auto _ : state) benchmark::DoNotOptimize(wsig::fnn_grad(theta, batch, targets, idx));
}
BENCHMARK(BM_FnnGrad)->Arg(50)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_GoursatKernel(benchmark::State& state) {
    const auto k = static_cast<std::size_t>(state.range(0));
    const auto b = wsig::sample_bm(2, k, 1.0, 5);
    const auto x = wsig::time_augment(b.paths[0]), y = wsig::time_augment(b.paths[1]);
    for (auto _ : state) benchmark::DoNotOptimize(wsig::goursat_kernel(x, y));
}
BENCHMARK(BM_GoursatKernel)->Arg(100)->Arg(400);

}  // namespace

BENCHMARK_MAIN();
