// Serial reference vs OpenMP kernels at the shapes the small preset hits.
// Thread count follows OMP_NUM_THREADS.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mixsiam/kernels/gemm.hpp"
#include "mixsiam/kernels/im2col.hpp"

namespace k = mixsiam::kernels;

namespace {

std::vector<float> noise(std::size_t n) {
    std::mt19937 gen(17);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    std::vector<float> v(n);
    for (auto& x : v) x = u(gen);
    return v;
}

template <bool Parallel>
void BM_gemm_nn(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const auto kk = static_cast<std::size_t>(state.range(1));
    const auto n = static_cast<std::size_t>(state.range(2));
    const auto a = noise(m * kk), b = noise(kk * n);
    std::vector<float> c(m * n);
    for (auto _ : state) {
        if constexpr (Parallel)
            k::gemm_nn<float>(a, b, c, m, kk, n);
        else
            k::serial::gemm_nn<float>(a, b, c, m, kk, n);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * m * kk * n));
}

template <bool Parallel>
void BM_im2col(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(1));
    const k::ConvGeometry g{16, static_cast<std::size_t>(state.range(0)), side, side, 3, 3, 1, 1};
    const auto x = noise(g.batch * g.channels * g.height * g.width);
    std::vector<float> cols(g.patch_size() * g.columns());
    for (auto _ : state) {
        if constexpr (Parallel)
            k::im2col<float>(x, g, cols);
        else
            k::serial::im2col<float>(x, g, cols);
        benchmark::DoNotOptimize(cols.data());
    }
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(cols.size() * sizeof(float)));
}

// conv as (out channels) x (patch) x (batch pixels), then a projector layer
void gemm_shapes(benchmark::internal::Benchmark* b) {
    b->Args({16, 27, 16 * 32 * 32})->Args({32, 144, 16 * 16 * 16})->Args({16, 64, 64});
}

void im2col_shapes(benchmark::internal::Benchmark* b) { b->Args({3, 32})->Args({16, 16}); }

}  // namespace

BENCHMARK(BM_gemm_nn<false>)->Name("gemm_nn/serial")->Apply(gemm_shapes);
BENCHMARK(BM_gemm_nn<true>)->Name("gemm_nn/openmp")->Apply(gemm_shapes);
BENCHMARK(BM_im2col<false>)->Name("im2col/serial")->Apply(im2col_shapes);
BENCHMARK(BM_im2col<true>)->Name("im2col/openmp")->Apply(im2col_shapes);
BENCHMARK_MAIN();
