#include <gtest/gtest.h>

#include <omp.h>

#include <vector>

#include "mixsiam/core/rng.hpp"
#include "mixsiam/kernels/gemm.hpp"
#include "mixsiam/kernels/im2col.hpp"
#include "mixsiam/kernels/parallel.hpp"

using namespace mixsiam;
using namespace mixsiam::kernels;

namespace {

template <typename T>
std::vector<T> random_values(std::size_t n, std::uint64_t seed) {
    Rng rng{seed, 0x4b45524eULL};
    std::vector<T> v(n);
    for (auto& x : v) x = static_cast<T>(rng.uniform(-2.0, 2.0));
    return v;
}

// Force a real team even on a one-core machine.
struct Threads {
    int saved = omp_get_max_threads();
    explicit Threads(int n) { omp_set_num_threads(n); }
    ~Threads() { omp_set_num_threads(saved); }
};

struct GemmShape {
    std::size_t m, k, n;
};

template <typename T>
void check_gemm_bitwise(const GemmShape& s, std::uint64_t seed) {
    Threads threads(4);
    const auto a = random_values<T>(s.m * s.k, seed);
    const auto b = random_values<T>(s.k * s.n, seed + 1);
    const auto c0 = random_values<T>(s.m * s.n, seed + 2);
    for (auto acc : {Accumulate::Overwrite, Accumulate::Add}) {
        auto p = c0, q = c0;
        gemm_nn<T>(a, b, p, s.m, s.k, s.n, acc);
        serial::gemm_nn<T>(a, b, q, s.m, s.k, s.n, acc);
        EXPECT_EQ(p, q) << "nn";
        p = c0, q = c0;
        gemm_nt<T>(a, b, p, s.m, s.k, s.n, acc);  // b read as n×k
        serial::gemm_nt<T>(a, b, q, s.m, s.k, s.n, acc);
        EXPECT_EQ(p, q) << "nt";
        p = c0, q = c0;
        gemm_tn<T>(a, b, p, s.m, s.k, s.n, acc);  // a read as k×m
        serial::gemm_tn<T>(a, b, q, s.m, s.k, s.n, acc);
        EXPECT_EQ(p, q) << "tn";
    }
}

}  // namespace

TEST(Gemm, ParallelMatchesSerialBitwise) {
    const GemmShape shapes[] = {{1, 1, 1}, {3, 5, 7}, {64, 33, 17}, {128, 256, 64}, {7, 300, 2}};
    std::uint64_t seed = 1;
    for (const auto& s : shapes) {
        check_gemm_bitwise<float>(s, seed++);
        check_gemm_bitwise<double>(s, seed++);
    }
}

TEST(Gemm, SerialMatchesTextbookSum) {
    const std::size_t m = 4, k = 6, n = 5;
    const auto a = random_values<double>(m * k, 9);
    const auto b = random_values<double>(k * n, 10);
    std::vector<double> c(m * n);
    serial::gemm_nn<double>(a, b, c, m, k, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < k; ++t) s += a[i * k + t] * b[t * n + j];
            EXPECT_EQ(c[i * n + j], s);
        }
}

TEST(Gemm, TransposedVariantsAgreeWithExplicitTranspose) {
    const std::size_t m = 5, k = 7, n = 3;
    const auto a = random_values<double>(m * k, 11);
    const auto bt = random_values<double>(n * k, 12);
    std::vector<double> b(k * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) b[j * n + i] = bt[i * k + j];
    std::vector<double> c1(m * n), c2(m * n);
    gemm_nt<double>(a, bt, c1, m, k, n);
    gemm_nn<double>(a, b, c2, m, k, n);
    EXPECT_EQ(c1, c2);

    std::vector<double> at(k * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j) at[j * m + i] = a[i * k + j];
    std::vector<double> c3(m * n);
    gemm_tn<double>(at, b, c3, m, k, n);
    EXPECT_EQ(c3, c2);
}

TEST(Gemm, StrictModeGivesSameBits) {
    Threads threads(4);
    const std::size_t m = 96, k = 80, n = 72;
    const auto a = random_values<float>(m * k, 21);
    const auto b = random_values<float>(k * n, 22);
    std::vector<float> loose(m * n), strict(m * n);
    gemm_nn<float>(a, b, loose, m, k, n);
    {
        StrictModeGuard guard(true);
        EXPECT_TRUE(strict_deterministic());
        gemm_nn<float>(a, b, strict, m, k, n);
    }
    EXPECT_FALSE(strict_deterministic());
    EXPECT_EQ(loose, strict);
}

TEST(Im2col, ParallelMatchesSerialBitwise) {
    Threads threads(4);
    const ConvGeometry shapes[] = {
        {1, 1, 5, 5, 3, 3, 1, 1}, {4, 3, 32, 32, 3, 3, 2, 1}, {2, 16, 9, 7, 3, 3, 1, 0}, {3, 2, 6, 6, 1, 1, 2, 0}};
    std::uint64_t seed = 40;
    for (const auto& g : shapes) {
        ASSERT_TRUE(g.valid());
        const auto x = random_values<float>(g.batch * g.channels * g.height * g.width, seed++);
        std::vector<float> p(g.patch_size() * g.columns()), q(p.size());
        im2col<float>(x, g, p);
        serial::im2col<float>(x, g, q);
        EXPECT_EQ(p, q);

        const auto cols = random_values<float>(p.size(), seed++);
        std::vector<float> gp(x.size(), 0.5f), gq(x.size(), 0.5f);
        col2im_add<float>(cols, g, gp);
        serial::col2im_add<float>(cols, g, gq);
        EXPECT_EQ(gp, gq);
    }
}

// <im2col(x), y> == <x, col2im(y)>
TEST(Im2col, Col2imIsTheAdjoint) {
    const ConvGeometry g{2, 3, 7, 6, 3, 3, 2, 1};
    const auto x = random_values<double>(g.batch * g.channels * g.height * g.width, 50);
    const auto y = random_values<double>(g.patch_size() * g.columns(), 51);
    std::vector<double> cols(y.size()), back(x.size(), 0.0);
    im2col<double>(x, g, cols);
    col2im_add<double>(y, g, back);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) lhs += cols[i] * y[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * back[i];
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(lhs)));
}

TEST(Im2col, PaddingReadsZero) {
    const ConvGeometry g{1, 1, 2, 2, 3, 3, 1, 1};
    const std::vector<float> x{1, 2, 3, 4};
    std::vector<float> cols(g.patch_size() * g.columns());
    im2col<float>(x, g, cols);
    // Top-left tap of the first output pixel lies in the padding.
    EXPECT_EQ(cols[0], 0.0f);
    // Center tap reproduces the input.
    for (std::size_t p = 0; p < 4; ++p) EXPECT_EQ(cols[4 * g.columns() + p], x[p]);
}

TEST(Im2col, GeometryValidity) {
    EXPECT_FALSE((ConvGeometry{1, 1, 2, 2, 5, 5, 1, 0}.valid()));
    EXPECT_TRUE((ConvGeometry{1, 1, 2, 2, 5, 5, 1, 2}.valid()));
    EXPECT_EQ((ConvGeometry{1, 1, 32, 32, 3, 3, 2, 1}.out_height()), 16u);
}
