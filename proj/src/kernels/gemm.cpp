#include "mixsiam/kernels/gemm.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

#include "mixsiam/kernels/parallel.hpp"

namespace mixsiam::kernels {

namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelThreshold = 1 << 15;

bool go_parallel(std::size_t m, std::size_t k, std::size_t n) {
    return !strict_deterministic() && m > 1 && m * k * n >= kParallelThreshold;
}

template <typename T>
void store(T* out, const T* row, std::size_t n, Accumulate acc) {
    if (acc == Accumulate::Add) {
        for (std::size_t j = 0; j < n; ++j) out[j] += row[j];
    } else {
        for (std::size_t j = 0; j < n; ++j) out[j] = row[j];
    }
}

}  // namespace

template <typename T>
void gemm_nn(std::span<const T> a, std::span<const T> b, std::span<T> c,
             std::size_t m, std::size_t k, std::size_t n, Accumulate acc) {
    const T* A = a.data();
    const T* B = b.data();
    T* C = c.data();
    const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel if (go_parallel(m, k, n))
    {
        std::vector<T> row(n);
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < rows; ++i) {
            std::fill(row.begin(), row.end(), T(0));
            const T* a_row = A + i * k;
            for (std::size_t p = 0; p < k; ++p) {
                const T aip = a_row[p];
                const T* b_row = B + p * n;
                for (std::size_t j = 0; j < n; ++j) row[j] += aip * b_row[j];
            }
            store(C + i * n, row.data(), n, acc);
        }
    }
}

template <typename T>
void gemm_nt(std::span<const T> a, std::span<const T> b, std::span<T> c,
             std::size_t m, std::size_t k, std::size_t n, Accumulate acc) {
    // Transposing B turns the dot products into the vectorizable nn loop
    // without changing any k-order.
    std::vector<T> bt(k * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = b[j * k + p];
    gemm_nn<T>(a, bt, c, m, k, n, acc);
}

template <typename T>
void gemm_tn(std::span<const T> a, std::span<const T> b, std::span<T> c,
             std::size_t m, std::size_t k, std::size_t n, Accumulate acc) {
    const T* A = a.data();
    const T* B = b.data();
    T* C = c.data();
    const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel if (go_parallel(m, k, n))
    {
        std::vector<T> row(n);
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < rows; ++i) {
            std::fill(row.begin(), row.end(), T(0));
            for (std::size_t p = 0; p < k; ++p) {
                const T api = A[p * m + i];
                const T* b_row = B + p * n;
                for (std::size_t j = 0; j < n; ++j) row[j] += api * b_row[j];
            }
            store(C + i * n, row.data(), n, acc);
        }
    }
}

namespace serial {

template <typename T>
void gemm_nn(std::span<const T> a, std::span<const T> b, std::span<T> c,
             std::size_t m, std::size_t k, std::size_t n, Accumulate acc) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            T s = 0;
            for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
            c[i * n + j] = acc == Accumulate::Add ? c[i * n + j] + s : s;
        }
    }
}

template <typename T>
void gemm_nt(std::span<const T> a, std::span<const T> b, std::span<T> c,
             std::size_t m, std::size_t k, std::size_t n, Accumulate acc) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            T s = 0;
            for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[j * k + p];
            c[i * n + j] = acc == Accumulate::Add ? c[i * n + j] + s : s;
        }
    }
}

template <typename T>
void gemm_tn(std::span<const T> a, std::span<const T> b, std::span<T> c,
             std::size_t m, std::size_t k, std::size_t n, Accumulate acc) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            T s = 0;
            for (std::size_t p = 0; p < k; ++p) s += a[p * m + i] * b[p * n + j];
            c[i * n + j] = acc == Accumulate::Add ? c[i * n + j] + s : s;
        }
    }
}

}  // namespace serial

#define MIXSIAM_INSTANTIATE_GEMM(NS, T)                                                              \
    template void NS::gemm_nn<T>(std::span<const T>, std::span<const T>, std::span<T>, std::size_t, \
                                 std::size_t, std::size_t, Accumulate);                             \
    template void NS::gemm_nt<T>(std::span<const T>, std::span<const T>, std::span<T>, std::size_t, \
                                 std::size_t, std::size_t, Accumulate);                             \
    template void NS::gemm_tn<T>(std::span<const T>, std::span<const T>, std::span<T>, std::size_t, \
                                 std::size_t, std::size_t, Accumulate);

}  // namespace mixsiam::kernels

MIXSIAM_INSTANTIATE_GEMM(mixsiam::kernels, float)
MIXSIAM_INSTANTIATE_GEMM(mixsiam::kernels, double)
MIXSIAM_INSTANTIATE_GEMM(mixsiam::kernels::serial, float)
MIXSIAM_INSTANTIATE_GEMM(mixsiam::kernels::serial, double)
