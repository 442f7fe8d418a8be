#pragma once

#include <cstddef>
#include <span>

namespace mixsiam::kernels {

enum class Accumulate { Overwrite, Add };

// Row-major dense products. For every output element the k-sum is formed in
// ascending k order starting from zero, then (for Accumulate::Add) added to
// the existing value. The serial and OpenMP variants therefore agree bitwise.
//
//   gemm_nn: C[m×n] = A[m×k] · B[k×n]
//   gemm_nt: C[m×n] = A[m×k] · B[n×k]ᵀ
//   gemm_tn: C[m×n] = A[k×m]ᵀ · B[k×n]
template <typename T>
void gemm_nn(std::span<const T> a, std::span<const T> b, std::span<T> c,
             std::size_t m, std::size_t k, std::size_t n, Accumulate acc = Accumulate::Overwrite);
template <typename T>
void gemm_nt(std::span<const T> a, std::span<const T> b, std::span<T> c,
             std::size_t m, std::size_t k, std::size_t n, Accumulate acc = Accumulate::Overwrite);
template <typename T>
void gemm_tn(std::span<const T> a, std::span<const T> b, std::span<T> c,
             std::size_t m, std::size_t k, std::size_t n, Accumulate acc = Accumulate::Overwrite);

// Naive triple loops kept as the reference the parallel kernels are tested
// and benchmarked against.
namespace serial {
template <typename T>
void gemm_nn(std::span<const T> a, std::span<const T> b, std::span<T> c,
             std::size_t m, std::size_t k, std::size_t n, Accumulate acc = Accumulate::Overwrite);
template <typename T>
void gemm_nt(std::span<const T> a, std::span<const T> b, std::span<T> c,
             std::size_t m, std::size_t k, std::size_t n, Accumulate acc = Accumulate::Overwrite);
template <typename T>
void gemm_tn(std::span<const T> a, std::span<const T> b, std::span<T> c,
             std::size_t m, std::size_t k, std::size_t n, Accumulate acc = Accumulate::Overwrite);
}  // namespace serial

}  // namespace mixsiam::kernels
