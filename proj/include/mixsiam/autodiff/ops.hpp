#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mixsiam/autodiff/tensor.hpp"

namespace mixsiam::ad {

enum class Mode {
    Train,
    TrainFrozenStats,  // batch statistics, running statistics left untouched
    Eval,
};

enum class Elementwise { Add, Sub, Mul, Max };

// Pointwise binary op on equal shapes. For Max, each position's gradient
// goes entirely to the larger argument; exact ties go to `a`.
template <typename T>
Tensor<T> elementwise(Elementwise op, const Tensor<T>& a, const Tensor<T>& b);

template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> maximum(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> scale(const Tensor<T>& a, T factor);
template <typename T> Tensor<T> relu(const Tensor<T>& a);

// a[B×D] + bias[D] broadcast over rows.
template <typename T> Tensor<T> add_bias(const Tensor<T>& a, const Tensor<T>& bias);

template <typename T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T> Tensor<T> sum(const Tensor<T>& a);
template <typename T> Tensor<T> mean(const Tensor<T>& a);

// Per-row dot product of two B×D tensors, shape [B].
template <typename T> Tensor<T> row_dot(const Tensor<T>& a, const Tensor<T>& b);

// Each row divided by max(||row||₂, eps).
template <typename T> Tensor<T> l2_normalize(const Tensor<T>& v, T eps = T(1e-12));

// Clamps values into [lo, hi] in the forward pass and passes the gradient
// through unchanged. Used to absorb rounding overshoot of bounded quantities.
template <typename T> Tensor<T> clamp_passthrough(const Tensor<T>& a, T lo, T hi);

// Same values, cut from the graph: no gradient reaches `v` through the result.
template <typename T> Tensor<T> detach(const Tensor<T>& v);

// Row i of the result is a's row when take_a[i] != 0, else b's row.
template <typename T>
Tensor<T> select_rows(const Tensor<T>& a, const Tensor<T>& b, std::span<const std::uint8_t> take_a);

struct BatchNormOptions {
    double eps = 1e-5;
    double momentum = 0.1;
};

// Per-channel normalization of [B×D] or [B×C×H×W]. Train mode normalizes with
// batch statistics (biased variance) and folds them into the running stats
// (unbiased variance); eval mode normalizes with the running stats.
template <typename T>
Tensor<T> batchnorm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                    Tensor<T>& running_mean, Tensor<T>& running_var, Mode mode,
                    const BatchNormOptions& options = {});

// Cross-correlation of input[B×C×H×W] with kernels[K×C×kh×kw].
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernels, std::size_t stride, std::size_t padding);

// [B×C×H×W] → [B×C].
template <typename T> Tensor<T> global_avg_pool(const Tensor<T>& input);

// [B×...] → [B×rest].
template <typename T> Tensor<T> flatten(const Tensor<T>& input);

// Mean softmax cross-entropy of logits[B×K] against integer labels.
template <typename T>
Tensor<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const std::size_t> labels);

}  // namespace mixsiam::ad
