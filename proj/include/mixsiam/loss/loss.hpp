#pragma once

#include <string>

#include "mixsiam/autodiff/ops.hpp"
#include "mixsiam/autodiff/tensor.hpp"
#include "mixsiam/core/rng.hpp"

namespace mixsiam::loss {

using ad::Tensor;

enum class Aggregation { Maximum, Average, None };
// Which branch stands in for z_f when there is no aggregation.
enum class NoneBranchPolicy { AlwaysFirst, SeededRandom };

struct AggregationStrategy {
    Aggregation kind = Aggregation::Maximum;
    NoneBranchPolicy none_policy = NoneBranchPolicy::AlwaysFirst;
};

std::string to_string(Aggregation kind);
Aggregation aggregation_from_string(const std::string& name);

struct LossBreakdown {
    double l_siam = 0.0;
    double l_mix = 0.0;
    double total = 0.0;
    double lambda = 0.5;
};

// Weights (λ, 1−λ) at storage precision; the training graph and the
// breakdown identity check use the same pair.
template <typename T>
struct BlendWeights {
    T siam;
    T mix;
};
template <typename T>
BlendWeights<T> blend_weights(double lambda);

// Batch mean of −⟨p/‖p‖, z/‖z‖⟩. Does not detach z. Per-row cosines are
// clamped to [−1, 1] to absorb rounding; gradients pass through.
template <typename T>
Tensor<T> neg_cosine(const Tensor<T>& p, const Tensor<T>& z, T eps = T(1e-12));

// ½·D(p1, sg(z2)) + ½·D(p2, sg(z1)). stop_gradient=false exists only to
// demonstrate collapse.
template <typename T>
Tensor<T> siam_loss(const Tensor<T>& p1, const Tensor<T>& p2, const Tensor<T>& z1, const Tensor<T>& z2,
                    bool stop_gradient = true, T eps = T(1e-12));

// z_f from the two view embeddings. `rng` is required for
// NoneBranchPolicy::SeededRandom (one coin per row).
template <typename T>
Tensor<T> aggregate(const Tensor<T>& z1, const Tensor<T>& z2, const AggregationStrategy& strategy,
                    Rng* rng = nullptr);

// D(p_m, z_f). Throws PreconditionError if z_f still carries gradient.
template <typename T>
Tensor<T> mix_loss(const Tensor<T>& p_m, const Tensor<T>& z_f_detached, T eps = T(1e-12));

// λ·L_siam + (1−λ)·L_mix as a graph node.
template <typename T>
Tensor<T> blend(const Tensor<T>& l_siam, const Tensor<T>& l_mix, double lambda);

// Scalar form; throws ConfigError for λ outside [0, 1].
LossBreakdown total_loss(double l_siam, double l_mix, double lambda);

void validate_lambda(double lambda);

}  // namespace mixsiam::loss
