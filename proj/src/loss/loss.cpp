#include "mixsiam/loss/loss.hpp"

#include "mixsiam/core/error.hpp"

namespace mixsiam::loss {

std::string to_string(Aggregation kind) {
    switch (kind) {
        case Aggregation::Maximum: return "maximum";
        case Aggregation::Average: return "average";
        case Aggregation::None: return "none";
    }
    return "?";
}

Aggregation aggregation_from_string(const std::string& name) {
    if (name == "maximum" || name == "max") return Aggregation::Maximum;
    if (name == "average" || name == "avg") return Aggregation::Average;
    if (name == "none" || name == "w/o") return Aggregation::None;
    throw ConfigError("unknown aggregation '" + name + "' (expected maximum, average or none)");
}

void validate_lambda(double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must be in [0,1], got " + std::to_string(lambda));
}

template <typename T>
BlendWeights<T> blend_weights(double lambda) {
    validate_lambda(lambda);
    return {static_cast<T>(lambda), static_cast<T>(1.0 - lambda)};
}

template <typename T>
Tensor<T> neg_cosine(const Tensor<T>& p, const Tensor<T>& z, T eps) {
    if (p.shape() != z.shape() || p.rank() != 2) {
        throw DimensionError("neg_cosine: shapes " + ad::to_string(p.shape()) + " and " + ad::to_string(z.shape()) +
                             " must be equal [B×D]");
    }
    auto cos = ad::row_dot(ad::l2_normalize(p, eps), ad::l2_normalize(z, eps));
    return ad::scale(ad::mean(ad::clamp_passthrough(cos, T(-1), T(1))), T(-1));
}

template <typename T>
Tensor<T> siam_loss(const Tensor<T>& p1, const Tensor<T>& p2, const Tensor<T>& z1, const Tensor<T>& z2,
                    bool stop_gradient, T eps) {
    const Tensor<T> t2 = stop_gradient ? ad::detach(z2) : z2;
    const Tensor<T> t1 = stop_gradient ? ad::detach(z1) : z1;
    return ad::add(ad::scale(neg_cosine(p1, t2, eps), T(0.5)), ad::scale(neg_cosine(p2, t1, eps), T(0.5)));
}

template <typename T>
Tensor<T> aggregate(const Tensor<T>& z1, const Tensor<T>& z2, const AggregationStrategy& strategy, Rng* rng) {
    switch (strategy.kind) {
        case Aggregation::Maximum: return ad::maximum(z1, z2);
        case Aggregation::Average: return ad::scale(ad::add(z1, z2), T(0.5));
        case Aggregation::None: {
            if (strategy.none_policy == NoneBranchPolicy::AlwaysFirst) return z1;
            if (rng == nullptr) throw PreconditionError("aggregate: seeded_random policy needs a random stream");
            std::vector<std::uint8_t> take_first(z1.dim(0));
            for (auto& t : take_first) t = rng->bernoulli(0.5);
            return ad::select_rows(z1, z2, take_first);
        }
    }
    throw std::invalid_argument("unknown aggregation");
}

template <typename T>
Tensor<T> mix_loss(const Tensor<T>& p_m, const Tensor<T>& z_f_detached, T eps) {
    if (z_f_detached.requires_grad()) {
        throw PreconditionError("mix_loss: target z_f must be detached before use");
    }
    return neg_cosine(p_m, z_f_detached, eps);
}

template <typename T>
Tensor<T> blend(const Tensor<T>& l_siam, const Tensor<T>& l_mix, double lambda) {
    const auto w = blend_weights<T>(lambda);
    return ad::add(ad::scale(l_siam, w.siam), ad::scale(l_mix, w.mix));
}

LossBreakdown total_loss(double l_siam, double l_mix, double lambda) {
    const auto w = blend_weights<double>(lambda);
    return {l_siam, l_mix, w.siam * l_siam + w.mix * l_mix, lambda};
}

#define MIXSIAM_INSTANTIATE_LOSS(T)                                                                       \
    template BlendWeights<T> blend_weights<T>(double);                                                    \
    template Tensor<T> neg_cosine<T>(const Tensor<T>&, const Tensor<T>&, T);                              \
    template Tensor<T> siam_loss<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, \
                                    bool, T);                                                             \
    template Tensor<T> aggregate<T>(const Tensor<T>&, const Tensor<T>&, const AggregationStrategy&, Rng*); \
    template Tensor<T> mix_loss<T>(const Tensor<T>&, const Tensor<T>&, T);                                \
    template Tensor<T> blend<T>(const Tensor<T>&, const Tensor<T>&, double);

MIXSIAM_INSTANTIATE_LOSS(float)
MIXSIAM_INSTANTIATE_LOSS(double)

}  // namespace mixsiam::loss
