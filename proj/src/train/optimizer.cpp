#include "mixsiam/train/optimizer.hpp"

#include <cmath>
#include <numbers>

#include "mixsiam/core/error.hpp"

namespace mixsiam::train {

double cosine_lr(std::size_t step, std::size_t total_steps, double lr_base) {
    if (total_steps == 0 || step > total_steps) {
        throw PreconditionError("cosine_lr: step " + std::to_string(step) + " outside [0, " +
                                std::to_string(total_steps) + "]");
    }
    if (step == total_steps) return 0.0;
    const double t = static_cast<double>(step) / static_cast<double>(total_steps);
    return lr_base * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

template <typename T>
void SgdMomentum<T>::step(model::ModelParams<T>& params, double lr) {
    auto& list = params.params();
    if (buffers_.empty()) {
        buffers_.resize(list.size());
        for (std::size_t i = 0; i < list.size(); ++i) buffers_[i].assign(list[i].tensor.numel(), T(0));
    }
    if (buffers_.size() != list.size()) throw DimensionError("SgdMomentum: parameter count changed");

    const T mu = static_cast<T>(momentum_);
    const T wd = static_cast<T>(weight_decay_);
    const T rate = static_cast<T>(lr);
    for (std::size_t i = 0; i < list.size(); ++i) {
        auto& t = list[i].tensor;
        auto& buf = buffers_[i];
        if (buf.size() != t.numel()) throw DimensionError("SgdMomentum: buffer size mismatch for " + list[i].name);
        const bool decay = model::ModelParams<T>::decays(list[i].name);
        const auto g = t.grad();
        auto p = t.mutable_data();
        for (std::size_t j = 0; j < p.size(); ++j) {
            T d = g.empty() ? T(0) : g[j];
            if (decay) d += wd * p[j];
            buf[j] = mu * buf[j] + d;
            p[j] -= rate * buf[j];
        }
    }
}

template class SgdMomentum<float>;
template class SgdMomentum<double>;

}  // namespace mixsiam::train
