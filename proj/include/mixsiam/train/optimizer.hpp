#pragma once

#include <cstddef>
#include <vector>

#include "mixsiam/model/model.hpp"

namespace mixsiam::train {

// lr_base · ½ · (1 + cos(π·step/total_steps)). Requires step ≤ total_steps.
double cosine_lr(std::size_t step, std::size_t total_steps, double lr_base);

// Classic SGD with momentum; weight decay is added to the gradient of
// decaying parameters only:
//   d = g + wd·p;  buf = μ·buf + d;  p -= lr·buf
template <typename T>
class SgdMomentum {
public:
    SgdMomentum() = default;
    SgdMomentum(double momentum, double weight_decay) : momentum_(momentum), weight_decay_(weight_decay) {}

    // Parameters that received no gradient are treated as having zero gradient.
    void step(model::ModelParams<T>& params, double lr);

    // One buffer per parameter, in params() order; empty before the first step.
    std::vector<std::vector<T>>& buffers() { return buffers_; }
    const std::vector<std::vector<T>>& buffers() const { return buffers_; }

    double momentum() const { return momentum_; }
    double weight_decay() const { return weight_decay_; }

private:
    double momentum_ = 0.9;
    double weight_decay_ = 1e-4;
    std::vector<std::vector<T>> buffers_;
};

extern template class SgdMomentum<float>;
extern template class SgdMomentum<double>;

}  // namespace mixsiam::train
