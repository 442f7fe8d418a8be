#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mixsiam/autodiff/ops.hpp"
#include "mixsiam/autodiff/tensor.hpp"

namespace mixsiam::model {

using ad::Mode;
using ad::Tensor;

struct StageSpec {
    std::size_t channels = 16;
    std::size_t stride = 2;
};

// Backbone: 3×3 conv → BN → ReLU per stage, then global average pooling.
// With no stages the flattened input feeds the projector directly.
// Projector: three linear layers, BN on each, ReLU after the first two.
struct EncoderSpec {
    std::size_t input_channels = 3;
    std::size_t input_size = 32;
    std::vector<StageSpec> stages{{32, 2}, {64, 2}, {128, 2}, {256, 2}};
    bool residual = false;  // identity skip on stages that keep shape
    std::array<std::size_t, 3> projector{256, 256, 256};

    std::size_t embed_dim() const { return projector[2]; }
    std::size_t backbone_dim() const;
    void validate() const;
};

// Predictor: linear → BN → ReLU → linear (with bias, no BN, no ReLU).
struct PredictorSpec {
    std::size_t hidden_dim = 64;
    std::size_t embed_dim = 256;

    void validate() const;
};

struct NormSettings {
    double l2_eps = 1e-12;
    double bn_eps = 1e-5;
    double bn_momentum = 0.1;
};

template <typename T>
struct NamedTensor {
    std::string name;
    Tensor<T> tensor;
};

// One copy of every weight. Branches reuse the same tensors, so gradients
// from all branches accumulate in a single buffer per parameter.
template <typename T>
class ModelParams {
public:
    ModelParams() = default;
    ModelParams(EncoderSpec encoder, PredictorSpec predictor, NormSettings norm = {});

    const EncoderSpec& encoder_spec() const { return encoder_; }
    const PredictorSpec& predictor_spec() const { return predictor_; }
    const NormSettings& norm() const { return norm_; }
    ad::BatchNormOptions bn_options() const { return {norm_.bn_eps, norm_.bn_momentum}; }

    std::vector<NamedTensor<T>>& params() { return params_; }
    const std::vector<NamedTensor<T>>& params() const { return params_; }
    // Batch-norm running statistics.
    std::vector<NamedTensor<T>>& buffers() { return buffers_; }
    const std::vector<NamedTensor<T>>& buffers() const { return buffers_; }

    Tensor<T>& param(const std::string& name);
    const Tensor<T>& param(const std::string& name) const;
    Tensor<T>& buffer(const std::string& name);

    // Conv and linear weights decay; biases and batch-norm γ/β do not.
    static bool decays(const std::string& name);

    void zero_grad();
    std::size_t parameter_count() const;
    // FNV-1a over every parameter and buffer value.
    std::uint64_t checksum() const;
    // Deep copy (fresh storage).
    ModelParams clone() const;

    // Used by init and checkpoint loading to lay out tensors.
    void add_param(std::string name, Tensor<T> t);
    void add_buffer(std::string name, Tensor<T> t);

private:
    EncoderSpec encoder_;
    PredictorSpec predictor_;
    NormSettings norm_;
    std::vector<NamedTensor<T>> params_;
    std::vector<NamedTensor<T>> buffers_;
};

// Fan-in-scaled uniform weights U(-1/√fan_in, 1/√fan_in), zero biases and
// β, unit γ, running mean 0 and variance 1. Deterministic from seed.
template <typename T>
ModelParams<T> init(const EncoderSpec& encoder, const PredictorSpec& predictor, std::uint64_t seed,
                    const NormSettings& norm = {});

// f: backbone, pooling, projector. x is [B×C×H×W]; z is [B×embed_dim], not
// normalized.
template <typename T>
Tensor<T> encode(ModelParams<T>& params, const Tensor<T>& x, Mode mode);

// Backbone + pooling only, [B×backbone_dim].
template <typename T>
Tensor<T> backbone(ModelParams<T>& params, const Tensor<T>& x, Mode mode);

// h: [B×embed_dim] → [B×embed_dim].
template <typename T>
Tensor<T> predict(ModelParams<T>& params, const Tensor<T>& z, Mode mode);

}  // namespace mixsiam::model
