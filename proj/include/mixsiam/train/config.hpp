#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "mixsiam/augment/augment.hpp"
#include "mixsiam/loss/loss.hpp"
#include "mixsiam/model/model.hpp"

namespace mixsiam::train {

enum class Objective {
    MixSiam,  // λ·L_siam + (1−λ)·L_mix over three branches
    SimSiam,  // L_siam only; the mixed branch is never built
};

struct TrainConfig {
    model::EncoderSpec encoder;
    model::PredictorSpec predictor;
    model::NormSettings norm;
    augment::AugmentConfig augment;

    double lambda = 0.5;
    augment::LambdaMixPolicy lambda_mix;
    loss::AggregationStrategy aggregation;
    // false: x_m is replaced by one of the two views, picked per image.
    bool mixture = true;
    // false removes every detach; used only to demonstrate collapse.
    bool stop_gradient = true;
    Objective objective = Objective::MixSiam;

    double lr_base = 0.05;
    // When set, lr = lr_base · batch_size / lr_reference_batch.
    bool lr_batch_scaling = false;
    std::size_t lr_reference_batch = 128;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    std::size_t batch_size = 128;
    std::size_t epochs = 20;
    std::uint64_t seed = 0;
    // Shuffling seed; defaults to `seed`.
    std::optional<std::uint64_t> data_seed;
    int precision = 32;
    bool strict_deterministic = false;

    void validate() const;
    double effective_lr() const;
    std::uint64_t shuffle_seed() const { return data_seed.value_or(seed); }
    augment::LambdaMixPolicy effective_lambda_mix() const;

    // Library default: 4-stage backbone, 256-d embedding, 64-d predictor.
    static TrainConfig desk_default();
    // Laptop-CPU preset for the synthetic dataset: narrower network
    // (32-d embedding, 8-d predictor, same 4:1 ratio), batch 16.
    static TrainConfig small();
};

nlohmann::json to_json(const TrainConfig& cfg);
// Missing fields keep their defaults; unknown fields and wrong types raise
// ConfigError naming the field path (e.g. "train.augment.hflip_prob").
TrainConfig train_config_from_json(const nlohmann::json& j, const std::string& path = "train");

// FNV-1a of the canonical JSON dump, without strict_deterministic.
std::uint64_t config_hash(const TrainConfig& cfg);
std::string hex(std::uint64_t value);

}  // namespace mixsiam::train
