#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "mixsiam/data/dataset.hpp"
#include "mixsiam/loss/loss.hpp"
#include "mixsiam/model/model.hpp"
#include "mixsiam/train/checkpoint.hpp"
#include "mixsiam/train/config.hpp"
#include "mixsiam/train/optimizer.hpp"

namespace mixsiam::train {

struct StepMetrics {
    std::size_t step = 0;
    std::size_t epoch = 0;
    double lr = 0.0;
    loss::LossBreakdown loss;
    double grad_norm = 0.0;      // global L2 norm of parameter gradients, before weight decay
    double embedding_std = 0.0;  // mean per-dimension std of L2-normalized z1 over the batch
};

template <typename T>
struct TrainState {
    model::ModelParams<T> params;
    SgdMomentum<T> optimizer;
    std::size_t epoch = 0;
    std::size_t step = 0;
    std::vector<double> loss_tail;
};

template <typename T>
TrainState<T> initial_state(const TrainConfig& cfg);

// Mean over dimensions of the population std over rows of L2-normalized z.
template <typename T>
double embedding_std(const ad::Tensor<T>& z, double eps = 1e-12);

// One optimizer update on the records listed in `batch`. Views are keyed by
// (cfg.seed, epoch, source index); the aggregation coin flips (if any) by
// (cfg.seed, epoch, step). Throws NumericError if the loss or a gradient is
// not finite, naming the first offending parameter.
template <typename T>
StepMetrics train_step(TrainState<T>& state, const data::Dataset& dataset, std::span<const std::size_t> batch,
                       const TrainConfig& cfg, double lr, std::size_t epoch, std::size_t step);

inline constexpr const char* kMetricsHeader = "step,epoch,lr,l_siam,l_mix,total,grad_norm,embedding_std";
std::string format_metrics_row(const StepMetrics& m);

template <typename T>
Checkpoint capture(const TrainState<T>& state, const TrainConfig& cfg);
// Rebuilds parameters, running statistics and momentum from a checkpoint.
template <typename T>
TrainState<T> restore(const Checkpoint& ckpt);

struct RunOptions {
    std::filesystem::path out_dir;
    std::optional<std::filesystem::path> resume;
    // Resume even if the checkpoint was written under a different config.
    bool ignore_config_mismatch = false;
    // Stop after this many completed epochs (the schedule still spans cfg.epochs).
    std::optional<std::size_t> stop_after_epochs;
    bool write_checkpoints = true;
    std::function<void(const StepMetrics&)> on_step;
};

using AnyModel = std::variant<model::ModelParams<float>, model::ModelParams<double>>;

struct RunResult {
    AnyModel model;
    Checkpoint final_checkpoint;
    std::vector<StepMetrics> metrics;  // steps run by this call
    std::filesystem::path metrics_path;
    std::vector<std::filesystem::path> checkpoints;
};

// Full training loop: cfg.epochs × batches steps with a cosine schedule,
// a checkpoint after every epoch and one metrics row per step.
RunResult run(const TrainConfig& cfg, const data::Dataset& dataset, const RunOptions& options);

}  // namespace mixsiam::train
