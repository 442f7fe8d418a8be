#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mixsiam/cli/experiment.hpp"
#include "mixsiam/eval/eval.hpp"
#include "mixsiam/train/trainer.hpp"

namespace mixsiam::cli {

struct CommonOptions {
    std::optional<std::uint64_t> seed;  // replaces train.seed
    bool strict_deterministic = false;
};

void apply(const CommonOptions& options, ExperimentConfig& cfg);

struct TrainOutcome {
    train::RunResult run;
    eval::EvalReport report;
};

// Trains, evaluates and writes config.json, metrics.csv, checkpoints,
// report.json and per_class.csv into out_dir.
TrainOutcome train_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                              const std::optional<std::filesystem::path>& resume = std::nullopt,
                              bool ignore_config_mismatch = false, bool write_checkpoints = true);

// Evaluates the model stored in a checkpoint on cfg's data.
eval::EvalReport evaluate_checkpoint(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint,
                                     const std::filesystem::path& out_dir);

struct CellRun {
    std::string cell;
    std::size_t repeat = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double knn_top1 = 0.0;
    double linear_top1 = 0.0;
};

struct CellSummary {
    std::string cell;
    std::size_t runs = 0;
    std::size_t failed = 0;
    double knn_mean = 0.0;
    double knn_std = 0.0;
    double linear_mean = 0.0;
    double linear_std = 0.0;
    std::optional<double> reference;  // published full-scale value, metadata only
};

struct GridResult {
    std::vector<CellRun> runs;
    std::vector<CellSummary> cells;
    std::string config_hash;
};

// Writes ablation_runs.csv, ablation.csv and ablation.txt.
GridResult run_ablation(const AblationGrid& grid, const std::filesystem::path& out_dir);

struct SweepResult {
    std::vector<double> lambdas;
    GridResult grid;  // one cell per λ, in lambda order
};

// Writes sweep_runs.csv, sweep.csv and sweep.svg.
SweepResult run_sweep(const SweepSpec& spec, const std::filesystem::path& out_dir);

std::string sweep_svg(const std::vector<double>& lambdas, const std::vector<CellSummary>& cells,
                      const std::string& config_hash);

// Contact sheets (original | view 1 | view 2 | mix), one P6 file per image.
std::vector<std::filesystem::path> dump_views(const ExperimentConfig& cfg, std::size_t n_images,
                                              const std::filesystem::path& out_dir);

// Full command-line entry point; returns the process exit code
// (0 success, 1 runtime failure, 2 usage or config error).
int run_cli(int argc, const char* const* argv);

}  // namespace mixsiam::cli
