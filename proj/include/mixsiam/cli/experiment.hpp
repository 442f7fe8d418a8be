#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixsiam/data/dataset.hpp"
#include "mixsiam/data/synthetic.hpp"
#include "mixsiam/eval/eval.hpp"
#include "mixsiam/train/config.hpp"

namespace mixsiam::cli {

struct DataConfig {
    enum class Kind { Synthetic, Cifar10 };
    Kind kind = Kind::Synthetic;
    data::SyntheticConfig synthetic;  // training split
    std::size_t test_per_class = 50;
    std::uint64_t test_seed = 8;
    std::filesystem::path cifar_dir;
    // 0 keeps every record; otherwise the first N of each split.
    std::size_t train_limit = 0;
    std::size_t test_limit = 0;

    void validate() const;
};

struct Datasets {
    data::Dataset train;
    data::Dataset test;
};

Datasets load_datasets(const DataConfig& cfg);

// One JSON document with "train", "data" and "eval" sections.
struct ExperimentConfig {
    train::TrainConfig train = train::TrainConfig::small();
    DataConfig data;
    eval::EvalConfig eval;

    void validate() const;
};

nlohmann::json to_json(const DataConfig& cfg);
nlohmann::json to_json(const eval::EvalConfig& cfg);
nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_from_json(const nlohmann::json& j, const std::string& path = "config");

// Missing or unparsable files raise ConfigError naming the path.
nlohmann::json read_json_file(const std::filesystem::path& path);
ExperimentConfig load_experiment(const std::filesystem::path& path);

// Hash of the whole experiment (training, data and probe settings).
std::uint64_t experiment_hash(const ExperimentConfig& cfg);

struct AblationGrid {
    ExperimentConfig base;
    std::vector<loss::Aggregation> aggregations{loss::Aggregation::Maximum, loss::Aggregation::Average,
                                                loss::Aggregation::None};
    std::vector<bool> mixtures{true, false};
    std::size_t repeats = 1;
    // Cells with the same repeat index then see the same shuffling order.
    bool share_data_order = false;

    void validate() const;
};

AblationGrid ablation_grid_from_json(const nlohmann::json& j, const std::string& path = "grid");
nlohmann::json to_json(const AblationGrid& grid);

struct SweepSpec {
    ExperimentConfig base;
    std::vector<double> lambda_values{0.0, 0.25, 0.5, 0.75, 1.0};
    std::size_t repeats = 1;
    bool share_data_order = false;

    // Values must lie in [0, 1], be unique and sorted ascending.
    void validate() const;
};

SweepSpec sweep_spec_from_json(const nlohmann::json& j, const std::string& path = "sweep");
nlohmann::json to_json(const SweepSpec& spec);

// Seed for one (cell, repeat) pair: hash(base_seed, cell_id, repeat).
std::uint64_t cell_seed(std::uint64_t base_seed, std::uint64_t cell_id, std::size_t repeat);
std::uint64_t cell_id(const std::string& cell_name);

}  // namespace mixsiam::cli
