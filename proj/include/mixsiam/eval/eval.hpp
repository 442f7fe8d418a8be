#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixsiam/data/dataset.hpp"
#include "mixsiam/model/model.hpp"

namespace mixsiam::eval {

// Row-major [rows × cols] feature matrix with one label per row.
struct FeatureSet {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    std::vector<std::size_t> labels;

    const double* row(std::size_t i) const { return values.data() + i * cols; }
};

// Encoder output z for every image, eval-mode batch norm, no augmentation
// (images are only resized to the encoder input size when they differ).
template <typename T>
FeatureSet extract_features(model::ModelParams<T>& params, const data::Dataset& dataset, std::size_t batch_size = 128);

// Raw pixels as features, the baseline learned features are compared to.
FeatureSet pixel_features(const data::Dataset& dataset);

struct ProbeResult {
    double top1 = 0.0;
    std::map<std::size_t, double> per_class;  // classes present in the test set
    std::vector<std::size_t> predictions;
};

// Cosine-similarity kNN vote. Every training point whose similarity equals
// the k-th largest joins the vote; vote ties go to the smallest class id.
ProbeResult knn_probe(const FeatureSet& train, const FeatureSet& test, std::size_t k = 20);

struct LinearProbeConfig {
    std::size_t epochs = 100;
    double lr = 0.02;
    double momentum = 0.9;
    double weight_decay = 0.0;
    std::size_t batch_size = 256;
    std::uint64_t seed = 0;
    // Per-dimension standardization with training-set statistics.
    bool standardize = true;

    void validate() const;
};

nlohmann::json to_json(const LinearProbeConfig& cfg);
LinearProbeConfig linear_probe_config_from_json(const nlohmann::json& j, const std::string& path = "probe");

// Linear layer + softmax cross-entropy trained with SGD and a cosine schedule.
ProbeResult linear_probe(const FeatureSet& train, const FeatureSet& test, const LinearProbeConfig& cfg);

// Same measure as the training diagnostic, on a feature matrix.
double embedding_std(const FeatureSet& features);

struct EvalConfig {
    std::size_t knn_k = 20;
    LinearProbeConfig linear;
    bool run_linear = true;
};

struct EvalReport {
    double knn_top1 = 0.0;
    double linear_top1 = 0.0;
    double embedding_std = 0.0;
    std::map<std::size_t, double> per_class_accuracy;  // from the kNN probe
    std::size_t knn_k = 20;
    std::string config_hash;
    nlohmann::json config;
};

template <typename T>
EvalReport evaluate(model::ModelParams<T>& params, const data::Dataset& train, const data::Dataset& test,
                    const EvalConfig& cfg);

nlohmann::json to_json(const EvalReport& report);
void write_report(const EvalReport& report, const std::filesystem::path& json_path);
void write_per_class_csv(const EvalReport& report, const std::filesystem::path& csv_path);

}  // namespace mixsiam::eval
