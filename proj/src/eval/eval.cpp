#include "mixsiam/eval/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>

#include "mixsiam/augment/augment.hpp"
#include "mixsiam/autodiff/ops.hpp"
#include "mixsiam/core/error.hpp"
#include "mixsiam/core/json_fields.hpp"
#include "mixsiam/core/rng.hpp"
#include "mixsiam/kernels/parallel.hpp"

namespace mixsiam::eval {

using ad::Tensor;
using nlohmann::json;

namespace {

constexpr std::uint64_t kProbeShuffleTag = 0x50524f42ULL;

void require_nonempty(const FeatureSet& f, const char* what) {
    if (f.rows == 0 || f.cols == 0) throw DimensionError(std::string(what) + ": empty feature set");
    if (f.values.size() != f.rows * f.cols || f.labels.size() != f.rows) {
        throw DimensionError(std::string(what) + ": feature matrix and labels disagree in size");
    }
}

std::size_t class_count(const FeatureSet& a, const FeatureSet& b) {
    std::size_t k = 0;
    for (auto l : a.labels) k = std::max(k, l + 1);
    for (auto l : b.labels) k = std::max(k, l + 1);
    return k;
}

ProbeResult score(const FeatureSet& test, std::vector<std::size_t> predictions) {
    ProbeResult r;
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> tally;  // class → (correct, total)
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.rows; ++i) {
        auto& t = tally[test.labels[i]];
        ++t.second;
        if (predictions[i] == test.labels[i]) {
            ++t.first;
            ++correct;
        }
    }
    r.top1 = static_cast<double>(correct) / static_cast<double>(test.rows);
    for (const auto& [c, t] : tally) r.per_class[c] = static_cast<double>(t.first) / static_cast<double>(t.second);
    r.predictions = std::move(predictions);
    return r;
}

std::vector<double> unit_rows(const FeatureSet& f) {
    std::vector<double> out(f.values.size(), 0.0);
    for (std::size_t i = 0; i < f.rows; ++i) {
        const double* r = f.row(i);
        double sq = 0.0;
        for (std::size_t j = 0; j < f.cols; ++j) sq += r[j] * r[j];
        if (sq == 0.0) continue;
        const double norm = std::sqrt(sq);
        for (std::size_t j = 0; j < f.cols; ++j) out[i * f.cols + j] = r[j] / norm;
    }
    return out;
}

}  // namespace

template <typename T>
FeatureSet extract_features(model::ModelParams<T>& params, const data::Dataset& dataset, std::size_t batch_size) {
    if (dataset.size() == 0) throw DimensionError("extract_features: empty dataset");
    if (batch_size == 0) throw ConfigError("extract_features: batch_size must be positive");
    const auto& spec = params.encoder_spec();
    const std::size_t side = spec.input_size;

    FeatureSet out;
    out.rows = dataset.size();
    out.cols = spec.embed_dim();
    out.values.reserve(out.rows * out.cols);
    out.labels = dataset.labels();

    for (std::size_t start = 0; start < dataset.size(); start += batch_size) {
        const std::size_t end = std::min(dataset.size(), start + batch_size);
        std::vector<T> pixels;
        pixels.reserve((end - start) * spec.input_channels * side * side);
        for (std::size_t i = start; i < end; ++i) {
            const data::Image& src = dataset.records[i].pixels;
            if (src.channels != spec.input_channels) {
                throw DimensionError("extract_features: image has " + std::to_string(src.channels) +
                                     " channels, encoder expects " + std::to_string(spec.input_channels));
            }
            const data::Image img =
                (src.height == side && src.width == side) ? src : augment::resize_bilinear(src, side, side);
            for (float v : img.pixels) pixels.push_back(static_cast<T>(v));
        }
        const auto x = Tensor<T>::from({end - start, spec.input_channels, side, side}, std::move(pixels));
        const auto z = model::encode(params, x, ad::Mode::Eval);
        for (T v : z.data()) out.values.push_back(static_cast<double>(v));
    }
    return out;
}

FeatureSet pixel_features(const data::Dataset& dataset) {
    if (dataset.size() == 0) throw DimensionError("pixel_features: empty dataset");
    FeatureSet out;
    out.rows = dataset.size();
    out.cols = dataset.records.front().pixels.size();
    out.labels = dataset.labels();
    out.values.reserve(out.rows * out.cols);
    for (const auto& r : dataset.records) {
        if (r.pixels.size() != out.cols) throw DimensionError("pixel_features: images differ in size");
        out.values.insert(out.values.end(), r.pixels.pixels.begin(), r.pixels.pixels.end());
    }
    return out;
}

ProbeResult knn_probe(const FeatureSet& train, const FeatureSet& test, std::size_t k) {
    require_nonempty(train, "knn_probe train");
    require_nonempty(test, "knn_probe test");
    if (train.cols != test.cols) throw DimensionError("knn_probe: train and test feature widths differ");
    if (k < 1 || k > train.rows) {
        throw ConfigError("knn_probe: k must be in [1, " + std::to_string(train.rows) + "], got " + std::to_string(k));
    }
    const std::size_t classes = class_count(train, test);
    const auto a = unit_rows(train);
    const auto b = unit_rows(test);

    std::vector<std::size_t> predictions(test.rows);
    const long rows = static_cast<long>(test.rows);
    // Rows are independent, so the split over threads cannot change a prediction.
#pragma omp parallel if (!kernels::strict_deterministic())
    {
        std::vector<double> sims(train.rows), sorted(train.rows);
        std::vector<std::size_t> votes(classes);
#pragma omp for schedule(static)
        for (long t = 0; t < rows; ++t) {
            const double* q = b.data() + static_cast<std::size_t>(t) * test.cols;
            for (std::size_t i = 0; i < train.rows; ++i) {
                const double* r = a.data() + i * train.cols;
                double dot = 0.0;
                for (std::size_t j = 0; j < train.cols; ++j) dot += q[j] * r[j];
                sims[i] = dot;
            }
            sorted = sims;
            std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end(),
                             std::greater<>());
            const double kth = sorted[k - 1];
            std::fill(votes.begin(), votes.end(), 0);
            for (std::size_t i = 0; i < train.rows; ++i)
                if (sims[i] >= kth) ++votes[train.labels[i]];
            predictions[t] = static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
        }
    }
    return score(test, std::move(predictions));
}

void LinearProbeConfig::validate() const {
    if (epochs < 1) throw ConfigError("probe.epochs must be at least 1");
    if (!(lr > 0.0)) throw ConfigError("probe.lr must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("probe.momentum must be in [0,1)");
    if (!(weight_decay >= 0.0)) throw ConfigError("probe.weight_decay must be non-negative");
    if (batch_size < 1) throw ConfigError("probe.batch_size must be positive");
}

json to_json(const LinearProbeConfig& cfg) {
    return {{"epochs", cfg.epochs},         {"lr", cfg.lr},     {"momentum", cfg.momentum},
            {"weight_decay", cfg.weight_decay}, {"batch_size", cfg.batch_size}, {"seed", cfg.seed},
            {"standardize", cfg.standardize}};
}

LinearProbeConfig linear_probe_config_from_json(const json& j, const std::string& path) {
    LinearProbeConfig cfg;
    FieldReader r(j, path);
    r.read("epochs", cfg.epochs);
    r.read("lr", cfg.lr);
    r.read("momentum", cfg.momentum);
    r.read("weight_decay", cfg.weight_decay);
    r.read("batch_size", cfg.batch_size);
    r.read("seed", cfg.seed);
    r.read("standardize", cfg.standardize);
    r.finish();
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        throw ConfigError(path + msg.substr(msg.find('.')));
    }
    return cfg;
}

ProbeResult linear_probe(const FeatureSet& train, const FeatureSet& test, const LinearProbeConfig& cfg) {
    cfg.validate();
    require_nonempty(train, "linear_probe train");
    require_nonempty(test, "linear_probe test");
    if (train.cols != test.cols) throw DimensionError("linear_probe: train and test feature widths differ");
    const std::size_t dims = train.cols;
    const std::size_t classes = class_count(train, test);

    std::vector<double> shift(dims, 0.0), inv_scale(dims, 1.0);
    if (cfg.standardize) {
        for (std::size_t j = 0; j < dims; ++j) {
            double mean = 0.0;
            for (std::size_t i = 0; i < train.rows; ++i) mean += train.row(i)[j];
            mean /= static_cast<double>(train.rows);
            double var = 0.0;
            for (std::size_t i = 0; i < train.rows; ++i) var += (train.row(i)[j] - mean) * (train.row(i)[j] - mean);
            const double sd = std::sqrt(var / static_cast<double>(train.rows));
            shift[j] = mean;
            inv_scale[j] = sd > 1e-12 ? 1.0 / sd : 0.0;
        }
    }
    auto prepared = [&](const FeatureSet& f, std::size_t i, std::size_t j) { return (f.row(i)[j] - shift[j]) * inv_scale[j]; };

    auto weight = Tensor<double>::zeros({dims, classes}, true);
    auto bias = Tensor<double>::zeros({classes}, true);
    std::vector<double> buf_w(weight.numel(), 0.0), buf_b(classes, 0.0);

    const std::size_t per_epoch = (train.rows + cfg.batch_size - 1) / cfg.batch_size;
    const std::size_t total_steps = per_epoch * cfg.epochs;
    std::vector<std::size_t> order(train.rows);
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng{cfg.seed, epoch, kProbeShuffleTag};
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

        for (std::size_t start = 0; start < train.rows; start += cfg.batch_size, ++step) {
            const std::size_t end = std::min(train.rows, start + cfg.batch_size);
            std::vector<double> xs;
            std::vector<std::size_t> ys;
            xs.reserve((end - start) * dims);
            for (std::size_t n = start; n < end; ++n) {
                for (std::size_t j = 0; j < dims; ++j) xs.push_back(prepared(train, order[n], j));
                ys.push_back(train.labels[order[n]]);
            }
            const auto x = Tensor<double>::from({end - start, dims}, std::move(xs));
            const auto loss = ad::softmax_cross_entropy(ad::add_bias(ad::matmul(x, weight), bias), ys);
            if (!std::isfinite(loss.item())) {
                throw NumericError("linear_probe: non-finite loss at step " + std::to_string(step));
            }
            weight.zero_grad();
            bias.zero_grad();
            loss.backward();

            const double lr = cfg.lr * 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) /
                                                              static_cast<double>(total_steps)));
            auto w = weight.mutable_data();
            const auto gw = weight.grad();
            for (std::size_t i = 0; i < w.size(); ++i) {
                buf_w[i] = cfg.momentum * buf_w[i] + gw[i] + cfg.weight_decay * w[i];
                w[i] -= lr * buf_w[i];
            }
            auto bv = bias.mutable_data();
            const auto gb = bias.grad();
            for (std::size_t i = 0; i < bv.size(); ++i) {
                buf_b[i] = cfg.momentum * buf_b[i] + gb[i];
                bv[i] -= lr * buf_b[i];
            }
        }
    }

    std::vector<std::size_t> predictions(test.rows);
    const auto w = weight.data();
    const auto bv = bias.data();
    std::vector<double> logits(classes);
    for (std::size_t i = 0; i < test.rows; ++i) {
        for (std::size_t c = 0; c < classes; ++c) logits[c] = bv[c];
        for (std::size_t j = 0; j < dims; ++j) {
            const double v = prepared(test, i, j);
            for (std::size_t c = 0; c < classes; ++c) logits[c] += v * w[j * classes + c];
        }
        predictions[i] = static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
    }
    return score(test, std::move(predictions));
}

double embedding_std(const FeatureSet& f) {
    require_nonempty(f, "embedding_std");
    const auto unit = unit_rows(f);
    double total = 0.0;
    for (std::size_t j = 0; j < f.cols; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < f.rows; ++i) mean += unit[i * f.cols + j];
        mean /= static_cast<double>(f.rows);
        double var = 0.0;
        for (std::size_t i = 0; i < f.rows; ++i) var += (unit[i * f.cols + j] - mean) * (unit[i * f.cols + j] - mean);
        total += std::sqrt(var / static_cast<double>(f.rows));
    }
    return total / static_cast<double>(f.cols);
}

template <typename T>
EvalReport evaluate(model::ModelParams<T>& params, const data::Dataset& train, const data::Dataset& test,
                    const EvalConfig& cfg) {
    const auto train_f = extract_features(params, train);
    const auto test_f = extract_features(params, test);
    EvalReport report;
    report.knn_k = std::min(cfg.knn_k, train_f.rows);
    const auto knn = knn_probe(train_f, test_f, report.knn_k);
    report.knn_top1 = knn.top1;
    report.per_class_accuracy = knn.per_class;
    if (cfg.run_linear) report.linear_top1 = linear_probe(train_f, test_f, cfg.linear).top1;
    report.embedding_std = embedding_std(test_f);
    return report;
}

json to_json(const EvalReport& report) {
    json per_class = json::object();
    for (const auto& [c, acc] : report.per_class_accuracy) per_class[std::to_string(c)] = acc;
    return {{"knn_top1", report.knn_top1},
            {"knn_k", report.knn_k},
            {"linear_top1", report.linear_top1},
            {"embedding_std", report.embedding_std},
            {"per_class_accuracy", per_class},
            {"config_hash", report.config_hash},
            {"config", report.config}};
}

void write_report(const EvalReport& report, const std::filesystem::path& json_path) {
    std::ofstream out(json_path);
    if (!out) throw std::runtime_error("cannot write " + json_path.string());
    out << to_json(report).dump(2) << "\n";
}

void write_per_class_csv(const EvalReport& report, const std::filesystem::path& csv_path) {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot write " + csv_path.string());
    out << "class,knn_accuracy\n";
    char buf[64];
    for (const auto& [c, acc] : report.per_class_accuracy) {
        std::snprintf(buf, sizeof buf, "%.17g", acc);
        out << c << "," << buf << "\n";
    }
}

#define MIXSIAM_INSTANTIATE_EVAL(T)                                                                         \
    template FeatureSet extract_features<T>(model::ModelParams<T>&, const data::Dataset&, std::size_t);     \
    template EvalReport evaluate<T>(model::ModelParams<T>&, const data::Dataset&, const data::Dataset&,     \
                                    const EvalConfig&);

MIXSIAM_INSTANTIATE_EVAL(float)
MIXSIAM_INSTANTIATE_EVAL(double)

}  // namespace mixsiam::eval
