#include "mixsiam/train/trainer.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>

#include "mixsiam/augment/augment.hpp"
#include "mixsiam/core/error.hpp"
#include "mixsiam/kernels/parallel.hpp"

namespace mixsiam::train {

using ad::Mode;
using ad::Tensor;

namespace {

constexpr std::uint64_t kAggregateTag = 0x41474752ULL;

template <typename T>
Tensor<T> stack(const std::vector<augment::ViewTriplet>& views, data::Image augment::ViewTriplet::*member) {
    const data::Image& first = views.front().*member;
    std::vector<T> values;
    values.reserve(views.size() * first.size());
    for (const auto& v : views) {
        const data::Image& img = v.*member;
        for (float px : img.pixels) values.push_back(static_cast<T>(px));
    }
    return Tensor<T>::from({views.size(), first.channels, first.height, first.width}, std::move(values));
}

template <typename T>
std::vector<TensorRecord> records_of(const std::vector<model::NamedTensor<T>>& list) {
    std::vector<TensorRecord> out;
    out.reserve(list.size());
    for (const auto& nt : list) {
        const auto d = nt.tensor.data();
        out.push_back({nt.name, nt.tensor.shape(), std::vector<double>(d.begin(), d.end())});
    }
    return out;
}

template <typename T>
void load_records(std::vector<model::NamedTensor<T>>& dest, const std::vector<TensorRecord>& src, const char* what) {
    if (dest.size() != src.size()) {
        throw ParseError(std::string("checkpoint has ") + std::to_string(src.size()) + " " + what + " tensors, model has " +
                             std::to_string(dest.size()),
                         0);
    }
    for (std::size_t i = 0; i < dest.size(); ++i) {
        if (dest[i].name != src[i].name || dest[i].tensor.shape() != src[i].shape) {
            throw ParseError(std::string("checkpoint ") + what + " '" + src[i].name + "' " +
                                 ad::to_string(src[i].shape) + " does not match model tensor '" + dest[i].name +
                                 "' " + ad::to_string(dest[i].tensor.shape()),
                             0);
        }
        auto out = dest[i].tensor.mutable_data();
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = static_cast<T>(src[i].values[j]);
    }
}

void probe_writable(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    const auto probe = dir / ".write_probe";
    {
        std::ofstream out(probe);
        if (!out || !(out << "ok") || !out.flush()) {
            throw std::runtime_error("output directory " + dir.string() + " is not writable");
        }
    }
    std::filesystem::remove(probe, ec);
}

// Existing data rows with step < keep_below; the metadata and header lines are rewritten.
std::vector<std::string> surviving_rows(const std::filesystem::path& path, std::size_t keep_below) {
    std::vector<std::string> rows;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("step,", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        const std::size_t step = std::stoull(line.substr(0, comma));
        if (step < keep_below) rows.push_back(line);
    }
    return rows;
}

template <typename T>
RunResult run_impl(const TrainConfig& cfg, const data::Dataset& dataset, const RunOptions& options) {
    kernels::StrictModeGuard strict(cfg.strict_deterministic || kernels::strict_deterministic());
    probe_writable(options.out_dir);

    const std::uint64_t hash = config_hash(cfg);
    TrainState<T> state;
    if (options.resume) {
        const Checkpoint ckpt = read_checkpoint(*options.resume);
        if (ckpt.config_hash != hash && !options.ignore_config_mismatch) {
            throw ConfigError("resume: checkpoint " + options.resume->string() + " was written with config " +
                              hex(ckpt.config_hash) + ", current config is " + hex(hash) +
                              " (use the override flag to resume anyway)");
        }
        if (ckpt.config.precision != cfg.precision) {
            throw ConfigError("resume: checkpoint precision " + std::to_string(ckpt.config.precision) +
                              " differs from train.precision " + std::to_string(cfg.precision));
        }
        state = restore<T>(ckpt);
        auto momentum = std::move(state.optimizer.buffers());
        state.optimizer = SgdMomentum<T>(cfg.momentum, cfg.weight_decay);
        state.optimizer.buffers() = std::move(momentum);
    } else {
        state = initial_state<T>(cfg);
    }

    const std::size_t per_epoch = dataset.size() / cfg.batch_size;
    const std::size_t total_steps = per_epoch * cfg.epochs;
    if (state.step != state.epoch * per_epoch) {
        throw ConfigError("resume: checkpoint is at step " + std::to_string(state.step) + " of epoch " +
                          std::to_string(state.epoch) + ", which does not fit " + std::to_string(per_epoch) +
                          " steps per epoch");
    }

    RunResult result;
    result.metrics_path = options.out_dir / "metrics.csv";
    std::vector<std::string> kept;
    if (options.resume) kept = surviving_rows(result.metrics_path, state.step);
    std::ofstream metrics(result.metrics_path, std::ios::trunc);
    if (!metrics) throw std::runtime_error("cannot write " + result.metrics_path.string());
    metrics << "# config_hash=" << hex(hash) << "\n" << kMetricsHeader << "\n";
    for (const auto& row : kept) metrics << row << "\n";
    metrics.flush();

    const std::size_t last_epoch =
        options.stop_after_epochs ? std::min(cfg.epochs, *options.stop_after_epochs) : cfg.epochs;
    for (std::size_t epoch = state.epoch; epoch < last_epoch; ++epoch) {
        const auto order = data::batches(dataset, cfg.batch_size, cfg.shuffle_seed(), epoch);
        for (const auto& batch : order) {
            const std::size_t step = state.step;
            const double lr = cosine_lr(step, total_steps, cfg.effective_lr());
            const StepMetrics m = train_step(state, dataset, batch, cfg, lr, epoch, step);
            metrics << format_metrics_row(m) << "\n";
            metrics.flush();
            if (options.on_step) options.on_step(m);
            result.metrics.push_back(m);
        }
        state.epoch = epoch + 1;
        if (options.write_checkpoints) {
            const auto path = options.out_dir / checkpoint_filename(state.epoch);
            write_checkpoint(capture(state, cfg), path);
            result.checkpoints.push_back(path);
        }
    }
    if (!metrics) throw std::runtime_error("error writing " + result.metrics_path.string());

    result.final_checkpoint = capture(state, cfg);
    result.model = std::move(state.params);
    return result;
}

}  // namespace

template <typename T>
TrainState<T> initial_state(const TrainConfig& cfg) {
    TrainState<T> state;
    state.params = model::init<T>(cfg.encoder, cfg.predictor, cfg.seed, cfg.norm);
    state.optimizer = SgdMomentum<T>(cfg.momentum, cfg.weight_decay);
    return state;
}

template <typename T>
double embedding_std(const Tensor<T>& z, double eps) {
    const std::size_t rows = z.dim(0), cols = z.dim(1);
    const auto d = z.data();
    std::vector<double> normed(d.size());
    for (std::size_t i = 0; i < rows; ++i) {
        double sq = 0.0;
        for (std::size_t j = 0; j < cols; ++j) sq += static_cast<double>(d[i * cols + j]) * d[i * cols + j];
        const double norm = std::max(std::sqrt(sq), eps);
        for (std::size_t j = 0; j < cols; ++j) normed[i * cols + j] = d[i * cols + j] / norm;
    }
    double total = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < rows; ++i) mean += normed[i * cols + j];
        mean /= static_cast<double>(rows);
        double var = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
            const double dv = normed[i * cols + j] - mean;
            var += dv * dv;
        }
        total += std::sqrt(var / static_cast<double>(rows));
    }
    return total / static_cast<double>(cols);
}

template <typename T>
StepMetrics train_step(TrainState<T>& state, const data::Dataset& dataset, std::span<const std::size_t> batch,
                       const TrainConfig& cfg, double lr, std::size_t epoch, std::size_t step) {
    if (batch.size() < 2) throw DimensionError("train_step: batch needs at least 2 records");
    for (std::size_t idx : batch) {
        if (idx >= dataset.size()) throw DimensionError("train_step: record index " + std::to_string(idx) + " out of range");
    }

    const auto policy = cfg.effective_lambda_mix();
    std::vector<augment::ViewTriplet> views(batch.size());
    std::exception_ptr failure;
    const long count = static_cast<long>(batch.size());
#pragma omp parallel for schedule(static) if (!kernels::strict_deterministic())
    for (long i = 0; i < count; ++i) {
        try {
            views[i] = augment::make_triplet(dataset.records[batch[i]], cfg.augment, policy, cfg.seed, epoch);
        } catch (...) {
#pragma omp critical(mixsiam_triplet_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    auto& params = state.params;
    const T eps = static_cast<T>(cfg.norm.l2_eps);
    const auto x1 = stack<T>(views, &augment::ViewTriplet::x1);
    const auto x2 = stack<T>(views, &augment::ViewTriplet::x2);

    const auto z1 = model::encode(params, x1, Mode::Train);
    const auto z2 = model::encode(params, x2, Mode::Train);
    const auto p1 = model::predict(params, z1, Mode::Train);
    const auto p2 = model::predict(params, z2, Mode::Train);
    const auto l_siam = loss::siam_loss(p1, p2, z1, z2, cfg.stop_gradient, eps);

    Tensor<T> total = l_siam;
    double l_mix_value = 0.0;
    double lambda = 1.0;
    if (cfg.objective == Objective::MixSiam) {
        // At λ = 1 the mixed term has zero weight. It is still evaluated for
        // the log, but without gradient or running-statistics updates, so the
        // run is exactly SimSiam.
        const bool weighted = cfg.lambda < 1.0;
        const Mode mix_mode = weighted ? Mode::Train : Mode::TrainFrozenStats;
        const auto xm = stack<T>(views, &augment::ViewTriplet::xm);
        const auto zm = model::encode(params, xm, mix_mode);
        const auto pm = model::predict(params, zm, mix_mode);
        Rng coin{cfg.seed, epoch, step, kAggregateTag};
        const auto zf = loss::aggregate(z1, z2, cfg.aggregation, &coin);
        const auto l_mix = cfg.stop_gradient ? loss::mix_loss(pm, ad::detach(zf), eps) : loss::neg_cosine(pm, zf, eps);
        if (weighted) total = loss::blend(l_siam, l_mix, cfg.lambda);
        l_mix_value = static_cast<double>(l_mix.item());
        lambda = cfg.lambda;
    }

    params.zero_grad();
    total.backward();

    StepMetrics m;
    m.step = step;
    m.epoch = epoch;
    m.lr = lr;
    m.loss = {static_cast<double>(l_siam.item()), l_mix_value, static_cast<double>(total.item()), lambda};

    std::string bad_param;
    double sq = 0.0;
    for (const auto& p : params.params()) {
        for (T g : p.tensor.grad()) {
            if (!std::isfinite(g)) {
                if (bad_param.empty()) bad_param = p.name;
                break;
            }
            sq += static_cast<double>(g) * static_cast<double>(g);
        }
    }
    if (!std::isfinite(m.loss.total) || !bad_param.empty()) {
        std::ostringstream msg;
        msg << "non-finite ";
        if (!std::isfinite(m.loss.total)) msg << "loss (total=" << m.loss.total << ") ";
        else msg << "gradient ";
        msg << "at step " << step << " (epoch " << epoch << ")";
        if (!bad_param.empty()) msg << "; first offending parameter: " << bad_param;
        throw NumericError(msg.str());
    }
    m.grad_norm = std::sqrt(sq);
    m.embedding_std = embedding_std(z1, cfg.norm.l2_eps);

    state.optimizer.step(params, lr);
    params.zero_grad();
    state.step = step + 1;
    state.loss_tail.push_back(m.loss.total);
    if (state.loss_tail.size() > kLossTailLength) state.loss_tail.erase(state.loss_tail.begin());
    return m;
}

std::string format_metrics_row(const StepMetrics& m) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", m.step, m.epoch, m.lr, m.loss.l_siam,
                  m.loss.l_mix, m.loss.total, m.grad_norm, m.embedding_std);
    return buf;
}

template <typename T>
Checkpoint capture(const TrainState<T>& state, const TrainConfig& cfg) {
    Checkpoint ckpt;
    ckpt.config = cfg;
    ckpt.config_hash = config_hash(cfg);
    ckpt.epoch = state.epoch;
    ckpt.step = state.step;
    ckpt.params = records_of(state.params.params());
    ckpt.buffers = records_of(state.params.buffers());
    const auto& bufs = state.optimizer.buffers();
    const auto& list = state.params.params();
    for (std::size_t i = 0; i < bufs.size(); ++i) {
        ckpt.momentum.push_back({list[i].name, list[i].tensor.shape(), std::vector<double>(bufs[i].begin(), bufs[i].end())});
    }
    ckpt.loss_tail = state.loss_tail;
    return ckpt;
}

template <typename T>
TrainState<T> restore(const Checkpoint& ckpt) {
    TrainState<T> state = initial_state<T>(ckpt.config);
    load_records(state.params.params(), ckpt.params, "parameter");
    load_records(state.params.buffers(), ckpt.buffers, "buffer");
    if (!ckpt.momentum.empty()) {
        auto& bufs = state.optimizer.buffers();
        const auto& list = state.params.params();
        if (ckpt.momentum.size() != list.size()) throw ParseError("checkpoint momentum count does not match model", 0);
        bufs.resize(list.size());
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (ckpt.momentum[i].name != list[i].name || ckpt.momentum[i].values.size() != list[i].tensor.numel()) {
                throw ParseError("checkpoint momentum '" + ckpt.momentum[i].name + "' does not match model", 0);
            }
            bufs[i].assign(ckpt.momentum[i].values.begin(), ckpt.momentum[i].values.end());
        }
    }
    state.epoch = ckpt.epoch;
    state.step = ckpt.step;
    state.loss_tail = ckpt.loss_tail;
    return state;
}

RunResult run(const TrainConfig& cfg, const data::Dataset& dataset, const RunOptions& options) {
    cfg.validate();
    dataset.validate();
    if (dataset.channels() != cfg.encoder.input_channels) {
        throw ConfigError("train.encoder.input_channels is " + std::to_string(cfg.encoder.input_channels) +
                          " but the dataset has " + std::to_string(dataset.channels()) + " channels");
    }
    if (dataset.size() < cfg.batch_size) {
        throw ConfigError("train.batch_size " + std::to_string(cfg.batch_size) + " exceeds the dataset size " +
                          std::to_string(dataset.size()));
    }
    if (cfg.precision == 64) return run_impl<double>(cfg, dataset, options);
    return run_impl<float>(cfg, dataset, options);
}

#define MIXSIAM_INSTANTIATE_TRAIN(T)                                                                              \
    template TrainState<T> initial_state<T>(const TrainConfig&);                                                  \
    template double embedding_std<T>(const Tensor<T>&, double);                                                   \
    template StepMetrics train_step<T>(TrainState<T>&, const data::Dataset&, std::span<const std::size_t>,        \
                                       const TrainConfig&, double, std::size_t, std::size_t);                     \
    template Checkpoint capture<T>(const TrainState<T>&, const TrainConfig&);                                     \
    template TrainState<T> restore<T>(const Checkpoint&);

MIXSIAM_INSTANTIATE_TRAIN(float)
MIXSIAM_INSTANTIATE_TRAIN(double)

}  // namespace mixsiam::train
