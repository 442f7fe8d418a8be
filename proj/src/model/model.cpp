#include "mixsiam/model/model.hpp"

#include <cmath>
#include <cstring>

#include "mixsiam/core/error.hpp"
#include "mixsiam/core/rng.hpp"

namespace mixsiam::model {

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

template <typename T>
Tensor<T> uniform_weight(ad::Shape shape, std::size_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::vector<T> values(ad::numel(shape));
    for (auto& v : values) v = static_cast<T>(rng.uniform(-bound, bound));
    return Tensor<T>::from(std::move(shape), std::move(values), true);
}

template <typename T>
void add_batchnorm(ModelParams<T>& p, const std::string& prefix, std::size_t channels) {
    p.add_param(prefix + ".gamma", Tensor<T>::full({channels}, T(1), true));
    p.add_param(prefix + ".beta", Tensor<T>::zeros({channels}, true));
    p.add_buffer(prefix + ".running_mean", Tensor<T>::zeros({channels}));
    p.add_buffer(prefix + ".running_var", Tensor<T>::full({channels}, T(1)));
}

template <typename T>
Tensor<T> apply_batchnorm(ModelParams<T>& p, const std::string& prefix, const Tensor<T>& x, Mode mode) {
    return ad::batchnorm(x, p.param(prefix + ".gamma"), p.param(prefix + ".beta"), p.buffer(prefix + ".running_mean"),
                         p.buffer(prefix + ".running_var"), mode, p.bn_options());
}

template <typename T>
void require_batch(const Tensor<T>& x, Mode mode, const char* who) {
    if (mode != Mode::Eval && x.dim(0) < 2) {
        throw DimensionError(std::string(who) + ": train mode needs a batch of at least 2, got " +
                             std::to_string(x.dim(0)));
    }
}

}  // namespace

std::size_t EncoderSpec::backbone_dim() const {
    if (stages.empty()) return input_channels * input_size * input_size;
    return stages.back().channels;
}

void EncoderSpec::validate() const {
    if (input_channels == 0 || input_size == 0) throw ConfigError("encoder input shape must be positive");
    for (const auto& s : stages) {
        if (s.channels == 0 || s.stride == 0) throw ConfigError("encoder stage channels and stride must be positive");
    }
    for (std::size_t w : projector) {
        if (w == 0) throw ConfigError("encoder projector widths must be positive");
    }
}

void PredictorSpec::validate() const {
    if (hidden_dim == 0 || embed_dim == 0) throw ConfigError("predictor dimensions must be positive");
}

template <typename T>
ModelParams<T>::ModelParams(EncoderSpec encoder, PredictorSpec predictor, NormSettings norm)
    : encoder_(std::move(encoder)), predictor_(predictor), norm_(norm) {}

template <typename T>
Tensor<T>& ModelParams<T>::param(const std::string& name) {
    for (auto& p : params_)
        if (p.name == name) return p.tensor;
    throw std::out_of_range("no parameter named '" + name + "'");
}

template <typename T>
const Tensor<T>& ModelParams<T>::param(const std::string& name) const {
    for (const auto& p : params_)
        if (p.name == name) return p.tensor;
    throw std::out_of_range("no parameter named '" + name + "'");
}

template <typename T>
Tensor<T>& ModelParams<T>::buffer(const std::string& name) {
    for (auto& b : buffers_)
        if (b.name == name) return b.tensor;
    throw std::out_of_range("no buffer named '" + name + "'");
}

template <typename T>
bool ModelParams<T>::decays(const std::string& name) {
    return ends_with(name, ".weight");
}

template <typename T>
void ModelParams<T>::zero_grad() {
    for (auto& p : params_) p.tensor.zero_grad();
}

template <typename T>
std::size_t ModelParams<T>::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.tensor.numel();
    return n;
}

template <typename T>
std::uint64_t ModelParams<T>::checksum() const {
    std::string bytes;
    for (const auto* group : {&params_, &buffers_}) {
        for (const auto& p : *group) {
            bytes += p.name;
            const auto d = p.tensor.data();
            bytes.append(reinterpret_cast<const char*>(d.data()), d.size_bytes());
        }
    }
    return fnv1a(bytes);
}

template <typename T>
ModelParams<T> ModelParams<T>::clone() const {
    ModelParams<T> out(encoder_, predictor_, norm_);
    for (const auto& p : params_) {
        auto t = p.tensor.clone();
        t.set_requires_grad(true);
        out.add_param(p.name, t);
    }
    for (const auto& b : buffers_) out.add_buffer(b.name, b.tensor.clone());
    return out;
}

template <typename T>
void ModelParams<T>::add_param(std::string name, Tensor<T> t) {
    params_.push_back({std::move(name), std::move(t)});
}

template <typename T>
void ModelParams<T>::add_buffer(std::string name, Tensor<T> t) {
    buffers_.push_back({std::move(name), std::move(t)});
}

template <typename T>
ModelParams<T> init(const EncoderSpec& encoder, const PredictorSpec& predictor, std::uint64_t seed,
                    const NormSettings& norm) {
    encoder.validate();
    predictor.validate();
    if (predictor.embed_dim != encoder.embed_dim()) {
        throw ConfigError("predictor.embed_dim (" + std::to_string(predictor.embed_dim) +
                          ") must equal the projector output width (" + std::to_string(encoder.embed_dim()) + ")");
    }
    ModelParams<T> p(encoder, predictor, norm);
    std::uint64_t slot = 0;
    auto next_rng = [&] { return Rng{seed, 0x494e4954ULL, slot++}; };

    std::size_t in_ch = encoder.input_channels;
    for (std::size_t i = 0; i < encoder.stages.size(); ++i) {
        const std::string prefix = "backbone." + std::to_string(i);
        const std::size_t out_ch = encoder.stages[i].channels;
        auto rng = next_rng();
        p.add_param(prefix + ".conv.weight", uniform_weight<T>({out_ch, in_ch, 3, 3}, in_ch * 9, rng));
        add_batchnorm(p, prefix + ".bn", out_ch);
        in_ch = out_ch;
    }
    std::size_t in_dim = encoder.backbone_dim();
    for (std::size_t i = 0; i < 3; ++i) {
        const std::string prefix = "projector." + std::to_string(i);
        const std::size_t out_dim = encoder.projector[i];
        auto rng = next_rng();
        p.add_param(prefix + ".weight", uniform_weight<T>({in_dim, out_dim}, in_dim, rng));
        add_batchnorm(p, prefix + ".bn", out_dim);
        in_dim = out_dim;
    }
    {
        auto rng = next_rng();
        p.add_param("predictor.0.weight", uniform_weight<T>({predictor.embed_dim, predictor.hidden_dim},
                                                            predictor.embed_dim, rng));
        add_batchnorm(p, "predictor.0.bn", predictor.hidden_dim);
    }
    {
        auto rng = next_rng();
        p.add_param("predictor.1.weight", uniform_weight<T>({predictor.hidden_dim, predictor.embed_dim},
                                                            predictor.hidden_dim, rng));
        // Nonzero so a row whose hidden units are all inactive still has a direction.
        p.add_param("predictor.1.bias", Tensor<T>::zeros({predictor.embed_dim}, true));
    }
    return p;
}

template <typename T>
Tensor<T> backbone(ModelParams<T>& params, const Tensor<T>& x, Mode mode) {
    const EncoderSpec& spec = params.encoder_spec();
    if (x.rank() != 4 || x.dim(1) != spec.input_channels) {
        throw DimensionError("encode: expected [B×" + std::to_string(spec.input_channels) + "×H×W], got " +
                             ad::to_string(x.shape()));
    }
    require_batch(x, mode, "encode");
    if (spec.stages.empty()) {
        if (x.dim(2) != spec.input_size || x.dim(3) != spec.input_size) {
            throw DimensionError("encode: flattening backbone expects " + std::to_string(spec.input_size) +
                                 "-pixel inputs, got " + ad::to_string(x.shape()));
        }
        return ad::flatten(x);
    }
    Tensor<T> h = x;
    for (std::size_t i = 0; i < spec.stages.size(); ++i) {
        const std::string prefix = "backbone." + std::to_string(i);
        Tensor<T> y = ad::conv2d(h, params.param(prefix + ".conv.weight"), spec.stages[i].stride, 1);
        y = apply_batchnorm(params, prefix + ".bn", y, mode);
        if (spec.residual && y.shape() == h.shape()) y = ad::add(y, h);
        h = ad::relu(y);
    }
    return ad::global_avg_pool(h);
}

template <typename T>
Tensor<T> encode(ModelParams<T>& params, const Tensor<T>& x, Mode mode) {
    Tensor<T> h = backbone(params, x, mode);
    for (std::size_t i = 0; i < 3; ++i) {
        const std::string prefix = "projector." + std::to_string(i);
        h = ad::matmul(h, params.param(prefix + ".weight"));
        h = apply_batchnorm(params, prefix + ".bn", h, mode);
        if (i < 2) h = ad::relu(h);
    }
    return h;
}

template <typename T>
Tensor<T> predict(ModelParams<T>& params, const Tensor<T>& z, Mode mode) {
    const std::size_t dim = params.predictor_spec().embed_dim;
    if (z.rank() != 2 || z.dim(1) != dim) {
        throw DimensionError("predict: expected [B×" + std::to_string(dim) + "], got " + ad::to_string(z.shape()));
    }
    require_batch(z, mode, "predict");
    Tensor<T> h = ad::matmul(z, params.param("predictor.0.weight"));
    h = ad::relu(apply_batchnorm(params, "predictor.0.bn", h, mode));
    h = ad::matmul(h, params.param("predictor.1.weight"));
    return ad::add_bias(h, params.param("predictor.1.bias"));
}

#define MIXSIAM_INSTANTIATE_MODEL(T)                                                                        \
    template class ModelParams<T>;                                                                          \
    template ModelParams<T> init<T>(const EncoderSpec&, const PredictorSpec&, std::uint64_t, const NormSettings&); \
    template Tensor<T> encode<T>(ModelParams<T>&, const Tensor<T>&, Mode);                                  \
    template Tensor<T> backbone<T>(ModelParams<T>&, const Tensor<T>&, Mode);                                \
    template Tensor<T> predict<T>(ModelParams<T>&, const Tensor<T>&, Mode);

MIXSIAM_INSTANTIATE_MODEL(float)
MIXSIAM_INSTANTIATE_MODEL(double)

}  // namespace mixsiam::model
