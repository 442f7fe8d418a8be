#include "mixsiam/train/config.hpp"

#include <cstdio>

#include "mixsiam/core/error.hpp"
#include "mixsiam/core/json_fields.hpp"
#include "mixsiam/core/rng.hpp"

namespace mixsiam::train {

using nlohmann::json;

namespace {

json range_json(const augment::Range& r) { return json::array({r.lo, r.hi}); }

void read_range(FieldReader& reader, const char* key, augment::Range& out) {
    if (!reader.has(key)) return;
    const json& v = reader.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw ConfigError(reader.field(key) + ": expected [lo, hi]");
    }
    out = {v[0].get<double>(), v[1].get<double>()};
}

std::string policy_name(augment::LambdaMixPolicy::Kind kind) {
    switch (kind) {
        case augment::LambdaMixPolicy::Kind::Fixed: return "fixed";
        case augment::LambdaMixPolicy::Kind::Beta: return "beta";
        case augment::LambdaMixPolicy::Kind::PickOneView: return "pick_one_view";
    }
    return "fixed";
}

model::EncoderSpec encoder_from_json(const json& j, const std::string& path) {
    model::EncoderSpec spec;
    FieldReader r(j, path);
    r.read("input_channels", spec.input_channels);
    r.read("input_size", spec.input_size);
    r.read("residual", spec.residual);
    if (r.has("stages")) {
        const json& stages = r.at("stages");
        if (!stages.is_array()) throw ConfigError(r.field("stages") + ": expected an array");
        spec.stages.clear();
        for (std::size_t i = 0; i < stages.size(); ++i) {
            model::StageSpec s;
            FieldReader sr(stages[i], r.field("stages") + "[" + std::to_string(i) + "]");
            sr.read("channels", s.channels);
            sr.read("stride", s.stride);
            sr.finish();
            spec.stages.push_back(s);
        }
    }
    if (r.has("projector")) {
        const json& p = r.at("projector");
        if (!p.is_array() || p.size() != 3) throw ConfigError(r.field("projector") + ": expected exactly 3 widths");
        for (std::size_t i = 0; i < 3; ++i) {
            if (!p[i].is_number_unsigned()) throw ConfigError(r.field("projector") + ": widths must be positive integers");
            spec.projector[i] = p[i].get<std::size_t>();
        }
    }
    r.finish();
    return spec;
}

}  // namespace

void TrainConfig::validate() const {
    auto section = [](const char* name, auto&& check) {
        try {
            check();
        } catch (const ConfigError& e) {
            const std::string msg = e.what();
            throw ConfigError(msg.rfind(std::string(name) + ".", 0) == 0 ? "train." + msg
                                                                        : "train." + std::string(name) + ": " + msg);
        }
    };
    section("encoder", [&] { encoder.validate(); });
    section("predictor", [&] { predictor.validate(); });
    if (predictor.embed_dim != encoder.embed_dim()) {
        throw ConfigError("train.predictor.embed_dim must equal the last projector width");
    }
    section("augment", [&] { augment.validate(); });
    section("lambda_mix", [&] { lambda_mix.validate(); });
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("train.lambda must be in [0,1]");
    if (!(lr_base > 0.0)) throw ConfigError("train.lr_base must be positive");
    if (lr_reference_batch == 0) throw ConfigError("train.lr_reference_batch must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train.momentum must be in [0,1)");
    if (!(weight_decay >= 0.0)) throw ConfigError("train.weight_decay must be non-negative");
    if (batch_size < 2) throw ConfigError("train.batch_size must be at least 2");
    if (epochs < 1) throw ConfigError("train.epochs must be at least 1");
    if (precision != 32 && precision != 64) throw ConfigError("train.precision must be 32 or 64");
    if (augment.output_size != encoder.input_size && encoder.stages.empty()) {
        throw ConfigError("train.augment.output_size must equal train.encoder.input_size for a flattening backbone");
    }
    if (!(norm.l2_eps > 0.0 && norm.bn_eps > 0.0 && norm.bn_momentum >= 0.0 && norm.bn_momentum <= 1.0)) {
        throw ConfigError("train.norm: eps values must be positive and bn_momentum in [0,1]");
    }
}

double TrainConfig::effective_lr() const {
    if (!lr_batch_scaling) return lr_base;
    return lr_base * static_cast<double>(batch_size) / static_cast<double>(lr_reference_batch);
}

augment::LambdaMixPolicy TrainConfig::effective_lambda_mix() const {
    if (mixture) return lambda_mix;
    augment::LambdaMixPolicy pick;
    pick.kind = augment::LambdaMixPolicy::Kind::PickOneView;
    return pick;
}

TrainConfig TrainConfig::desk_default() { return TrainConfig{}; }

// Narrower head than desk_default so that embedding_std (about 1/sqrt(d) when
// healthy) can clear 0.1; 32 wide trained unreliably across seeds.
TrainConfig TrainConfig::small() {
    TrainConfig cfg;
    cfg.encoder.stages = {{16, 2}, {32, 2}, {32, 2}, {64, 2}};
    cfg.encoder.projector = {64, 64, 64};
    cfg.predictor = {16, 64};
    cfg.batch_size = 16;
    cfg.epochs = 20;
    return cfg;
}

json to_json(const TrainConfig& cfg) {
    json stages = json::array();
    for (const auto& s : cfg.encoder.stages) stages.push_back({{"channels", s.channels}, {"stride", s.stride}});
    json j;
    j["encoder"] = {{"input_channels", cfg.encoder.input_channels},
                    {"input_size", cfg.encoder.input_size},
                    {"stages", stages},
                    {"residual", cfg.encoder.residual},
                    {"projector", cfg.encoder.projector}};
    j["predictor"] = {{"hidden_dim", cfg.predictor.hidden_dim}, {"embed_dim", cfg.predictor.embed_dim}};
    j["norm"] = {{"l2_eps", cfg.norm.l2_eps}, {"bn_eps", cfg.norm.bn_eps}, {"bn_momentum", cfg.norm.bn_momentum}};
    const auto& a = cfg.augment;
    j["augment"] = {{"crop_scale", range_json(a.crop_scale)},
                    {"aspect_ratio", range_json(a.aspect_ratio)},
                    {"output_size", a.output_size},
                    {"hflip_prob", a.hflip_prob},
                    {"jitter_prob", a.jitter_prob},
                    {"jitter",
                     {{"brightness", a.jitter.brightness},
                      {"contrast", a.jitter.contrast},
                      {"saturation", a.jitter.saturation},
                      {"hue", a.jitter.hue}}},
                    {"grayscale_prob", a.grayscale_prob},
                    {"blur_prob", a.blur_prob},
                    {"blur_sigma", range_json(a.blur_sigma)},
                    {"seed", a.seed}};
    j["lambda"] = cfg.lambda;
    j["lambda_mix"] = {{"policy", policy_name(cfg.lambda_mix.kind)},
                       {"value", cfg.lambda_mix.value},
                       {"alpha", cfg.lambda_mix.alpha}};
    j["aggregation"] = {{"kind", loss::to_string(cfg.aggregation.kind)},
                        {"none_policy", cfg.aggregation.none_policy == loss::NoneBranchPolicy::AlwaysFirst
                                            ? "always_first"
                                            : "seeded_random"}};
    j["mixture"] = cfg.mixture;
    j["stop_gradient"] = cfg.stop_gradient;
    j["objective"] = cfg.objective == Objective::MixSiam ? "mixsiam" : "simsiam";
    j["lr_base"] = cfg.lr_base;
    j["lr_batch_scaling"] = cfg.lr_batch_scaling;
    j["lr_reference_batch"] = cfg.lr_reference_batch;
    j["momentum"] = cfg.momentum;
    j["weight_decay"] = cfg.weight_decay;
    j["batch_size"] = cfg.batch_size;
    j["epochs"] = cfg.epochs;
    j["seed"] = cfg.seed;
    j["data_seed"] = cfg.data_seed ? json(*cfg.data_seed) : json(nullptr);
    j["precision"] = cfg.precision;
    j["strict_deterministic"] = cfg.strict_deterministic;
    return j;
}

TrainConfig train_config_from_json(const json& j, const std::string& path) {
    TrainConfig cfg;
    FieldReader r(j, path);
    if (r.has("encoder")) cfg.encoder = encoder_from_json(r.at("encoder"), r.field("encoder"));
    if (r.has("predictor")) {
        FieldReader pr(r.at("predictor"), r.field("predictor"));
        pr.read("hidden_dim", cfg.predictor.hidden_dim);
        pr.read("embed_dim", cfg.predictor.embed_dim);
        pr.finish();
    }
    if (r.has("norm")) {
        FieldReader nr(r.at("norm"), r.field("norm"));
        nr.read("l2_eps", cfg.norm.l2_eps);
        nr.read("bn_eps", cfg.norm.bn_eps);
        nr.read("bn_momentum", cfg.norm.bn_momentum);
        nr.finish();
    }
    if (r.has("augment")) {
        auto& a = cfg.augment;
        FieldReader ar(r.at("augment"), r.field("augment"));
        read_range(ar, "crop_scale", a.crop_scale);
        read_range(ar, "aspect_ratio", a.aspect_ratio);
        ar.read("output_size", a.output_size);
        ar.read("hflip_prob", a.hflip_prob);
        ar.read("jitter_prob", a.jitter_prob);
        if (ar.has("jitter")) {
            FieldReader jr(ar.at("jitter"), ar.field("jitter"));
            jr.read("brightness", a.jitter.brightness);
            jr.read("contrast", a.jitter.contrast);
            jr.read("saturation", a.jitter.saturation);
            jr.read("hue", a.jitter.hue);
            jr.finish();
        }
        ar.read("grayscale_prob", a.grayscale_prob);
        ar.read("blur_prob", a.blur_prob);
        read_range(ar, "blur_sigma", a.blur_sigma);
        ar.read("seed", a.seed);
        ar.finish();
    }
    r.read("lambda", cfg.lambda);
    if (r.has("lambda_mix")) {
        FieldReader lr(r.at("lambda_mix"), r.field("lambda_mix"));
        std::string policy = policy_name(cfg.lambda_mix.kind);
        lr.read("policy", policy);
        if (policy == "fixed") {
            cfg.lambda_mix.kind = augment::LambdaMixPolicy::Kind::Fixed;
        } else if (policy == "beta") {
            cfg.lambda_mix.kind = augment::LambdaMixPolicy::Kind::Beta;
        } else if (policy == "pick_one_view") {
            cfg.lambda_mix.kind = augment::LambdaMixPolicy::Kind::PickOneView;
        } else {
            throw ConfigError(lr.field("policy") + ": expected fixed, beta or pick_one_view");
        }
        lr.read("value", cfg.lambda_mix.value);
        lr.read("alpha", cfg.lambda_mix.alpha);
        lr.finish();
    }
    if (r.has("aggregation")) {
        FieldReader gr(r.at("aggregation"), r.field("aggregation"));
        std::string kind = loss::to_string(cfg.aggregation.kind);
        std::string none_policy = "always_first";
        gr.read("kind", kind);
        gr.read("none_policy", none_policy);
        gr.finish();
        try {
            cfg.aggregation.kind = loss::aggregation_from_string(kind);
        } catch (const ConfigError& e) {
            throw ConfigError(gr.field("kind") + ": " + e.what());
        }
        if (none_policy == "always_first") {
            cfg.aggregation.none_policy = loss::NoneBranchPolicy::AlwaysFirst;
        } else if (none_policy == "seeded_random") {
            cfg.aggregation.none_policy = loss::NoneBranchPolicy::SeededRandom;
        } else {
            throw ConfigError(gr.field("none_policy") + ": expected always_first or seeded_random");
        }
    }
    r.read("mixture", cfg.mixture);
    r.read("stop_gradient", cfg.stop_gradient);
    std::string objective = cfg.objective == Objective::MixSiam ? "mixsiam" : "simsiam";
    r.read("objective", objective);
    if (objective == "mixsiam") {
        cfg.objective = Objective::MixSiam;
    } else if (objective == "simsiam") {
        cfg.objective = Objective::SimSiam;
    } else {
        throw ConfigError(r.field("objective") + ": expected mixsiam or simsiam");
    }
    r.read("lr_base", cfg.lr_base);
    r.read("lr_batch_scaling", cfg.lr_batch_scaling);
    r.read("lr_reference_batch", cfg.lr_reference_batch);
    r.read("momentum", cfg.momentum);
    r.read("weight_decay", cfg.weight_decay);
    r.read("batch_size", cfg.batch_size);
    r.read("epochs", cfg.epochs);
    r.read("seed", cfg.seed);
    if (r.has("data_seed")) {
        std::uint64_t s = 0;
        r.read("data_seed", s);
        cfg.data_seed = s;
    }
    r.read("precision", cfg.precision);
    r.read("strict_deterministic", cfg.strict_deterministic);
    r.finish();
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        if (msg.rfind("train.", 0) == 0) throw ConfigError(path + msg.substr(5));
        throw ConfigError(path + ": " + msg);
    }
    return cfg;
}

std::uint64_t config_hash(const TrainConfig& cfg) {
    // Strict mode changes scheduling, never results, so it is left out.
    auto j = to_json(cfg);
    j.erase("strict_deterministic");
    return fnv1a(j.dump());
}

std::string hex(std::uint64_t value) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(value));
    return buf;
}

}  // namespace mixsiam::train
