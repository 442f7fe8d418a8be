#include "mixsiam/cli/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "mixsiam/core/error.hpp"
#include "mixsiam/core/json_fields.hpp"
#include "mixsiam/core/rng.hpp"
#include "mixsiam/data/cifar10.hpp"

namespace mixsiam::cli {

using nlohmann::json;

namespace {

constexpr std::uint64_t kCellSeedTag = 0x43454c4cULL;

data::Dataset first_n(data::Dataset ds, std::size_t limit) {
    if (limit != 0 && limit < ds.records.size()) ds.records.resize(limit);
    return ds;
}

// Re-throws a validation error whose message starts with `root.` so that it
// names the full field path instead.
template <typename F>
void validate_in(const std::string& root, const std::string& path, F&& check) {
    try {
        check();
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        if (msg.rfind(root + ".", 0) == 0) throw ConfigError(path + msg.substr(root.size()));
        throw ConfigError(path + ": " + msg);
    }
}

}  // namespace

void DataConfig::validate() const {
    if (kind == Kind::Synthetic) {
        synthetic.validate();
        if (test_per_class < 1) throw ConfigError("data.test_per_class must be at least 1");
    } else if (cifar_dir.empty()) {
        throw ConfigError("data.cifar_dir is required for kind cifar10");
    }
}

Datasets load_datasets(const DataConfig& cfg) {
    cfg.validate();
    Datasets out;
    if (cfg.kind == DataConfig::Kind::Synthetic) {
        out.train = data::make_synthetic(cfg.synthetic);
        data::SyntheticConfig test = cfg.synthetic;
        test.per_class = cfg.test_per_class;
        test.seed = cfg.test_seed;
        out.test = data::make_synthetic(test);
        out.test.name = "synthetic-test";
    } else {
        out.train = data::load_cifar10(cfg.cifar_dir, data::Split::Train);
        out.test = data::load_cifar10(cfg.cifar_dir, data::Split::Test);
    }
    out.train = first_n(std::move(out.train), cfg.train_limit);
    out.test = first_n(std::move(out.test), cfg.test_limit);
    return out;
}

void ExperimentConfig::validate() const {
    train.validate();
    data.validate();
    eval.linear.validate();
    if (eval.knn_k < 1) throw ConfigError("eval.knn_k must be at least 1");
}

json to_json(const DataConfig& cfg) {
    json j;
    j["kind"] = cfg.kind == DataConfig::Kind::Synthetic ? "synthetic" : "cifar10";
    j["synthetic"] = {{"classes", cfg.synthetic.classes},
                      {"per_class", cfg.synthetic.per_class},
                      {"size", cfg.synthetic.size},
                      {"seed", cfg.synthetic.seed},
                      {"noise", cfg.synthetic.noise}};
    j["test_per_class"] = cfg.test_per_class;
    j["test_seed"] = cfg.test_seed;
    j["cifar_dir"] = cfg.cifar_dir.string();
    j["train_limit"] = cfg.train_limit;
    j["test_limit"] = cfg.test_limit;
    return j;
}

json to_json(const eval::EvalConfig& cfg) {
    return {{"knn_k", cfg.knn_k}, {"linear", eval::to_json(cfg.linear)}, {"run_linear", cfg.run_linear}};
}

json to_json(const ExperimentConfig& cfg) {
    return {{"train", train::to_json(cfg.train)}, {"data", to_json(cfg.data)}, {"eval", to_json(cfg.eval)}};
}

ExperimentConfig experiment_from_json(const json& j, const std::string& path) {
    ExperimentConfig cfg;
    FieldReader r(j, path);
    if (r.has("train")) {
        // Fields absent from the file keep the small-preset values.
        json merged = train::to_json(cfg.train);
        const json& given = r.at("train");
        if (!given.is_object()) throw ConfigError(r.field("train") + ": expected an object");
        merged.merge_patch(given);
        // merge_patch drops keys set to null; unknown keys still reach the reader.
        cfg.train = train::train_config_from_json(merged, r.field("train"));
    }
    if (r.has("data")) {
        auto& d = cfg.data;
        FieldReader dr(r.at("data"), r.field("data"));
        std::string kind = "synthetic";
        dr.read("kind", kind);
        if (kind == "synthetic") {
            d.kind = DataConfig::Kind::Synthetic;
        } else if (kind == "cifar10") {
            d.kind = DataConfig::Kind::Cifar10;
        } else {
            throw ConfigError(dr.field("kind") + ": expected synthetic or cifar10");
        }
        if (dr.has("synthetic")) {
            FieldReader sr(dr.at("synthetic"), dr.field("synthetic"));
            sr.read("classes", d.synthetic.classes);
            sr.read("per_class", d.synthetic.per_class);
            sr.read("size", d.synthetic.size);
            sr.read("seed", d.synthetic.seed);
            sr.read("noise", d.synthetic.noise);
            sr.finish();
        }
        dr.read("test_per_class", d.test_per_class);
        dr.read("test_seed", d.test_seed);
        std::string dir;
        dr.read("cifar_dir", dir);
        d.cifar_dir = dir;
        dr.read("train_limit", d.train_limit);
        dr.read("test_limit", d.test_limit);
        dr.finish();
        validate_in("data", r.field("data"), [&] { d.validate(); });
    }
    if (r.has("eval")) {
        FieldReader er(r.at("eval"), r.field("eval"));
        er.read("knn_k", cfg.eval.knn_k);
        er.read("run_linear", cfg.eval.run_linear);
        if (er.has("linear")) cfg.eval.linear = eval::linear_probe_config_from_json(er.at("linear"), er.field("linear"));
        er.finish();
        if (cfg.eval.knn_k < 1) throw ConfigError(er.field("knn_k") + ": must be at least 1");
    }
    r.finish();
    return cfg;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": invalid JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
    return experiment_from_json(read_json_file(path), "config");
}

std::uint64_t experiment_hash(const ExperimentConfig& cfg) {
    json j = to_json(cfg);
    j["train"].erase("strict_deterministic");
    return fnv1a(j.dump());
}

void AblationGrid::validate() const {
    base.validate();
    if (aggregations.empty()) throw ConfigError("grid.aggregations must not be empty");
    if (mixtures.empty()) throw ConfigError("grid.mixtures must not be empty");
    if (repeats < 1) throw ConfigError("grid.repeats must be at least 1");
}

AblationGrid ablation_grid_from_json(const json& j, const std::string& path) {
    AblationGrid grid;
    FieldReader r(j, path);
    if (r.has("base")) grid.base = experiment_from_json(r.at("base"), r.field("base"));
    if (r.has("aggregations")) {
        const json& a = r.at("aggregations");
        if (!a.is_array()) throw ConfigError(r.field("aggregations") + ": expected an array");
        grid.aggregations.clear();
        for (const auto& v : a) {
            if (!v.is_string()) throw ConfigError(r.field("aggregations") + ": entries must be strings");
            try {
                grid.aggregations.push_back(loss::aggregation_from_string(v.get<std::string>()));
            } catch (const ConfigError& e) {
                throw ConfigError(r.field("aggregations") + ": " + e.what());
            }
        }
    }
    if (r.has("mixtures")) {
        const json& m = r.at("mixtures");
        if (!m.is_array()) throw ConfigError(r.field("mixtures") + ": expected an array");
        grid.mixtures.clear();
        for (const auto& v : m) {
            const std::string name = v.is_string() ? v.get<std::string>() : "";
            if (name == "mixture") {
                grid.mixtures.push_back(true);
            } else if (name == "no_mixture") {
                grid.mixtures.push_back(false);
            } else {
                throw ConfigError(r.field("mixtures") + ": entries must be \"mixture\" or \"no_mixture\"");
            }
        }
    }
    r.read("repeats", grid.repeats);
    r.read("share_data_order", grid.share_data_order);
    r.finish();
    validate_in("grid", path, [&] { grid.validate(); });
    return grid;
}

json to_json(const AblationGrid& grid) {
    json aggs = json::array(), mixes = json::array();
    for (auto a : grid.aggregations) aggs.push_back(loss::to_string(a));
    for (bool m : grid.mixtures) mixes.push_back(m ? "mixture" : "no_mixture");
    return {{"base", to_json(grid.base)},
            {"aggregations", aggs},
            {"mixtures", mixes},
            {"repeats", grid.repeats},
            {"share_data_order", grid.share_data_order}};
}

void SweepSpec::validate() const {
    base.validate();
    if (lambda_values.empty()) throw ConfigError("sweep.lambda_values must not be empty");
    for (std::size_t i = 0; i < lambda_values.size(); ++i) {
        const double v = lambda_values[i];
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("sweep.lambda_values: " + std::to_string(v) + " is outside [0, 1]");
        if (i > 0 && !(lambda_values[i - 1] < v)) {
            throw ConfigError("sweep.lambda_values must be unique and sorted ascending");
        }
    }
    if (repeats < 1) throw ConfigError("sweep.repeats must be at least 1");
}

SweepSpec sweep_spec_from_json(const json& j, const std::string& path) {
    SweepSpec spec;
    FieldReader r(j, path);
    if (r.has("base")) spec.base = experiment_from_json(r.at("base"), r.field("base"));
    r.read("lambda_values", spec.lambda_values);
    r.read("repeats", spec.repeats);
    r.read("share_data_order", spec.share_data_order);
    r.finish();
    validate_in("sweep", path, [&] { spec.validate(); });
    return spec;
}

json to_json(const SweepSpec& spec) {
    return {{"base", to_json(spec.base)},
            {"lambda_values", spec.lambda_values},
            {"repeats", spec.repeats},
            {"share_data_order", spec.share_data_order}};
}

std::uint64_t cell_id(const std::string& cell_name) { return fnv1a(cell_name); }

std::uint64_t cell_seed(std::uint64_t base_seed, std::uint64_t id, std::size_t repeat) {
    return hash_words({base_seed, id, static_cast<std::uint64_t>(repeat), kCellSeedTag});
}

}  // namespace mixsiam::cli
