#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mixsiam/core/error.hpp"
#include "mixsiam/data/synthetic.hpp"
#include "mixsiam/train/config.hpp"
#include "mixsiam/train/optimizer.hpp"
#include "mixsiam/train/trainer.hpp"
#include "test_support.hpp"

using namespace mixsiam;
using namespace mixsiam::train;
using mixsiam::testing::TempDir;
using mixsiam::testing::tiny_config;
using mixsiam::testing::tiny_dataset;
using nlohmann::json;

namespace {

std::string config_error(const std::function<void()>& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(CosineLr, Endpoints) {
    EXPECT_EQ(cosine_lr(0, 100, 0.05), 0.05);
    EXPECT_NEAR(cosine_lr(50, 100, 0.05), 0.025, 1e-17);
    EXPECT_EQ(cosine_lr(100, 100, 0.05), 0.0);
    for (std::size_t s = 1; s <= 100; ++s) EXPECT_LE(cosine_lr(s, 100, 1.0), cosine_lr(s - 1, 100, 1.0));
    EXPECT_NEAR(cosine_lr(25, 100, 2.0), 1.0 + std::cos(std::numbers::pi / 4), 1e-15);
    EXPECT_THROW(cosine_lr(101, 100, 0.05), PreconditionError);
    EXPECT_THROW(cosine_lr(0, 0, 0.05), PreconditionError);
}

TEST(Sgd, MatchesHandComputedUpdates) {
    model::ModelParams<double> params;
    params.add_param("layer.weight", ad::Tensor<double>::from({2}, {1.0, -2.0}, true));
    params.add_param("layer.bias", ad::Tensor<double>::from({1}, {0.5}, true));
    SgdMomentum<double> opt(0.9, 0.1);

    auto set_grad = [&](std::vector<double> gw, std::vector<double> gb) {
        auto w = params.param("layer.weight").mutable_grad();
        auto b = params.param("layer.bias").mutable_grad();
        std::copy(gw.begin(), gw.end(), w.begin());
        std::copy(gb.begin(), gb.end(), b.begin());
    };
    set_grad({0.2, 0.4}, {1.0});
    opt.step(params, 0.5);
    // weight: d = g + 0.1·p; buf = d; p -= 0.5·buf
    const double d0 = 0.2 + 0.1 * 1.0, d1 = 0.4 + 0.1 * -2.0;
    EXPECT_DOUBLE_EQ(params.param("layer.weight").at(0), 1.0 - 0.5 * d0);
    EXPECT_DOUBLE_EQ(params.param("layer.weight").at(1), -2.0 - 0.5 * d1);
    EXPECT_DOUBLE_EQ(params.param("layer.bias").at(0), 0.5 - 0.5 * 1.0);  // no decay on bias

    const double p0 = params.param("layer.weight").at(0);
    set_grad({0.0, 0.0}, {0.0});
    opt.step(params, 0.5);
    const double buf0 = 0.9 * d0 + 0.1 * p0;
    EXPECT_DOUBLE_EQ(params.param("layer.weight").at(0), p0 - 0.5 * buf0);
    EXPECT_DOUBLE_EQ(opt.buffers()[1][0], 0.9 * 1.0);
}

TEST(Sgd, MissingGradientCountsAsZero) {
    model::ModelParams<float> params;
    params.add_param("a.bias", ad::Tensor<float>::from({1}, {2.0f}, true));
    SgdMomentum<float> opt(0.9, 0.5);
    opt.step(params, 0.1f);
    EXPECT_EQ(params.param("a.bias").at(0), 2.0f);
}

TEST(Config, JsonRoundTripAndHash) {
    auto cfg = TrainConfig::small();
    cfg.lambda = 0.25;
    cfg.lambda_mix = {augment::LambdaMixPolicy::Kind::Beta, 0.5, 0.7};
    cfg.aggregation = {loss::Aggregation::None, loss::NoneBranchPolicy::SeededRandom};
    cfg.mixture = false;
    cfg.objective = Objective::SimSiam;
    cfg.data_seed = 99;
    cfg.augment.crop_scale = {0.3, 0.9};
    cfg.precision = 64;
    const auto j = to_json(cfg);
    const auto back = train_config_from_json(j);
    EXPECT_EQ(to_json(back), j);
    EXPECT_EQ(config_hash(back), config_hash(cfg));

    auto strict = cfg;
    strict.strict_deterministic = true;
    EXPECT_EQ(config_hash(strict), config_hash(cfg));
    auto other = cfg;
    other.lambda = 0.3;
    EXPECT_NE(config_hash(other), config_hash(cfg));
    EXPECT_EQ(hex(0xabcULL), "0x0000000000000abc");
}

TEST(Config, MissingFieldsKeepDefaults) {
    const auto cfg = train_config_from_json(json{{"lambda", 0.75}});
    EXPECT_EQ(cfg.lambda, 0.75);
    EXPECT_EQ(cfg.batch_size, TrainConfig{}.batch_size);
    EXPECT_FALSE(cfg.data_seed.has_value());
}

TEST(Config, ErrorsNameTheField) {
    EXPECT_NE(config_error([] { train_config_from_json(json{{"lambda", "x"}}); }).find("train.lambda"),
              std::string::npos);
    EXPECT_NE(config_error([] { train_config_from_json(json{{"augment", {{"hflip_prob", true}}}}); })
                  .find("train.augment.hflip_prob"),
              std::string::npos);
    EXPECT_NE(config_error([] { train_config_from_json(json{{"bogus", 1}}); }).find("train.bogus"), std::string::npos);
    EXPECT_NE(config_error([] { train_config_from_json(json{{"aggregation", {{"kind", "median"}}}}); })
                  .find("median"),
              std::string::npos);

    auto cfg = TrainConfig::small();
    cfg.augment.hflip_prob = 2.0;
    EXPECT_NE(config_error([&] { cfg.validate(); }).find("train.augment.hflip_prob"), std::string::npos);
    cfg = TrainConfig::small();
    cfg.lambda = -0.1;
    EXPECT_NE(config_error([&] { cfg.validate(); }).find("train.lambda"), std::string::npos);
    cfg = TrainConfig::small();
    cfg.batch_size = 1;
    EXPECT_NE(config_error([&] { cfg.validate(); }).find("train.batch_size"), std::string::npos);
    cfg = TrainConfig::small();
    cfg.predictor.embed_dim = 7;
    EXPECT_NE(config_error([&] { cfg.validate(); }).find("embed_dim"), std::string::npos);
    cfg = TrainConfig::small();
    cfg.precision = 16;
    EXPECT_FALSE(config_error([&] { cfg.validate(); }).empty());
}

TEST(Config, EffectiveSettings) {
    auto cfg = TrainConfig::small();
    EXPECT_EQ(cfg.effective_lr(), cfg.lr_base);
    cfg.lr_batch_scaling = true;
    cfg.batch_size = 256;
    EXPECT_EQ(cfg.effective_lr(), cfg.lr_base * 2.0);
    cfg.mixture = false;
    EXPECT_EQ(cfg.effective_lambda_mix().kind, augment::LambdaMixPolicy::Kind::PickOneView);
    EXPECT_EQ(cfg.shuffle_seed(), cfg.seed);
    cfg.data_seed = 4;
    EXPECT_EQ(cfg.shuffle_seed(), 4u);
    EXPECT_NO_THROW(TrainConfig::desk_default().validate());
    EXPECT_EQ(TrainConfig::desk_default().encoder.embed_dim(), 256u);
}

TEST(EmbeddingStd, MatchesDirectFormula) {
    Rng rng{3};
    std::vector<double> v(5 * 4);
    for (auto& x : v) x = rng.uniform(-1, 1);
    const auto z = ad::Tensor<double>::from({5, 4}, v);
    // normalize rows, population std per column, mean over columns
    std::vector<double> n = v;
    for (std::size_t r = 0; r < 5; ++r) {
        double s = 0;
        for (std::size_t c = 0; c < 4; ++c) s += v[r * 4 + c] * v[r * 4 + c];
        for (std::size_t c = 0; c < 4; ++c) n[r * 4 + c] = v[r * 4 + c] / std::sqrt(s);
    }
    double expected = 0;
    for (std::size_t c = 0; c < 4; ++c) {
        double m = 0, q = 0;
        for (std::size_t r = 0; r < 5; ++r) m += n[r * 4 + c];
        m /= 5;
        for (std::size_t r = 0; r < 5; ++r) q += (n[r * 4 + c] - m) * (n[r * 4 + c] - m);
        expected += std::sqrt(q / 5);
    }
    EXPECT_NEAR(embedding_std(z), expected / 4, 1e-14);
    // identical rows: collapsed
    const auto same = ad::Tensor<double>::from({3, 2}, {1, 2, 1, 2, 1, 2});
    EXPECT_EQ(embedding_std(same), 0.0);
}

TEST(TrainStep, UpdatesParametersAndReportsMetrics) {
    const auto cfg = tiny_config();
    const auto ds = tiny_dataset();
    auto state = initial_state<double>(cfg);
    const auto before = state.params.checksum();
    const std::vector<std::size_t> batch{0, 3, 6, 9};
    const auto m = train_step(state, ds, batch, cfg, 0.05, 0, 0);
    EXPECT_NE(state.params.checksum(), before);
    EXPECT_EQ(state.step, 1u);
    EXPECT_EQ(state.loss_tail.size(), 1u);
    EXPECT_GE(m.loss.l_siam, -1.0);
    EXPECT_LE(m.loss.l_siam, 1.0);
    EXPECT_EQ(m.loss.total, 0.5 * m.loss.l_siam + 0.5 * m.loss.l_mix);
    EXPECT_GT(m.grad_norm, 0.0);
    EXPECT_GT(m.embedding_std, 0.0);
    EXPECT_EQ(format_metrics_row(m).substr(0, 4), "0,0,");

    EXPECT_THROW(train_step(state, ds, std::vector<std::size_t>{1}, cfg, 0.05, 0, 1), DimensionError);
    EXPECT_THROW(train_step(state, ds, std::vector<std::size_t>{1, 500}, cfg, 0.05, 0, 1), DimensionError);
}

TEST(TrainStep, SimSiamObjectiveSkipsMixedBranch) {
    auto cfg = tiny_config();
    cfg.objective = Objective::SimSiam;
    const auto ds = tiny_dataset();
    auto state = initial_state<double>(cfg);
    const auto m = train_step(state, ds, std::vector<std::size_t>{0, 1, 2, 3}, cfg, 0.05, 0, 0);
    EXPECT_EQ(m.loss.l_mix, 0.0);
    EXPECT_EQ(m.loss.lambda, 1.0);
    EXPECT_EQ(m.loss.total, m.loss.l_siam);
}

TEST(TrainStep, NonFiniteParameterIsNamed) {
    const auto cfg = tiny_config();
    const auto ds = tiny_dataset();
    auto state = initial_state<double>(cfg);
    state.params.param("predictor.1.weight").mutable_data()[0] = std::nan("");
    try {
        train_step(state, ds, std::vector<std::size_t>{0, 1, 2, 3}, cfg, 0.05, 0, 0);
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("step 0"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("first offending parameter: "), std::string::npos) << e.what();
    }
    auto state2 = initial_state<double>(cfg);
    state2.params.param("projector.0.weight").mutable_data()[0] = INFINITY;
    EXPECT_THROW(train_step(state2, ds, std::vector<std::size_t>{0, 1, 2, 3}, cfg, 0.05, 0, 0), NumericError);
}

TEST(Run, WritesMetricsAndCheckpoints) {
    TempDir dir("run");
    auto cfg = tiny_config();
    const auto ds = tiny_dataset();  // 12 records → 3 steps per epoch
    std::size_t seen = 0;
    RunOptions opt;
    opt.out_dir = dir.path();
    opt.on_step = [&](const StepMetrics&) { ++seen; };
    const auto result = run(cfg, ds, opt);
    EXPECT_EQ(result.metrics.size(), 6u);
    EXPECT_EQ(seen, 6u);
    EXPECT_EQ(result.checkpoints.size(), 2u);
    EXPECT_TRUE(std::filesystem::exists(dir / "ckpt_epoch_1.bin"));
    EXPECT_TRUE(std::filesystem::exists(dir / "ckpt_epoch_2.bin"));
    EXPECT_EQ(result.final_checkpoint.step, 6u);
    EXPECT_EQ(result.metrics.back().lr, cosine_lr(5, 6, cfg.lr_base));

    const auto text = mixsiam::testing::slurp(result.metrics_path);
    std::istringstream lines(text);
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "# config_hash=" + hex(config_hash(cfg)));
    std::getline(lines, line);
    EXPECT_EQ(line, kMetricsHeader);
    std::size_t rows = 0;
    while (std::getline(lines, line)) ++rows;
    EXPECT_EQ(rows, 6u);
    EXPECT_TRUE(std::holds_alternative<model::ModelParams<float>>(result.model));
}

TEST(Run, DoublePrecisionRun) {
    TempDir dir("run64");
    auto cfg = tiny_config();
    cfg.precision = 64;
    RunOptions opt;
    opt.out_dir = dir.path();
    opt.write_checkpoints = false;
    const auto result = run(cfg, tiny_dataset(), opt);
    EXPECT_TRUE(std::holds_alternative<model::ModelParams<double>>(result.model));
    EXPECT_TRUE(result.checkpoints.empty());
}

TEST(Run, RejectsBadInputs) {
    TempDir dir("run_bad");
    RunOptions opt;
    opt.out_dir = dir.path();
    auto cfg = tiny_config();
    cfg.batch_size = 64;
    EXPECT_THROW(run(cfg, tiny_dataset(), opt), ConfigError);  // fewer records than one batch
    cfg = tiny_config();
    cfg.lambda = 3;
    EXPECT_THROW(run(cfg, tiny_dataset(), opt), ConfigError);
    cfg = tiny_config();
    opt.out_dir = "/proc/mixsiam_cannot_write_here";
    EXPECT_THROW(run(cfg, tiny_dataset(), opt), std::runtime_error);
}

// Smoke oracle from development runs: small preset, 300 synthetic images.
TEST(Run, SmallPresetTwentyEpochSmoke) {
    const auto cfg = TrainConfig::small();
    const auto ds = data::make_synthetic({});
    TempDir dir("smoke");
    RunOptions opt;
    opt.out_dir = dir.path();
    opt.write_checkpoints = false;
    const auto result = run(cfg, ds, opt);
    double final_total = 0.0, min_std = INFINITY;
    std::size_t n = 0;
    for (const auto& m : result.metrics) {
        min_std = std::min(min_std, m.embedding_std);
        if (m.epoch + 1 == cfg.epochs) final_total += m.loss.total, ++n;
    }
    final_total /= static_cast<double>(n);
    EXPECT_LT(final_total, -0.5);
    EXPECT_GT(min_std, 0.1);
}
