#include <gtest/gtest.h>

#include <set>

#include "mixsiam/core/error.hpp"
#include "mixsiam/model/model.hpp"
#include "test_support.hpp"

using namespace mixsiam;
using namespace mixsiam::model;
using mixsiam::testing::central_difference;
using mixsiam::testing::relative_error;

namespace {

EncoderSpec tiny_encoder() {
    EncoderSpec e;
    e.input_size = 8;
    e.stages = {{4, 2}, {6, 1}};
    e.projector = {8, 8, 8};
    return e;
}

Tensor<double> random_batch(std::size_t b, std::size_t c, std::size_t s, std::uint64_t seed) {
    Rng rng{seed};
    std::vector<double> v(b * c * s * s);
    for (auto& x : v) x = rng.uniform();
    return Tensor<double>::from({b, c, s, s}, std::move(v));
}

}  // namespace

TEST(Model, ShapesAndDimensions) {
    auto params = init<double>(tiny_encoder(), {4, 8}, 1);
    EXPECT_EQ(params.encoder_spec().backbone_dim(), 6u);
    const auto x = random_batch(3, 3, 8, 2);
    const auto z = encode(params, x, Mode::Train);
    EXPECT_EQ(z.shape(), (ad::Shape{3, 8}));
    EXPECT_EQ(predict(params, z, Mode::Train).shape(), (ad::Shape{3, 8}));
    EXPECT_EQ(backbone(params, x, Mode::Eval).shape(), (ad::Shape{3, 6}));
}

TEST(Model, FlatBackboneWhenNoStages) {
    EncoderSpec e;
    e.input_size = 4;
    e.stages.clear();
    e.projector = {5, 5, 6};
    EXPECT_EQ(e.backbone_dim(), 48u);
    auto params = init<double>(e, {3, 6}, 1);
    EXPECT_EQ(encode(params, random_batch(2, 3, 4, 3), Mode::Train).shape(), (ad::Shape{2, 6}));
}

TEST(Model, InitIsDeterministicAndBounded) {
    const auto a = init<float>(tiny_encoder(), {4, 8}, 5);
    const auto b = init<float>(tiny_encoder(), {4, 8}, 5);
    const auto c = init<float>(tiny_encoder(), {4, 8}, 6);
    EXPECT_EQ(a.checksum(), b.checksum());
    EXPECT_NE(a.checksum(), c.checksum());
    std::set<std::string> names;
    for (const auto& p : a.params()) {
        EXPECT_TRUE(names.insert(p.name).second) << p.name;
        EXPECT_TRUE(p.tensor.requires_grad());
        if (p.name.ends_with(".conv.weight")) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(p.tensor.dim(1) * 9));
            for (float v : p.tensor.data()) EXPECT_LE(std::abs(v), bound);
        }
        if (p.name.ends_with(".beta") || p.name.ends_with(".bias"))
            for (float v : p.tensor.data()) EXPECT_EQ(v, 0.0f);
        if (p.name.ends_with(".gamma"))
            for (float v : p.tensor.data()) EXPECT_EQ(v, 1.0f);
    }
    for (const auto& b : a.buffers()) EXPECT_FALSE(b.tensor.requires_grad());
}

TEST(Model, DecayAppliesToWeightsOnly) {
    EXPECT_TRUE(ModelParams<float>::decays("encoder.stage0.conv.weight"));
    EXPECT_TRUE(ModelParams<float>::decays("predictor.0.weight"));
    EXPECT_FALSE(ModelParams<float>::decays("predictor.1.bias"));
    EXPECT_FALSE(ModelParams<float>::decays("predictor.bn.gamma"));
    EXPECT_FALSE(ModelParams<float>::decays("predictor.bn.beta"));
}

TEST(Model, BranchesShareOneGradientBuffer) {
    auto params = init<double>(tiny_encoder(), {4, 8}, 7);
    const auto x1 = random_batch(2, 3, 8, 8), x2 = random_batch(2, 3, 8, 9);
    auto& w = params.param(params.params().front().name);

    sum(encode(params, x1, Mode::Train)).backward();
    const std::vector<double> g1(w.grad().begin(), w.grad().end());
    params.zero_grad();
    sum(encode(params, x2, Mode::Train)).backward();
    const std::vector<double> g2(w.grad().begin(), w.grad().end());
    params.zero_grad();
    ad::sum(ad::add(encode(params, x1, Mode::Train), encode(params, x2, Mode::Train))).backward();
    for (std::size_t i = 0; i < g1.size(); ++i) EXPECT_NEAR(w.grad()[i], g1[i] + g2[i], 1e-12);
}

TEST(Model, GradientsMatchFiniteDifferences) {
    auto encoder = tiny_encoder();
    encoder.residual = true;
    auto params = init<double>(encoder, {4, 8}, 10);
    const auto x = random_batch(4, 3, 8, 11);
    Rng wr{12};
    std::vector<double> w(32);
    for (auto& v : w) v = wr.uniform(-1, 1);
    const auto weights = Tensor<double>::from({4, 8}, w);
    auto f = [&] { return ad::sum(ad::mul(predict(params, encode(params, x, Mode::Train), Mode::Train), weights)); };
    params.zero_grad();
    f().backward();
    double worst = 0.0;
    for (auto& p : params.params()) {
        auto data = p.tensor.mutable_data();
        const std::vector<double> analytic(p.tensor.grad().begin(), p.tensor.grad().end());
        for (std::size_t j = 0; j < data.size(); ++j) {
            const double numeric = central_difference<double>([&] { return f().item(); }, data[j], 1e-6);
            const double e = relative_error(analytic[j], numeric, 1e-3);
            worst = std::max(worst, e);
        }
    }
    EXPECT_LT(worst, 1e-5);
}

TEST(Model, TrainModeNeedsTwoRowsEvalDoesNot) {
    auto params = init<double>(tiny_encoder(), {4, 8}, 13);
    const auto one = random_batch(1, 3, 8, 14);
    EXPECT_THROW(encode(params, one, Mode::Train), DimensionError);
    EXPECT_THROW(encode(params, one, Mode::TrainFrozenStats), DimensionError);
    EXPECT_NO_THROW(encode(params, one, Mode::Eval));
}

TEST(Model, OnlyTrainModeMovesRunningStats) {
    auto params = init<double>(tiny_encoder(), {4, 8}, 15);
    const auto x = random_batch(3, 3, 8, 16);
    const auto before = params.checksum();
    encode(params, x, Mode::Eval);
    encode(params, x, Mode::TrainFrozenStats);
    EXPECT_EQ(params.checksum(), before);
    encode(params, x, Mode::Train);
    EXPECT_NE(params.checksum(), before);
}

TEST(Model, CloneHasFreshStorage) {
    auto params = init<double>(tiny_encoder(), {4, 8}, 17);
    auto copy = params.clone();
    EXPECT_EQ(copy.checksum(), params.checksum());
    copy.params()[0].tensor.mutable_data()[0] += 1.0;
    EXPECT_NE(copy.checksum(), params.checksum());
    EXPECT_EQ(params.parameter_count(), copy.parameter_count());
}

TEST(Model, RejectsBadSpecsAndInputs) {
    EXPECT_THROW(init<double>(tiny_encoder(), {4, 16}, 1), ConfigError);
    EXPECT_THROW(init<double>(tiny_encoder(), {0, 8}, 1), ConfigError);
    auto params = init<double>(tiny_encoder(), {4, 8}, 1);
    EXPECT_THROW(encode(params, random_batch(2, 1, 8, 1), Mode::Train), DimensionError);
    EXPECT_THROW(predict(params, Tensor<double>::zeros({2, 5}), Mode::Train), DimensionError);
    EXPECT_THROW(params.param("nope"), std::out_of_range);
}
