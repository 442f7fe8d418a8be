#include <gtest/gtest.h>

#include <omp.h>

#include <algorithm>
#include <map>

#include "mixsiam/core/error.hpp"
#include "mixsiam/eval/eval.hpp"
#include "mixsiam/model/model.hpp"
#include "test_support.hpp"

using namespace mixsiam;
using namespace mixsiam::eval;

namespace {

FeatureSet random_features(std::size_t rows, std::size_t cols, std::size_t classes, std::uint64_t seed) {
    Rng rng{seed};
    FeatureSet f;
    f.rows = rows;
    f.cols = cols;
    f.values.resize(rows * cols);
    for (auto& v : f.values) v = rng.uniform(-1, 1);
    for (std::size_t i = 0; i < rows; ++i) f.labels.push_back(rng.below(classes));
    return f;
}

// Sort every neighbor by similarity, take the top k plus anything tied
// with the k-th, vote, smallest class wins a tie.
std::vector<std::size_t> brute_force_knn(const FeatureSet& train, const FeatureSet& test, std::size_t k) {
    auto unit = [](const double* v, std::size_t n) {
        double s = 0;
        for (std::size_t j = 0; j < n; ++j) s += v[j] * v[j];
        std::vector<double> out(v, v + n);
        s = std::sqrt(s);
        for (auto& x : out) x /= std::max(s, 1e-12);
        return out;
    };
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < test.rows; ++t) {
        const auto q = unit(test.row(t), test.cols);
        std::vector<std::pair<double, std::size_t>> sims;
        for (std::size_t i = 0; i < train.rows; ++i) {
            const auto r = unit(train.row(i), train.cols);
            double d = 0;
            for (std::size_t j = 0; j < train.cols; ++j) d += q[j] * r[j];
            sims.push_back({d, train.labels[i]});
        }
        std::sort(sims.begin(), sims.end(), [](auto& a, auto& b) { return a.first > b.first; });
        std::map<std::size_t, std::size_t> votes;
        for (std::size_t i = 0; i < sims.size(); ++i)
            if (i < k || sims[i].first >= sims[k - 1].first) ++votes[sims[i].second];
        std::size_t best = 0, best_votes = 0;
        for (auto [c, v] : votes)
            if (v > best_votes) best = c, best_votes = v;
        out.push_back(best);
    }
    return out;
}

}  // namespace

TEST(Knn, MatchesBruteForceOracle) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto train = random_features(60, 5, 4, seed);
        const auto test = random_features(25, 5, 4, 100 + seed);
        for (std::size_t k : {1, 3, 7, 20, 60}) {
            const auto r = knn_probe(train, test, k);
            ASSERT_EQ(r.predictions, brute_force_knn(train, test, k)) << seed << " k=" << k;
            std::size_t hits = 0;
            for (std::size_t i = 0; i < test.rows; ++i) hits += r.predictions[i] == test.labels[i];
            EXPECT_DOUBLE_EQ(r.top1, static_cast<double>(hits) / test.rows);
        }
    }
}

TEST(Knn, ThreadCountDoesNotChangePredictions) {
    const auto train = random_features(200, 8, 5, 1);
    const auto test = random_features(90, 8, 5, 2);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto one = knn_probe(train, test, 10);
    omp_set_num_threads(4);
    const auto four = knn_probe(train, test, 10);
    omp_set_num_threads(saved);
    EXPECT_EQ(one.predictions, four.predictions);
}

TEST(Knn, TiesAndDuplicates) {
    FeatureSet train;
    train.rows = 4;
    train.cols = 2;
    train.values = {1, 0, 2, 0, 0, 1, 0, 3};  // two class-1 rows along x, two class-0 rows along y
    train.labels = {1, 1, 0, 0};
    FeatureSet test;
    test.rows = 1;
    test.cols = 2;
    test.values = {1, 1};  // equidistant to all four
    test.labels = {0};
    // k=1: all four tie with the first, votes 2-2, smallest class wins
    EXPECT_EQ(knn_probe(train, test, 1).predictions[0], 0u);
    test.values = {5, 0};
    EXPECT_EQ(knn_probe(train, test, 2).predictions[0], 1u);
    EXPECT_EQ(knn_probe(train, test, 2).top1, 0.0);
}

TEST(Knn, PerClassAccuracy) {
    const auto train = random_features(50, 3, 3, 7);
    const auto test = random_features(40, 3, 3, 8);
    const auto r = knn_probe(train, test, 5);
    std::map<std::size_t, std::pair<int, int>> counts;
    for (std::size_t i = 0; i < test.rows; ++i) {
        counts[test.labels[i]].second++;
        counts[test.labels[i]].first += r.predictions[i] == test.labels[i];
    }
    ASSERT_EQ(r.per_class.size(), counts.size());
    for (auto [c, hc] : counts) EXPECT_DOUBLE_EQ(r.per_class.at(c), static_cast<double>(hc.first) / hc.second);
}

TEST(Knn, RejectsBadArguments) {
    const auto train = random_features(10, 3, 2, 1);
    EXPECT_THROW(knn_probe(train, random_features(5, 4, 2, 2), 3), DimensionError);
    EXPECT_THROW(knn_probe(train, random_features(5, 3, 2, 2), 0), ConfigError);
    EXPECT_THROW(knn_probe(train, random_features(5, 3, 2, 2), 11), ConfigError);
    EXPECT_ANY_THROW(knn_probe(FeatureSet{}, train, 1));
}

TEST(LinearProbe, SeparatesLinearlySeparableData) {
    // class = argmax of the first three coordinates
    auto make = [](std::size_t n, std::uint64_t seed) {
        auto f = random_features(n, 6, 3, seed);
        for (std::size_t i = 0; i < n; ++i) {
            const double* r = f.row(i);
            f.labels[i] = static_cast<std::size_t>(std::max_element(r, r + 3) - r);
        }
        return f;
    };
    const auto train = make(400, 1), test = make(200, 2);
    LinearProbeConfig cfg;
    cfg.epochs = 60;
    cfg.batch_size = 32;
    cfg.lr = 0.1;
    const auto r = linear_probe(train, test, cfg);
    EXPECT_GE(r.top1, 0.9);
    EXPECT_EQ(linear_probe(train, test, cfg).predictions, r.predictions);
}

TEST(LinearProbe, ConfigValidationAndJson) {
    LinearProbeConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 3;
    const auto back = linear_probe_config_from_json(to_json(cfg));
    EXPECT_EQ(to_json(back), to_json(cfg));
    EXPECT_THROW(linear_probe_config_from_json({{"lr", -1.0}}), ConfigError);
    EXPECT_THROW(linear_probe_config_from_json({{"what", 1}}), ConfigError);
}

TEST(FeatureStats, EmbeddingStd) {
    FeatureSet same;
    same.rows = 3;
    same.cols = 2;
    same.values = {1, 1, 2, 2, 3, 3};
    same.labels = {0, 0, 0};
    EXPECT_NEAR(embedding_std(same), 0.0, 1e-15);
    FeatureSet axes;
    axes.rows = 2;
    axes.cols = 2;
    axes.values = {1, 0, 0, 1};
    axes.labels = {0, 1};
    EXPECT_DOUBLE_EQ(embedding_std(axes), 0.5);
}

TEST(Features, ExtractionIsDeterministicAndShaped) {
    const auto cfg = mixsiam::testing::tiny_config();
    auto params = model::init<float>(cfg.encoder, cfg.predictor, 1);
    const auto ds = mixsiam::testing::tiny_dataset();
    const auto a = extract_features(params, ds, 5);
    const auto b = extract_features(params, ds, 12);
    EXPECT_EQ(a.rows, ds.size());
    EXPECT_EQ(a.cols, cfg.encoder.embed_dim());
    EXPECT_EQ(a.values, b.values);  // eval mode: rows do not interact
    EXPECT_EQ(a.labels, ds.labels());
    const auto px = pixel_features(ds);
    EXPECT_EQ(px.cols, 3u * 8 * 8);
    EXPECT_EQ(px.values[0], ds.records[0].pixels.pixels[0]);
}

TEST(Report, JsonAndCsv) {
    mixsiam::testing::TempDir dir("report");
    EvalReport r;
    r.knn_top1 = 0.75;
    r.linear_top1 = 0.5;
    r.per_class_accuracy = {{0, 1.0}, {1, 0.5}};
    r.config_hash = "0x01";
    write_report(r, dir / "r.json");
    write_per_class_csv(r, dir / "c.csv");
    const auto j = nlohmann::json::parse(mixsiam::testing::slurp(dir / "r.json"));
    EXPECT_EQ(j.at("knn_top1").get<double>(), 0.75);
    EXPECT_EQ(j.at("config_hash").get<std::string>(), "0x01");
    EXPECT_EQ(mixsiam::testing::slurp(dir / "c.csv").substr(0, 21), "class,knn_accuracy\n0,");
}
