#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <regex>

#include "mixsiam/cli/commands.hpp"
#include "mixsiam/cli/experiment.hpp"
#include "mixsiam/core/error.hpp"
#include "mixsiam/train/checkpoint.hpp"
#include "test_support.hpp"

using namespace mixsiam;
using namespace mixsiam::cli;
using mixsiam::testing::slurp;
using mixsiam::testing::TempDir;
using nlohmann::json;

namespace {

json tiny_experiment() {
    const auto train = train::to_json(mixsiam::testing::tiny_config());
    return {{"train", {{"encoder", train["encoder"]},
                       {"predictor", train["predictor"]},
                       {"augment", {{"output_size", 8}}},
                       {"batch_size", 4},
                       {"epochs", 1}}},
            {"data", {{"synthetic", {{"per_class", 4}, {"size", 8}}}, {"test_per_class", 3}}},
            {"eval", {{"knn_k", 3}, {"linear", {{"epochs", 3}}}}}};
}

void write_json(const std::filesystem::path& p, const json& j) { std::ofstream(p) << j.dump(2); }

int run_binary(const std::string& args) {
    const std::string cmd = std::string(MIXSIAM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> data_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') out.push_back(line);
    return out;
}

}  // namespace

TEST(ExperimentConfig, JsonRoundTripAndPresetMerge) {
    const auto cfg = experiment_from_json(tiny_experiment());
    EXPECT_EQ(cfg.train.batch_size, 4u);
    EXPECT_EQ(cfg.train.lr_base, train::TrainConfig::small().lr_base);  // untouched keys keep the preset
    EXPECT_EQ(cfg.data.synthetic.per_class, 4u);
    EXPECT_EQ(cfg.eval.linear.epochs, 3u);
    const auto back = experiment_from_json(to_json(cfg));
    EXPECT_EQ(to_json(back), to_json(cfg));
    EXPECT_EQ(experiment_hash(back), experiment_hash(cfg));
    auto strict = cfg;
    strict.train.strict_deterministic = true;
    EXPECT_EQ(experiment_hash(strict), experiment_hash(cfg));
    EXPECT_NO_THROW(ExperimentConfig{}.validate());
}

TEST(ExperimentConfig, ErrorsNameThePath) {
    auto j = tiny_experiment();
    j["data"]["synthetic"]["classes"] = 1;
    try {
        experiment_from_json(j);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("config.data"), std::string::npos) << e.what();
    }
    j = tiny_experiment();
    j["eval"]["extra"] = true;
    EXPECT_THROW(experiment_from_json(j), ConfigError);
    j = tiny_experiment();
    j["data"]["kind"] = "imagenet";
    EXPECT_THROW(experiment_from_json(j), ConfigError);
    EXPECT_THROW(read_json_file("/nonexistent/config.json"), ConfigError);
    TempDir dir("cfg_bad");
    std::ofstream(dir / "bad.json") << "{ not json";
    EXPECT_THROW(read_json_file(dir / "bad.json"), ConfigError);
}

TEST(GridSpecs, Validation) {
    json g{{"base", tiny_experiment()}, {"aggregations", {"maximum", "none"}}, {"mixtures", {"mixture"}}, {"repeats", 2}};
    const auto grid = ablation_grid_from_json(g);
    EXPECT_EQ(grid.aggregations.size(), 2u);
    EXPECT_EQ(grid.repeats, 2u);
    g["aggregations"] = {"median"};
    EXPECT_THROW(ablation_grid_from_json(g), ConfigError);
    g["aggregations"] = {"maximum"};
    g["mixtures"] = {"both"};
    EXPECT_THROW(ablation_grid_from_json(g), ConfigError);

    json s{{"base", tiny_experiment()}, {"lambda_values", {0.0, 0.5, 1.0}}};
    EXPECT_EQ(sweep_spec_from_json(s).lambda_values.size(), 3u);
    s["lambda_values"] = {0.5, 0.25};
    EXPECT_THROW(sweep_spec_from_json(s), ConfigError);
    s["lambda_values"] = {0.5, 0.5};
    EXPECT_THROW(sweep_spec_from_json(s), ConfigError);
    s["lambda_values"] = {0.0, 1.5};
    EXPECT_THROW(sweep_spec_from_json(s), ConfigError);
}

TEST(CellSeeds, DistinctAndStable) {
    const auto a = cell_seed(0, cell_id("maximum+mixture"), 0);
    EXPECT_EQ(a, cell_seed(0, cell_id("maximum+mixture"), 0));
    EXPECT_NE(a, cell_seed(0, cell_id("maximum+mixture"), 1));
    EXPECT_NE(a, cell_seed(0, cell_id("average+mixture"), 0));
    EXPECT_NE(a, cell_seed(1, cell_id("maximum+mixture"), 0));
}

TEST(Commands, TrainThenEvaluateCheckpoint) {
    TempDir dir("cli_train");
    const auto cfg = experiment_from_json(tiny_experiment());
    const auto outcome = train_experiment(cfg, dir / "run");
    for (const char* f : {"config.json", "metrics.csv", "report.json", "per_class.csv", "ckpt_epoch_1.bin"})
        EXPECT_TRUE(std::filesystem::exists(dir / "run" / f)) << f;
    const auto report = json::parse(slurp(dir / "run" / "report.json"));
    EXPECT_EQ(report.at("config_hash").get<std::string>(), train::hex(experiment_hash(cfg)));
    EXPECT_EQ(report.at("knn_top1").get<double>(), outcome.report.knn_top1);

    const auto again = evaluate_checkpoint(cfg, dir / "run" / "ckpt_epoch_1.bin", dir / "eval");
    EXPECT_EQ(again.knn_top1, outcome.report.knn_top1);
    EXPECT_EQ(again.linear_top1, outcome.report.linear_top1);
}

TEST(Commands, AblationWritesTableWithReferences) {
    TempDir dir("cli_ablate");
    AblationGrid grid;
    grid.base = experiment_from_json(tiny_experiment());
    grid.repeats = 2;
    grid.share_data_order = true;
    const auto result = run_ablation(grid, dir.path());
    ASSERT_EQ(result.cells.size(), 6u);
    ASSERT_EQ(result.runs.size(), 12u);
    for (const auto& c : result.cells) {
        EXPECT_EQ(c.runs, 2u);
        EXPECT_EQ(c.failed, 0u);
    }
    EXPECT_EQ(*result.cells[0].reference, 93.35);
    const auto rows = data_lines(slurp(dir / "ablation.csv"));
    ASSERT_EQ(rows.size(), 7u);
    EXPECT_EQ(rows[0].substr(0, 28), "cell,aggregation,mixture,run");
    EXPECT_NE(rows[1].find("maximum+mixture"), std::string::npos);
    EXPECT_NE(rows[1].find("93.35"), std::string::npos);
    const auto table = slurp(dir / "ablation.txt");
    EXPECT_NE(table.find("±"), std::string::npos);
    EXPECT_NE(table.find("reported, not asserted"), std::string::npos);
    EXPECT_NE(table.find("published_reference"), std::string::npos);
    EXPECT_EQ(data_lines(slurp(dir / "ablation_runs.csv")).size(), 13u);

    // Cell seeds differ, so repeats are independent runs.
    EXPECT_NE(result.runs[0].seed, result.runs[1].seed);
}

TEST(Commands, SweepWritesSortedCsvAndSvg) {
    TempDir dir("cli_sweep");
    SweepSpec spec;
    spec.base = experiment_from_json(tiny_experiment());
    spec.lambda_values = {0.0, 0.5, 1.0};
    const auto result = run_sweep(spec, dir.path());
    ASSERT_EQ(result.grid.cells.size(), 3u);
    const auto rows = data_lines(slurp(dir / "sweep.csv"));
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[1].substr(0, 2), "0,");
    EXPECT_EQ(rows[3].substr(0, 2), "1,");
    const auto svg = slurp(dir / "sweep.svg");
    std::smatch m;
    ASSERT_TRUE(std::regex_search(svg, m, std::regex("points=\"([^\"]*)\"")));
    const std::string points = m[1].str();
    EXPECT_EQ(std::count(points.begin(), points.end(), ','), 3);
    EXPECT_NE(svg.find("23.76"), std::string::npos);
}

TEST(Commands, DumpViewsWritesContactSheets) {
    TempDir dir("cli_views");
    const auto cfg = experiment_from_json(tiny_experiment());
    const auto files = dump_views(cfg, 3, dir.path());
    ASSERT_EQ(files.size(), 3u);
    const auto bytes = slurp(files[0]);
    EXPECT_EQ(bytes.substr(0, 3), "P6\n");
    EXPECT_NE(bytes.find("# config_hash=" + train::hex(experiment_hash(cfg))), std::string::npos);
    EXPECT_NE(bytes.find("\n32 8\n255\n"), std::string::npos);
    EXPECT_EQ(bytes.size() - (bytes.rfind("255\n") + 4), 32u * 8 * 3);
    EXPECT_THROW(dump_views(cfg, 0, dir.path()), ConfigError);
    EXPECT_THROW(dump_views(cfg, 1000, dir.path()), ConfigError);
}

TEST(Binary, ExitCodes) {
    TempDir dir("cli_exit");
    write_json(dir / "exp.json", tiny_experiment());
    const std::string out = " --out " + (dir / "out").string();
    EXPECT_EQ(run_binary("train --config " + (dir / "exp.json").string() + out), 0);
    EXPECT_EQ(run_binary("train --config " + (dir / "exp.json").string() + out + " --seed 3 --strict-deterministic"), 0);
    EXPECT_EQ(run_binary("eval --checkpoint " + (dir / "out" / "ckpt_epoch_1.bin").string() + " --config " +
                         (dir / "exp.json").string() + out),
              0);
    EXPECT_EQ(run_binary("dump-views --n-images 2 --config " + (dir / "exp.json").string() + out), 0);

    EXPECT_EQ(run_binary(""), 2);
    EXPECT_EQ(run_binary("frobnicate"), 2);
    EXPECT_EQ(run_binary("train"), 2);
    EXPECT_EQ(run_binary("train --config " + (dir / "missing.json").string()), 2);
    auto bad = tiny_experiment();
    bad["train"]["lambda"] = 4;
    write_json(dir / "bad.json", bad);
    EXPECT_EQ(run_binary("train --config " + (dir / "bad.json").string() + out), 2);

    // runtime failures
    EXPECT_EQ(run_binary("eval --checkpoint " + (dir / "exp.json").string() + out), 1);
    auto cifar = tiny_experiment();
    cifar["data"] = {{"kind", "cifar10"}, {"cifar_dir", (dir / "nowhere").string()}};
    cifar["train"]["encoder"]["input_size"] = 32;
    cifar["train"]["augment"]["output_size"] = 32;
    write_json(dir / "cifar.json", cifar);
    EXPECT_EQ(run_binary("train --config " + (dir / "cifar.json").string() + out), 1);

    // resume with a changed config needs the override
    auto changed = tiny_experiment();
    changed["train"]["lr_base"] = 0.01;
    write_json(dir / "changed.json", changed);
    const std::string resume = " --resume " + (dir / "out" / "ckpt_epoch_1.bin").string();
    EXPECT_EQ(run_binary("train --config " + (dir / "changed.json").string() + out + "2" + resume), 2);
    EXPECT_EQ(run_binary("train --config " + (dir / "changed.json").string() + out + "2" + resume +
                         " --ignore-config-hash"),
              0);
}

TEST(Binary, SeedFlagOverridesConfig) {
    TempDir dir("cli_seed");
    write_json(dir / "exp.json", tiny_experiment());
    const std::string base = "train --config " + (dir / "exp.json").string();
    ASSERT_EQ(run_binary(base + " --out " + (dir / "a").string() + " --seed 5"), 0);
    ASSERT_EQ(run_binary(base + " --out " + (dir / "b").string() + " --seed 5"), 0);
    ASSERT_EQ(run_binary(base + " --out " + (dir / "c").string() + " --seed 6"), 0);
    EXPECT_EQ(slurp(dir / "a" / "metrics.csv"), slurp(dir / "b" / "metrics.csv"));
    EXPECT_NE(slurp(dir / "a" / "metrics.csv"), slurp(dir / "c" / "metrics.csv"));
    const auto cfg = json::parse(slurp(dir / "a" / "config.json"));
    EXPECT_EQ(cfg["train"]["seed"].get<std::uint64_t>(), 5u);
}

TEST(Configs, ShippedExamplesParse) {
    std::size_t seen = 0;
    for (const auto& entry : std::filesystem::directory_iterator(MIXSIAM_CONFIG_DIR)) {
        const auto j = cli::read_json_file(entry.path());
        const auto name = entry.path().filename().string();
        SCOPED_TRACE(name);
        if (name == "ablation.json") {
            EXPECT_NO_THROW(cli::ablation_grid_from_json(j));
        } else if (name == "sweep.json") {
            EXPECT_NO_THROW(cli::sweep_spec_from_json(j));
        } else {
            EXPECT_NO_THROW(cli::experiment_from_json(j));
        }
        ++seen;
    }
    EXPECT_GE(seen, 5u);
}
