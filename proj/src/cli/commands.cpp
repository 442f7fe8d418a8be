#include "mixsiam/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mixsiam/augment/augment.hpp"
#include "mixsiam/core/error.hpp"
#include "mixsiam/core/rng.hpp"
#include "mixsiam/kernels/parallel.hpp"

namespace mixsiam::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDataOrderTag = 0x4f524445ULL;
constexpr std::uint64_t kViewSampleTag = 0x56494557ULL;

std::string fmt(double v, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text) || !out.flush()) throw std::runtime_error("cannot write " + path.string());
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

template <typename T>
eval::EvalReport evaluate_any(train::AnyModel& model, const Datasets& data, const eval::EvalConfig& cfg) {
    return eval::evaluate(std::get<model::ModelParams<T>>(model), data.train, data.test, cfg);
}

eval::EvalReport evaluate_model(train::AnyModel& model, const Datasets& data, const eval::EvalConfig& cfg) {
    if (std::holds_alternative<model::ModelParams<double>>(model)) return evaluate_any<double>(model, data, cfg);
    return evaluate_any<float>(model, data, cfg);
}

void finish_report(eval::EvalReport& report, const ExperimentConfig& cfg, const fs::path& out_dir) {
    report.config_hash = train::hex(experiment_hash(cfg));
    report.config = to_json(cfg);
    eval::write_report(report, out_dir / "report.json");
    eval::write_per_class_csv(report, out_dir / "per_class.csv");
}

std::vector<CellSummary> summarize(const std::vector<std::string>& cell_names, const std::vector<CellRun>& runs) {
    std::vector<CellSummary> out;
    for (const auto& name : cell_names) {
        CellSummary s;
        s.cell = name;
        std::vector<double> knn, lin;
        for (const auto& r : runs) {
            if (r.cell != name) continue;
            ++s.runs;
            if (!r.ok) {
                ++s.failed;
                continue;
            }
            knn.push_back(r.knn_top1);
            lin.push_back(r.linear_top1);
        }
        std::tie(s.knn_mean, s.knn_std) = mean_std(knn);
        std::tie(s.linear_mean, s.linear_std) = mean_std(lin);
        out.push_back(s);
    }
    return out;
}

struct Cell {
    std::string name;
    ExperimentConfig cfg;
};

// Trains every (cell, repeat) pair; a failing run is recorded and skipped.
std::vector<CellRun> run_cells(const std::vector<Cell>& cells, std::size_t repeats, bool share_data_order,
                               const fs::path& out_dir) {
    std::vector<CellRun> runs;
    for (const auto& cell : cells) {
        for (std::size_t rep = 0; rep < repeats; ++rep) {
            ExperimentConfig cfg = cell.cfg;
            const std::uint64_t base_seed = cfg.train.seed;
            CellRun run;
            run.cell = cell.name;
            run.repeat = rep;
            run.seed = cell_seed(base_seed, cell_id(cell.name), rep);
            cfg.train.seed = run.seed;
            if (share_data_order) cfg.train.data_seed = hash_words({base_seed, rep, kDataOrderTag});
            const fs::path dir = out_dir / "runs" / (cell.name + "_r" + std::to_string(rep));
            try {
                ensure_dir(dir);
                const auto outcome = train_experiment(cfg, dir, std::nullopt, false, false);
                run.ok = true;
                run.knn_top1 = outcome.report.knn_top1;
                run.linear_top1 = outcome.report.linear_top1;
            } catch (const std::exception& e) {
                run.error = e.what();
                std::cerr << "mixsiam: cell " << cell.name << " repeat " << rep << " failed: " << e.what() << "\n";
            }
            runs.push_back(run);
        }
    }
    return runs;
}

std::string runs_csv(const std::vector<CellRun>& runs, const std::string& hash, const std::string& key_header) {
    std::ostringstream out;
    out << "# config_hash=" << hash << "\n";
    out << key_header << ",repeat,seed,status,knn_top1,linear_top1,error\n";
    for (const auto& r : runs) {
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        out << r.cell << "," << r.repeat << "," << r.seed << "," << (r.ok ? "ok" : "failed") << ","
            << (r.ok ? fmt(r.knn_top1) : "") << "," << (r.ok ? fmt(r.linear_top1) : "") << "," << err << "\n";
    }
    return out.str();
}

std::string mean_pm_std(const CellSummary& s, bool linear) {
    if (s.runs == s.failed) return "failed";
    return linear ? fmt(s.linear_mean, "%.4f") + " ± " + fmt(s.linear_std, "%.4f")
                  : fmt(s.knn_mean, "%.4f") + " ± " + fmt(s.knn_std, "%.4f");
}

std::string aligned_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    auto display = [](const std::string& s) {
        // UTF-8 continuation bytes take no column.
        return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
    };
    for (const auto& row : rows) {
        width.resize(std::max(width.size(), row.size()), 0);
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], display(row[i]));
    }
    std::ostringstream out;
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t i = 0; i < row.size(); ++i) {
            line += row[i];
            if (i + 1 < row.size()) line += std::string(width[i] - display(row[i]) + 2, ' ');
        }
        out << line << "\n";
    }
    return out.str();
}

std::optional<double> table4_reference(loss::Aggregation agg, bool mixture) {
    if (!mixture) return agg == loss::Aggregation::Maximum ? std::optional<double>(90.71) : std::nullopt;
    switch (agg) {
        case loss::Aggregation::Maximum: return 93.35;
        case loss::Aggregation::Average: return 92.71;
        case loss::Aggregation::None: return 92.86;
    }
    return std::nullopt;
}

data::Image resized(const data::Image& img, std::size_t side) {
    if (img.height == side && img.width == side) return img;
    return augment::resize_bilinear(img, side, side);
}

}  // namespace

void apply(const CommonOptions& options, ExperimentConfig& cfg) {
    if (options.seed) cfg.train.seed = *options.seed;
    if (options.strict_deterministic) cfg.train.strict_deterministic = true;
}

TrainOutcome train_experiment(const ExperimentConfig& cfg, const fs::path& out_dir,
                              const std::optional<fs::path>& resume, bool ignore_config_mismatch,
                              bool write_checkpoints) {
    cfg.validate();
    ensure_dir(out_dir);
    kernels::StrictModeGuard strict(cfg.train.strict_deterministic || kernels::strict_deterministic());
    const Datasets data = load_datasets(cfg.data);
    write_text(out_dir / "config.json", to_json(cfg).dump(2) + "\n");

    train::RunOptions options;
    options.out_dir = out_dir;
    options.resume = resume;
    options.ignore_config_mismatch = ignore_config_mismatch;
    options.write_checkpoints = write_checkpoints;
    TrainOutcome outcome;
    outcome.run = train::run(cfg.train, data.train, options);
    outcome.report = evaluate_model(outcome.run.model, data, cfg.eval);
    finish_report(outcome.report, cfg, out_dir);
    return outcome;
}

eval::EvalReport evaluate_checkpoint(const ExperimentConfig& cfg, const fs::path& checkpoint, const fs::path& out_dir) {
    ensure_dir(out_dir);
    kernels::StrictModeGuard strict(cfg.train.strict_deterministic || kernels::strict_deterministic());
    const train::Checkpoint ckpt = train::read_checkpoint(checkpoint);
    ExperimentConfig used = cfg;
    used.train = ckpt.config;
    const Datasets data = load_datasets(used.data);
    train::AnyModel model;
    if (ckpt.config.precision == 64) {
        model = train::restore<double>(ckpt).params;
    } else {
        model = train::restore<float>(ckpt).params;
    }
    eval::EvalReport report = evaluate_model(model, data, used.eval);
    finish_report(report, used, out_dir);
    return report;
}

GridResult run_ablation(const AblationGrid& grid, const fs::path& out_dir) {
    grid.validate();
    ensure_dir(out_dir);
    std::vector<Cell> cells;
    std::vector<std::string> names;
    for (bool mixture : grid.mixtures) {
        for (auto agg : grid.aggregations) {
            Cell c;
            c.name = loss::to_string(agg) + (mixture ? "+mixture" : "+no_mixture");
            c.cfg = grid.base;
            c.cfg.train.aggregation.kind = agg;
            c.cfg.train.mixture = mixture;
            names.push_back(c.name);
            cells.push_back(std::move(c));
        }
    }

    GridResult result;
    result.config_hash = train::hex(fnv1a(to_json(grid).dump()));
    result.runs = run_cells(cells, grid.repeats, grid.share_data_order, out_dir);
    result.cells = summarize(names, result.runs);
    std::size_t i = 0;
    for (bool mixture : grid.mixtures)
        for (auto agg : grid.aggregations) result.cells[i++].reference = table4_reference(agg, mixture);

    const std::string reference_note =
        "# published_reference: CIFAR-10 linear top-1 (%) at full scale (maximum 93.35, average 92.71, none 92.86, "
        "no_mixture 90.71); metadata for comparison only, not a desk-scale target\n";
    write_text(out_dir / "ablation_runs.csv", runs_csv(result.runs, result.config_hash, "cell"));

    std::ostringstream csv;
    csv << "# config_hash=" << result.config_hash << "\n" << reference_note;
    csv << "cell,aggregation,mixture,runs,failed,knn_mean,knn_std,linear_mean,linear_std,published_reference\n";
    std::vector<std::vector<std::string>> table{
        {"cell", "runs", "failed", "knn_top1 (mean ± std)", "linear_top1 (mean ± std)", "published_reference"}};
    i = 0;
    for (bool mixture : grid.mixtures) {
        for (auto agg : grid.aggregations) {
            const auto& s = result.cells[i++];
            const std::string ref = s.reference ? fmt(*s.reference, "%.2f") : "";
            csv << s.cell << "," << loss::to_string(agg) << "," << (mixture ? "mixture" : "no_mixture") << "," << s.runs
                << "," << s.failed << "," << fmt(s.knn_mean) << "," << fmt(s.knn_std) << "," << fmt(s.linear_mean)
                << "," << fmt(s.linear_std) << "," << ref << "\n";
            table.push_back({s.cell, std::to_string(s.runs), std::to_string(s.failed), mean_pm_std(s, false),
                             mean_pm_std(s, true), ref.empty() ? "-" : ref});
        }
    }
    write_text(out_dir / "ablation.csv", csv.str());

    std::ostringstream txt;
    txt << "# config_hash=" << result.config_hash << "\n" << reference_note << aligned_table(table);
    const auto find = [&](const std::string& name) -> const CellSummary* {
        for (const auto& s : result.cells)
            if (s.cell == name && s.failed < s.runs) return &s;
        return nullptr;
    };
    const auto* mx = find("maximum+mixture");
    const auto* av = find("average+mixture");
    if (mx && av) {
        txt << "direction (reported, not asserted): maximum " << (mx->knn_mean >= av->knn_mean ? ">=" : "<")
            << " average on kNN top-1 (" << fmt(mx->knn_mean, "%.4f") << " vs " << fmt(av->knn_mean, "%.4f") << ")\n";
    }
    write_text(out_dir / "ablation.txt", txt.str());
    return result;
}

std::string sweep_svg(const std::vector<double>& lambdas, const std::vector<CellSummary>& cells,
                      const std::string& config_hash) {
    const double w = 480, h = 320, left = 60, right = 20, top = 30, bottom = 50;
    const double pw = w - left - right, ph = h - top - bottom;
    auto x_of = [&](double lam) { return left + lam * pw; };
    auto y_of = [&](double acc) { return top + (1.0 - acc) * ph; };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
        << " " << h << "\">\n";
    svg << "<!-- config_hash=" << config_hash
        << "; published_reference: lambda=0 gives 23.76% CIFAR-10 linear top-1 at full scale (metadata only) -->\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
        << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double acc = t / 4.0;
        svg << "<text x=\"" << left - 8 << "\" y=\"" << y_of(acc) + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
            << fmt(acc, "%.2f") << "</text>\n";
    }
    for (double lam : lambdas) {
        svg << "<text x=\"" << x_of(lam) << "\" y=\"" << top + ph + 16 << "\" font-size=\"11\" text-anchor=\"middle\">"
            << fmt(lam, "%g") << "</text>\n";
    }
    svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 10 << "\" font-size=\"12\" text-anchor=\"middle\">lambda</text>\n";
    svg << "<text x=\"14\" y=\"" << top + ph / 2 << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << top + ph / 2 << ")\">kNN top-1</text>\n";

    std::string points;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (cells[i].failed == cells[i].runs) continue;
        if (!points.empty()) points += " ";
        points += fmt(x_of(lambdas[i]), "%.2f") + "," + fmt(y_of(cells[i].knn_mean), "%.2f");
    }
    svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"" << points << "\"/>\n";
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (cells[i].failed == cells[i].runs) continue;
        svg << "<circle cx=\"" << fmt(x_of(lambdas[i]), "%.2f") << "\" cy=\"" << fmt(y_of(cells[i].knn_mean), "%.2f")
            << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

SweepResult run_sweep(const SweepSpec& spec, const fs::path& out_dir) {
    spec.validate();
    ensure_dir(out_dir);
    std::vector<Cell> cells;
    std::vector<std::string> names;
    for (double lam : spec.lambda_values) {
        Cell c;
        c.name = "lambda=" + fmt(lam, "%g");
        c.cfg = spec.base;
        c.cfg.train.lambda = lam;
        names.push_back(c.name);
        cells.push_back(std::move(c));
    }
    SweepResult result;
    result.lambdas = spec.lambda_values;
    result.grid.config_hash = train::hex(fnv1a(to_json(spec).dump()));
    result.grid.runs = run_cells(cells, spec.repeats, spec.share_data_order, out_dir);
    result.grid.cells = summarize(names, result.grid.runs);

    write_text(out_dir / "sweep_runs.csv", runs_csv(result.grid.runs, result.grid.config_hash, "cell"));
    std::ostringstream csv;
    csv << "# config_hash=" << result.grid.config_hash << "\n";
    csv << "# published_reference: lambda=0 gives 23.76% CIFAR-10 linear top-1 at full scale; metadata only, not a "
           "desk-scale target\n";
    csv << "lambda,runs,failed,knn_mean,knn_std,linear_mean,linear_std\n";
    double previous = -1.0;
    for (std::size_t i = 0; i < result.lambdas.size(); ++i) {
        if (!(result.lambdas[i] > previous)) throw std::logic_error("sweep rows out of lambda order");
        previous = result.lambdas[i];
        const auto& s = result.grid.cells[i];
        csv << fmt(result.lambdas[i]) << "," << s.runs << "," << s.failed << "," << fmt(s.knn_mean) << ","
            << fmt(s.knn_std) << "," << fmt(s.linear_mean) << "," << fmt(s.linear_std) << "\n";
    }
    write_text(out_dir / "sweep.csv", csv.str());
    write_text(out_dir / "sweep.svg", sweep_svg(result.lambdas, result.grid.cells, result.grid.config_hash));
    return result;
}

std::vector<fs::path> dump_views(const ExperimentConfig& cfg, std::size_t n_images, const fs::path& out_dir) {
    if (n_images < 1) throw ConfigError("n_images must be at least 1");
    cfg.validate();
    ensure_dir(out_dir);
    const Datasets data = load_datasets(cfg.data);
    const auto& records = data.train.records;
    if (n_images > records.size()) {
        throw ConfigError("n_images " + std::to_string(n_images) + " exceeds the dataset size " +
                          std::to_string(records.size()));
    }
    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng{cfg.train.seed, kViewSampleTag};
    for (std::size_t i = 0; i < n_images; ++i) std::swap(order[i], order[i + rng.below(order.size() - i)]);

    const std::string hash = train::hex(experiment_hash(cfg));
    const std::size_t side = cfg.train.augment.output_size;
    const auto policy = cfg.train.effective_lambda_mix();
    std::vector<fs::path> written;
    for (std::size_t n = 0; n < n_images; ++n) {
        const auto& rec = records[order[n]];
        const auto t = augment::make_triplet(rec, cfg.train.augment, policy, cfg.train.seed, 0);
        const data::Image original = resized(rec.pixels, side);
        const data::Image* panels[4] = {&original, &t.x1, &t.x2, &t.xm};

        const std::size_t width = 4 * side;
        std::string bytes = "P6\n# config_hash=" + hash + " lambda_mix=" + fmt(t.lambda_mix) +
                            " panels=original|view1|view2|mix\n" + std::to_string(width) + " " +
                            std::to_string(side) + "\n255\n";
        for (std::size_t y = 0; y < side; ++y)
            for (const auto* panel : panels)
                for (std::size_t x = 0; x < side; ++x)
                    for (std::size_t c = 0; c < 3; ++c) {
                        const std::size_t ch = panel->channels == 1 ? 0 : c;
                        bytes.push_back(static_cast<char>(data::unit_to_byte(panel->at(ch, y, x))));
                    }
        char name[64];
        std::snprintf(name, sizeof name, "views_%03zu_idx%zu.ppm", n, rec.source_index);
        write_text(out_dir / name, bytes);
        written.push_back(out_dir / name);
    }
    return written;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Siamese self-supervised training with image mixtures"};
    app.require_subcommand(1);

    fs::path config, out = "out", resume_path, checkpoint;
    std::uint64_t seed = 0;
    std::size_t n_images = 4;
    bool strict = false, ignore_hash = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", out, "Output directory")->capture_default_str();
        cmd->add_option("--seed", seed, "Override train.seed");
        cmd->add_flag("--strict-deterministic", strict, "Run every kernel and augmentation serially");
    };
    auto* train_cmd = app.add_subcommand("train", "Train, then evaluate the final model");
    train_cmd->add_option("--config", config, "Experiment JSON")->required();
    train_cmd->add_option("--resume", resume_path, "Checkpoint to resume from");
    train_cmd->add_flag("--ignore-config-hash", ignore_hash, "Resume even if the checkpoint's config differs");
    add_common(train_cmd);

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint with the kNN and linear probes");
    eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
    eval_cmd->add_option("--config", config, "Experiment JSON supplying data and eval sections");
    add_common(eval_cmd);

    auto* ablate_cmd = app.add_subcommand("ablate", "Train an aggregation × mixture grid");
    ablate_cmd->add_option("--config", config, "Grid JSON")->required();
    add_common(ablate_cmd);

    auto* sweep_cmd = app.add_subcommand("sweep-lambda", "Train once per lambda value");
    sweep_cmd->add_option("--config", config, "Sweep JSON")->required();
    add_common(sweep_cmd);

    auto* views_cmd = app.add_subcommand("dump-views", "Write original|view1|view2|mix contact sheets");
    views_cmd->add_option("--config", config, "Experiment JSON")->required();
    views_cmd->add_option("--n-images", n_images, "Number of images")->capture_default_str();
    add_common(views_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CommonOptions common;
    if (app.got_subcommand("train") ? train_cmd->count("--seed") : 0) common.seed = seed;
    for (auto* cmd : {eval_cmd, ablate_cmd, sweep_cmd, views_cmd})
        if (cmd->parsed() && cmd->count("--seed")) common.seed = seed;
    common.strict_deterministic = strict;

    try {
        if (train_cmd->parsed()) {
            ExperimentConfig cfg = load_experiment(config);
            apply(common, cfg);
            std::optional<fs::path> resume;
            if (train_cmd->count("--resume")) resume = resume_path;
            const auto outcome = train_experiment(cfg, out, resume, ignore_hash);
            std::cout << "knn_top1=" << fmt(outcome.report.knn_top1, "%.4f")
                      << " linear_top1=" << fmt(outcome.report.linear_top1, "%.4f")
                      << " embedding_std=" << fmt(outcome.report.embedding_std, "%.4f") << " -> " << out.string()
                      << "\n";
        } else if (eval_cmd->parsed()) {
            ExperimentConfig cfg;
            if (eval_cmd->count("--config")) cfg = load_experiment(config);
            apply(common, cfg);
            const auto report = evaluate_checkpoint(cfg, checkpoint, out);
            std::cout << "knn_top1=" << fmt(report.knn_top1, "%.4f") << " linear_top1=" << fmt(report.linear_top1, "%.4f")
                      << " -> " << (out / "report.json").string() << "\n";
        } else if (ablate_cmd->parsed()) {
            AblationGrid grid = ablation_grid_from_json(read_json_file(config));
            apply(common, grid.base);
            const auto result = run_ablation(grid, out);
            std::ifstream table(out / "ablation.txt");
            std::cout << table.rdbuf();
            for (const auto& c : result.cells)
                if (c.failed) return 1;
        } else if (sweep_cmd->parsed()) {
            SweepSpec spec = sweep_spec_from_json(read_json_file(config));
            apply(common, spec.base);
            const auto result = run_sweep(spec, out);
            for (std::size_t i = 0; i < result.lambdas.size(); ++i) {
                std::cout << "lambda=" << fmt(result.lambdas[i], "%g")
                          << " knn_top1=" << fmt(result.grid.cells[i].knn_mean, "%.4f") << "\n";
            }
            for (const auto& c : result.grid.cells)
                if (c.failed) return 1;
        } else if (views_cmd->parsed()) {
            ExperimentConfig cfg = load_experiment(config);
            apply(common, cfg);
            for (const auto& p : dump_views(cfg, n_images, out)) std::cout << p.string() << "\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "mixsiam: config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "mixsiam: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace mixsiam::cli
