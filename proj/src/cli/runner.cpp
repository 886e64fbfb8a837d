#include "ocltx/cli/runner.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "ocltx/data/feature_file.hpp"
#include "ocltx/data/gaussian_blobs.hpp"
#include "ocltx/data/split_sequence.hpp"
#include "ocltx/errors.hpp"
#include "ocltx/eval/pareto.hpp"
#include "ocltx/eval/window_oracle.hpp"
#include "ocltx/model/params.hpp"

namespace ocltx::cli {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t trainer_seed(std::uint64_t model_seed) { return data::mix_seed(model_seed, 0x7265706c6179ULL); }

}  // namespace

std::shared_ptr<const data::ExampleSource> make_source(const DataConfig& d, std::uint64_t data_seed) {
    if (d.kind == DataKind::file) return data::load_feature_file(d.path);
    auto base = std::make_shared<data::BaseDataset>(
        data::gaussian_blob_dataset(d.base_classes, d.feature_dim, d.spread, data::mix_seed(data_seed, 0), d.pool_size));
    data::SequenceSpec spec;
    spec.num_tasks = d.num_tasks;
    spec.examples_per_task = d.examples_per_task;
    spec.ways = d.ways;
    spec.seed = data::mix_seed(data_seed, 1);
    return std::make_shared<data::SplitSequence>(std::move(base), spec);
}

SingleRun run_single(const ExperimentConfig& config, std::uint64_t data_seed, std::optional<std::int64_t> stop) {
    const auto model_cfg = eval::apply_ablation(config.model, config.ablation);
    auto trainer = config.trainer;
    trainer.seed = trainer_seed(config.model_seed);
    if (stop) trainer.update_gate = eval::gradient_stop_schedule(std::span<const std::int64_t>(&*stop, 1)).front();

    auto params = model::init_params<float>(model_cfg, config.model_seed);
    auto result = streams::train_sequence(model_cfg, params, make_source(config.data, data_seed), trainer);
    SingleRun run;
    run.summary = eval::summarize(result.log);
    run.summary.macs_total = result.macs_total;
    run.gradient_steps = result.gradient_steps;
    run.log = std::move(result.log);
    return run;
}

namespace {

int run_all_seeds(const ExperimentConfig& config, const std::filesystem::path& dir, std::optional<std::int64_t> stop,
                  std::ostream& out, std::vector<eval::Summary>* summaries) {
    std::filesystem::create_directories(dir);
    for (auto seed : config.data_seeds) {
        auto run = run_single(config, seed, stop);
        const auto tag = "seed" + std::to_string(seed);
        eval::write_metrics_csv(dir / ("metrics_" + tag + ".csv"), run.log);
        std::map<std::string, std::string> extra{
            {"data_seed", std::to_string(seed)},
            {"model_seed", std::to_string(config.model_seed)},
            {"ablation", eval::to_string(config.ablation)},
            {"gradient_steps", std::to_string(run.gradient_steps)},
            {"learning_rate", fmt(config.trainer.effective_learning_rate(config.model.width))},
        };
        if (stop) extra["gradient_stop"] = std::to_string(*stop);
        eval::write_summary(dir / ("summary_" + tag + ".txt"), run.summary, extra);
        out << dir.string() << " data_seed=" << seed << " average_accuracy=" << fmt(run.summary.average_accuracy)
            << " cumulative_nll=" << fmt(run.summary.cumulative_nll) << " macs_total=" << run.summary.macs_total
            << '\n';
        summaries->push_back(std::move(run.summary));
    }
    for (auto kind : {eval::CurveKind::running_accuracy, eval::CurveKind::per_task_accuracy,
                      eval::CurveKind::per_task_nll, eval::CurveKind::within_task_accuracy,
                      eval::CurveKind::within_task_nll}) {
        eval::write_curve(dir / "curves" / (eval::to_string(kind) + ".csv"),
                          eval::aggregate(std::span<const eval::Summary>(*summaries), kind));
    }
    return exit_ok;
}

template <class F>
int guarded(std::ostream& err, F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        err << "invalid config: " << e.what() << '\n';
        return exit_invalid_config;
    } catch (const NonFiniteError& e) {
        err << "aborted: " << e.what() << " (stream " << e.stream() << ", position " << e.position() << ")\n";
        return exit_non_finite;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }
}

}  // namespace

int run_experiment(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        config.validate();
        if (config.gradient_stop.empty()) {
            std::vector<eval::Summary> summaries;
            return run_all_seeds(config, config.output_dir, std::nullopt, out, &summaries);
        }
        for (auto stop : config.gradient_stop) {
            std::vector<eval::Summary> summaries;
            run_all_seeds(config, config.output_dir / ("stop_" + std::to_string(stop)), stop, out, &summaries);
        }
        return int(exit_ok);
    });
}

int run_sweep(const ExperimentConfig& base, const Grid& grid, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        base.validate();
        std::vector<eval::SweepPoint> points;
        const auto assignments = expand_grid(grid);
        for (std::size_t i = 0; i < assignments.size(); ++i) {
            eval::SweepPoint point;
            std::string label;
            for (const auto& [k, v] : assignments[i]) label += (label.empty() ? "" : ";") + k + "=" + v;
            point.label = label.empty() ? "base" : label;
            try {
                auto cfg = base;
                for (const auto& [k, v] : assignments[i]) set_field(cfg, k, v);
                cfg.output_dir = base.output_dir / ("point_" + std::to_string(i));
                cfg.gradient_stop.clear();
                cfg.validate();
                std::vector<eval::Summary> summaries;
                std::ostringstream sink;
                run_all_seeds(cfg, cfg.output_dir, std::nullopt, sink, &summaries);
                double acc = 0, macs = 0;
                for (const auto& s : summaries) {
                    acc += s.average_accuracy;
                    macs += double(s.macs_total);
                }
                point.accuracy = acc / double(summaries.size());
                point.macs_total = std::uint64_t(macs / double(summaries.size()));
            } catch (const std::exception& e) {
                point.failed = true;
                point.error = e.what();
                err << "point " << i << " (" << point.label << ") failed: " << e.what() << '\n';
            }
            out << "point " << i << " " << point.label << (point.failed ? " failed" : "")
                << " accuracy=" << fmt(point.accuracy) << " macs_total=" << point.macs_total << '\n';
            points.push_back(point);
        }

        std::filesystem::create_directories(base.output_dir);
        auto write = [](const std::filesystem::path& path, const std::vector<eval::SweepPoint>& rows) {
            std::ofstream f(path);
            if (!f) throw DataError("cannot open " + path.string() + " for writing");
            f << "label,macs_total,accuracy,status\n";
            for (const auto& p : rows)
                f << '"' << p.label << "\"," << p.macs_total << ',' << fmt(p.accuracy) << ','
                  << (p.failed ? "failed" : "ok") << '\n';
        };
        write(base.output_dir / "sweep.csv", points);
        write(base.output_dir / "pareto.csv", eval::pareto_front(points));
        return int(exit_ok);
    });
}

int run_oracle(const std::filesystem::path& path, int window, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        std::vector<int> labels;
        if (data::is_feature_file(path)) {
            auto src = data::load_feature_file(path);
            for (const auto& ex : src->examples()) labels.push_back(ex.label);
        } else {
            std::ifstream in(path);
            if (!in) throw DataError("cannot open " + path.string());
            std::string tok;
            while (in >> tok) {
                for (const auto& item : split_list(tok)) {
                    try {
                        std::size_t used = 0;
                        labels.push_back(std::stoi(item, &used));
                        if (used != item.size()) throw std::invalid_argument(item);
                    } catch (const std::logic_error&) {
                        throw DataError(path.string() + ": not an integer label: '" + item + "'");
                    }
                }
            }
        }
        if (window < 1) throw ConfigError("window", "must be >= 1");
        out << "examples = " << labels.size() << '\n'
            << "window = " << window << '\n'
            << "accuracy = " << fmt(eval::window_oracle(labels, window)) << '\n';
        return int(exit_ok);
    });
}

}  // namespace ocltx::cli
