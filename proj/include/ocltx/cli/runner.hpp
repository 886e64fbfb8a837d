#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>

#include "ocltx/cli/experiment_config.hpp"
#include "ocltx/data/source.hpp"
#include "ocltx/eval/metrics.hpp"

namespace ocltx::cli {

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_invalid_config = 2, exit_non_finite = 3 };

// Example source for one data seed. Synthetic data derives the blob
// dataset and the task sequence from the seed; files ignore it.
std::shared_ptr<const data::ExampleSource> make_source(const DataConfig& data, std::uint64_t data_seed);

struct SingleRun {
    eval::MetricsLog log;
    eval::Summary summary;
    std::int64_t gradient_steps = 0;
};

// One training run (model from config.model_seed, data from `data_seed`).
SingleRun run_single(const ExperimentConfig& config, std::uint64_t data_seed,
                     std::optional<std::int64_t> gradient_stop = std::nullopt);

// Runs every data seed (and gradient-stop position), writing under
// config.output_dir:
//   metrics_seed<d>.csv, summary_seed<d>.txt, curves/<kind>.csv
// with a stop_<p>/ subdirectory per gradient-stop position. Returns an
// ExitCode; errors are reported on `err`.
int run_experiment(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

// Runs each grid point over all data seeds and writes sweep.csv and
// pareto.csv. Failed points are recorded and skipped.
int run_sweep(const ExperimentConfig& base, const Grid& grid, std::ostream& out, std::ostream& err);

// Window-oracle accuracy of an OCLF file or a text file of integer labels.
int run_oracle(const std::filesystem::path& path, int window, std::ostream& out, std::ostream& err);

}  // namespace ocltx::cli
