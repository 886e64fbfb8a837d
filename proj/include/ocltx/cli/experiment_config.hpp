#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ocltx/eval/ablation.hpp"
#include "ocltx/model/config.hpp"
#include "ocltx/streams/trainer.hpp"

namespace ocltx::cli {

enum class DataKind { synthetic, file };

struct DataConfig {
    DataKind kind = DataKind::synthetic;
    std::filesystem::path path;  // feature file when kind == file
    // Gaussian-blob base dataset and split sequence.
    int base_classes = 47;
    int feature_dim = 32;
    double spread = 0.3;
    int pool_size = 200;
    int num_tasks = 100;
    int examples_per_task = 500;
    int ways = 10;
};

// Flat "key = value" text with dotted sections:
//
//   model.*    ModelConfig fields (see model::to_text)
//   trainer.*  num_streams, chunk_size, alpha0, learning_rate, weight_decay,
//              total_examples, checkpoint_every
//   data.*     source (synthetic | file), path, base_classes, feature_dim,
//              spread, pool_size, num_tasks, examples_per_task, ways
//   run.*      output_dir, data_seeds (comma list), model_seed, ablation,
//              gradient_stop (comma list of stream-0 positions)
//
// '#' starts a comment. Unknown keys and malformed values throw ConfigError.
struct ExperimentConfig {
    model::ModelConfig model;
    streams::TrainerConfig trainer;
    DataConfig data;
    eval::AblationKind ablation = eval::AblationKind::none;
    std::vector<std::int64_t> gradient_stop;
    std::filesystem::path output_dir = "runs";
    std::vector<std::uint64_t> data_seeds{0};
    std::uint64_t model_seed = 0;

    // Throws ConfigError naming the first invalid field.
    void validate() const;
};

void set_field(ExperimentConfig& config, const std::string& key, const std::string& value);
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string to_text(const ExperimentConfig& config);

// Sweep grid: one "key = v1, v2, ..." line per swept field.
using Grid = std::vector<std::pair<std::string, std::vector<std::string>>>;
Grid parse_grid(const std::string& text);
Grid load_grid(const std::filesystem::path& path);
// Cartesian product in row-major order (last key varies fastest).
std::vector<std::vector<std::pair<std::string, std::string>>> expand_grid(const Grid& grid);

// Splits "a, b,c" into trimmed, non-empty items.
std::vector<std::string> split_list(const std::string& value);
std::string trim(const std::string& s);

}  // namespace ocltx::cli
