#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "ocltx/cli/runner.hpp"
#include "ocltx/data/feature_file.hpp"
#include "ocltx/errors.hpp"

using namespace ocltx;

namespace {

int apply_overrides(cli::ExperimentConfig& config, const std::string& output_dir,
                    const std::vector<std::uint64_t>& data_seeds, const std::optional<std::uint64_t>& model_seed) {
    if (!output_dir.empty()) config.output_dir = output_dir;
    if (!data_seeds.empty()) config.data_seeds = data_seeds;
    if (model_seed) config.model_seed = *model_seed;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online in-context learning with transformers over streaming data"};
    app.require_subcommand(1);

    std::string config_path, grid_path, oracle_path, csv_path, out_path, output_dir;
    std::vector<std::uint64_t> data_seeds;
    std::optional<std::uint64_t> model_seed;
    int window = 1;
    std::optional<int> num_classes;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--output-dir", output_dir, "Directory for all outputs");
        sub->add_option("--data-seed", data_seeds, "Data seed(s); overrides run.data_seeds");
        sub->add_option("--model-seed", model_seed, "Model seed; overrides run.model_seed");
    };

    auto* run = app.add_subcommand("run", "Train on a sequence and write metrics");
    run->add_option("config", config_path, "Experiment config file")->required();
    add_common(run);

    auto* sweep = app.add_subcommand("sweep", "Run a hyper-parameter grid and write the Pareto front");
    sweep->add_option("config", config_path, "Base experiment config")->required();
    sweep->add_option("grid", grid_path, "Grid file: one 'key = v1, v2' line per field")->required();
    add_common(sweep);

    auto* oracle = app.add_subcommand("oracle", "Score the window oracle on a label sequence");
    oracle->add_option("file", oracle_path, "Feature file or whitespace/comma separated labels")->required();
    oracle->add_option("--window,-W", window, "Window size W")->required()->check(CLI::PositiveNumber);

    auto* convert = app.add_subcommand("convert", "Convert label,feature CSV rows to a feature file");
    convert->add_option("csv", csv_path)->required();
    convert->add_option("output", out_path)->required();
    convert->add_option("--num-classes", num_classes, "Class count (default: max label + 1)");

    CLI11_PARSE(app, argc, argv);

    if (*oracle) return cli::run_oracle(oracle_path, window, std::cout, std::cerr);

    if (*convert) {
        try {
            auto n = data::convert_csv_to_feature_file(csv_path, out_path, num_classes);
            std::cout << "wrote " << n << " records to " << out_path << '\n';
            return cli::exit_ok;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return cli::exit_failure;
        }
    }

    cli::ExperimentConfig config;
    cli::Grid grid;
    try {
        config = cli::load_experiment_config(config_path);
        if (*sweep) grid = cli::load_grid(grid_path);
    } catch (const ConfigError& e) {
        std::cerr << "invalid config: " << e.field() << ": " << e.what() << '\n';
        return cli::exit_invalid_config;
    }
    apply_overrides(config, output_dir, data_seeds, model_seed);
    if (*sweep) return cli::run_sweep(config, grid, std::cout, std::cerr);
    return cli::run_experiment(config, std::cout, std::cerr);
}
