// SPDX-License-Identifier: Apache-2.0
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cstdoa/config.hpp"
#include "cstdoa/error.hpp"
#include "cstdoa/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Compressive TDOA localization simulator"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run a scenario from a config file or preset");
    std::string config_path;
    std::string preset_name;
    std::uint64_t seed = 0;
    std::string out_dir;
    bool dry_run = false;
    std::size_t workers = 1;
    run->add_option("config", config_path, "JSON run description");
    run->add_option("--preset", preset_name, "Built-in preset (paper-fig5, desk-255)");
    run->add_option("--seed", seed, "Override the run seed");
    run->add_option("--out", out_dir, "Output directory");
    run->add_flag("--dry-run", dry_run, "Validate the config and write the manifest only");
    run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

    auto* show = app.add_subcommand("preset", "Print a preset as JSON");
    std::string show_name;
    show->add_option("name", show_name)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*show) {
            std::cout << cstdoa::config_to_json(cstdoa::preset(show_name)) << '\n';
            return 0;
        }
        if (config_path.empty() == preset_name.empty()) {
            std::cerr << "error: give exactly one of <config> or --preset\n";
            return 2;
        }
        auto cfg = config_path.empty() ? cstdoa::preset(preset_name) : cstdoa::load_config(config_path);
        if (run->count("--seed") > 0) {
            cfg.seed = seed;
            cfg.scenario.seed = seed;
        }
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        cfg.validate();

        const auto summary = cstdoa::run(cfg, {workers, dry_run});
        if (summary.dropped_samples > 0) {
            std::cerr << "dropped " << summary.dropped_samples << " samples after the last full block\n";
        }
        std::cout << summary.output_dir << ": " << summary.blocks << " blocks, " << summary.accepted
                  << " accepted, " << summary.rejected << " rejected, compression ratio "
                  << cstdoa::format_number(summary.compression_ratio) << '\n';
        return 0;
    } catch (const cstdoa::ConfigError& e) {
        // what() already leads with the field path
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
