#include "adkit/cli.hpp"

#include "adkit/config.hpp"
#include "adkit/errors.hpp"
#include "adkit/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace adkit::cli {

namespace {

void print_methods_table(const eval::ResultTable& table) {
    std::size_t width = 8;
    for (const auto& method : table.methods)
        width = std::max(width, method.size());
    auto pad = [](const std::string& text, std::size_t w) {
        return text + std::string(text.size() < w ? w - text.size() : 0, ' ');
    };
    std::string header = pad("method", width + 2);
    for (const auto& cohort : table.cohorts)
        header += pad(cohort, std::max<std::size_t>(cohort.size(), 8) + 2);
    header += "average";
    std::cout << header << "\n";
    for (std::size_t m = 0; m < table.methods.size(); ++m) {
        std::string row = pad(table.methods[m], width + 2);
        for (std::size_t c = 0; c < table.cohorts.size(); ++c) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.4f", table.cell(m, c).auc);
            row += pad(buf, std::max<std::size_t>(table.cohorts[c].size(), 8) + 2);
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", table.average(m));
        row += buf;
        std::cout << row << "\n";
    }
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"anomaly-detection benchmark: data generation, training, "
                 "checkpoint selection, ensembling, evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;

    std::vector<std::pair<std::string, CLI::App*>> commands;
    auto add_command = [&](const std::string& name, const std::string& help) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "run configuration file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (overrides run.out)");
        sub->add_option("--seed", seed, "replace the configured seed list with this one seed");
        commands.emplace_back(name, sub);
    };

    add_command("run", "execute every stage in order and print the mean AUC table");
    add_command("generate-data", "write the cohort patches and manifests");
    add_command("train", "train each detector, checkpointing on the configured cadence");
    add_command("select", "pick a scoring checkpoint per detector and strategy");
    add_command("score", "score validation normals and the test split");
    add_command("ensemble", "normalize member scores and average them");
    add_command("evaluate", "compute ROC-AUC tables per cohort and seed");
    add_command("report", "serialize the method and strategy tables");

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? 0 : 2; // bad usage is a configuration error
        }

        cfg::RunConfig config = cfg::load_run_config(config_path);
        for (const auto& [name, sub] : commands) {
            if (!app.got_subcommand(sub))
                continue;
            if (sub->count("--out"))
                config.out_dir = out_dir;
            if (sub->count("--seed"))
                config.seeds = {seed};
            if (name == "run") {
                const auto table = pipe::run_pipeline(config);
                print_methods_table(table);
                std::cout << "reports written to "
                          << (config.out_dir / "reports").string() << "\n";
            } else if (pipe::run_stage(config, name)) {
                std::cout << "stage '" << name << "' completed\n";
            } else {
                std::cout << "stage '" << name << "' already complete; skipped\n";
            }
            break;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace adkit::cli
