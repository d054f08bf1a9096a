// ergolab: experiment runner for measure-preserving group action
// simulations. One subcommand per experiment family; configuration comes
// from a JSON file, reports go to report.json / report.csv.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ergolab/experiment.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::string format = "both";
};

int run_family(const std::string& family, const CommonOptions& opts) {
    ergolab::json config;
    try {
        std::ifstream in(opts.config_path);
        if (!in) {
            std::cerr << "ConfigError: cannot read " << opts.config_path << "\n";
            return 2;
        }
        config = ergolab::json::parse(in);
    } catch (const ergolab::json::exception& e) {
        std::cerr << "ConfigError: " << e.what() << "\n";
        return 2;
    }

    ergolab::RunResult result;
    try {
        if (!config.is_object() || !config.contains("experiment") ||
            config.at("experiment") != family)
            throw ergolab::ConfigError("config experiment field must be \"" + family + "\"");
        result = ergolab::run_experiment(config, opts.seed);
    } catch (const ergolab::ConfigError& e) {
        std::cerr << "ConfigError: " << e.what() << "\n";
        return 2;
    } catch (const ergolab::IoError& e) {
        std::cerr << "IoError: " << e.what() << "\n";
        return 4;
    } catch (const ergolab::Error& e) {
        std::cerr << e.name() << ": " << e.what() << "\n";
        return 3;
    }

    try {
        ergolab::emit_report(result, opts.format, opts.out_dir);
    } catch (const ergolab::IoError& e) {
        std::cerr << "IoError: " << e.what() << "\n";
        return 4;
    }

    std::printf("%s: %s (%.3f s, seed %llu)\n", family.c_str(),
                result.error.empty() ? (result.pass ? "pass" : "fail") : result.error.c_str(),
                result.wall_seconds, static_cast<unsigned long long>(result.seed));
    if (!result.error.empty()) {
        std::cerr << result.error << "\n";
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo experiments for p.m.p. group actions"};
    app.require_subcommand(1);

    std::map<std::string, CommonOptions> options;
    for (const auto& family : ergolab::experiment_names()) {
        auto* sub = app.add_subcommand(family, "run a " + family + " experiment");
        auto& opts = options[family];
        sub->add_option("--config", opts.config_path, "experiment config (JSON)")->required();
        sub->add_option("--seed", opts.seed, "override the config seed");
        sub->add_option("--out", opts.out_dir, "output directory (default .)");
        sub->add_option("--format", opts.format, "json | csv | both (default both)");
    }

    CLI11_PARSE(app, argc, argv);
    for (const auto& [family, opts] : options)
        if (app.got_subcommand(family)) return run_family(family, opts);
    return 2;
}
