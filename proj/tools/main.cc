#include <iostream>

#include "CLI11.hpp"
#include "eaas/cli.h"

namespace {

int dispatch(eaas::cli::Command command, const std::string &config_path, const std::string &out_dir,
             const eaas::cli::Overrides &overrides) {
    try {
        const auto cfg = eaas::cli::load_config(config_path, command, overrides);
        return eaas::cli::run(cfg, out_dir, std::cerr);
    } catch (const eaas::ParseError &e) {
        std::cerr << config_path;
        if (e.row > 0) {
            std::cerr << ':' << e.row << ':' << e.col;
        }
        std::cerr << ": error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Entanglement-assisted absorption spectroscopy simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(eaas::cli::kToolVersion));

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    std::uint64_t trials = 0;
    unsigned threads = 0;

    const std::pair<const char *, eaas::cli::Command> commands[] = {
        {"detect", eaas::cli::Command::Detect},
        {"position", eaas::cli::Command::Position},
        {"recognize", eaas::cli::Command::Recognize},
        {"bounds", eaas::cli::Command::Bounds},
        {"optimize", eaas::cli::Command::Optimize},
    };
    const char *descriptions[] = {
        "binary absorption detection versus M",
        "absorption-peak positioning among m slots",
        "molecule recognition from a transmissivity pattern",
        "classical lower bounds and their minimizing allocation",
        "SPSA optimization of energies and/or gains",
    };
    std::vector<CLI::App *> subs;
    for (std::size_t i = 0; i < std::size(commands); ++i) {
        auto *sub = app.add_subcommand(commands[i].first, descriptions[i]);
        sub->add_option("--config", config_path, "YAML config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--trials", trials, "override the Monte-Carlo trial count")->check(CLI::PositiveNumber);
        sub->add_option("--out", out_dir, "output directory (default: current directory)");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (!subs[i]->parsed()) {
            continue;
        }
        eaas::cli::Overrides overrides;
        if (subs[i]->count("--seed")) {
            overrides.seed = seed;
        }
        if (subs[i]->count("--trials")) {
            overrides.trials = trials;
        }
        if (subs[i]->count("--threads")) {
            overrides.threads = threads;
        }
        return dispatch(commands[i].second, config_path, out_dir, overrides);
    }
    return 2;
}
