#include "beamloc/cli/commands.hpp"
#include "beamloc/errors.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <iostream>

namespace {

using namespace beamloc;
using namespace beamloc::cli;

// BEAMLOC_LOG=trace|debug|info|warn|error|critical|off; logs go to stderr.
bool configure_logging() {
    auto logger = spdlog::stderr_color_mt("beamloc");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    const char* env = std::getenv("BEAMLOC_LOG");
    if (!env || !*env) return true;
    const std::string text(env);
    const auto level = spdlog::level::from_str(text);
    if (level == spdlog::level::off && text != "off") {
        spdlog::error("BEAMLOC_LOG='{}' is not a log level (trace, debug, info, warn, error, critical, off)", text);
        return false;
    }
    spdlog::set_level(level);
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    if (!configure_logging()) return kExitInput;

    CLI::App app{"Beam damage localization: synthetic modal data, evidence fusion and model updating"};
    app.require_subcommand(1);

    std::vector<std::string> scenarios;
    std::string out_dir;
    std::string strategy;
    std::uint64_t seed = 0;
    int jobs = 1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", scenarios, "scenario JSON file (repeatable)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--seed", seed, "override the scenario's noise seed");
        sub->add_option("--jobs", jobs, "scenario files processed in parallel")->check(CLI::PositiveNumber);
    };
    CLI::App* synth = app.add_subcommand("synthesize", "write healthy and damaged modal measurements");
    CLI::App* fuse = app.add_subcommand("fuse", "damage features, per-feature BPAs and fused beliefs");
    CLI::App* localize = app.add_subcommand("localize", "identify element stiffness by model updating");
    for (CLI::App* sub : {synth, fuse, localize}) add_common(sub);
    localize->add_option("--strategy", strategy, "override the scenario's strategy")
        ->check(CLI::IsMember({"plain", "hierarchical", "hybrid"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    CommandOptions options;
    options.out_dir = out_dir;
    if (!strategy.empty()) options.strategy = strategy_from_string(strategy);
    for (CLI::App* sub : {synth, fuse, localize}) {
        if (sub->parsed() && sub->count("--seed") > 0) options.seed = seed;
    }

    Command command;
    if (synth->parsed()) command = cmd_synthesize;
    if (fuse->parsed()) command = cmd_fuse;
    if (localize->parsed()) command = cmd_localize;

    std::vector<std::filesystem::path> paths(scenarios.begin(), scenarios.end());
    const auto outcomes = run_batch(command, paths, options, jobs);
    int exit_code = kExitOk;
    for (const CommandOutcome& o : outcomes) {
        (o.exit_code == kExitOk ? std::cout : std::cerr) << o.summary << '\n';
        exit_code = std::max(exit_code, o.exit_code);
    }
    return exit_code;
}
