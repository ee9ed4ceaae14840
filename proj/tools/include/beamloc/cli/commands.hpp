#pragma once

#include "beamloc/cli/scenario.hpp"
#include "beamloc/cli/tables.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace beamloc::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitInput = 2,
    kExitStrategy = 3,
    kExitNumeric = 4,
};

struct CommandOptions {
    std::filesystem::path out_dir;
    std::optional<Strategy> strategy;     // overrides the scenario's strategy
    std::optional<std::uint64_t> seed;    // overrides the scenario's seed
};

struct CommandOutcome {
    int exit_code = kExitOk;
    std::string summary;   // one line for stdout (or the error message)
};

// Concentration of fused singleton beliefs below this is reported as low.
inline constexpr double kLowConcentration = 0.3;

struct Measurements {
    MeasuredModes healthy;
    MeasuredModes damaged;
    DamageParams truth;
};

// Healthy state uses `seed`, the damaged state `seed + 1`.
Measurements synthesize(const ScenarioFile& scenario);

// Reads measured_healthy.csv, measured_damaged.csv and frequencies.csv from
// `dir` when all three exist; otherwise synthesizes from the scenario.
Measurements load_or_synthesize(const ScenarioFile& scenario, const std::filesystem::path& dir);

CommandOutcome cmd_synthesize(const ScenarioFile& scenario, const CommandOptions& options);
CommandOutcome cmd_fuse(const ScenarioFile& scenario, const CommandOptions& options);
CommandOutcome cmd_localize(const ScenarioFile& scenario, const CommandOptions& options);

using Command = std::function<CommandOutcome(const ScenarioFile&, const CommandOptions&)>;

// Loads the scenario, applies the overrides and runs `command`, mapping
// exceptions to exit codes (input 2, numeric 4).
CommandOutcome run_scenario_file(const Command& command, const std::filesystem::path& scenario_path,
                                 const CommandOptions& options);

// Runs every scenario file, `jobs` at a time. With more than one file each
// writes to out_dir/<file stem>. Outcomes are returned in input order.
std::vector<CommandOutcome> run_batch(const Command& command, const std::vector<std::filesystem::path>& scenarios,
                                      const CommandOptions& options, int jobs);

// Charts regenerated from the CSVs found in `dir`: file name -> SVG text.
std::vector<std::pair<std::string, std::string>> charts_from_directory(const std::filesystem::path& dir);

}  // namespace beamloc::cli
