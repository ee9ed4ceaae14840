#pragma once

// Scenario files: one JSON document per analysis. Lengths are given in mm,
// moduli in GPa, element numbers are 1-based; everything is converted to the
// library's SI, 0-based representation on load.

#include "beamloc/strategies.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace beamloc::cli {

struct ScenarioFile {
    std::string name;
    BeamConfig beam;
    DamageScenario damage;
    int n_modes = 8;
    HybridConfig hybrid;
    ObjectiveWeights weights;
    OptimizerConfig optimizer;
    HierarchicalConfig hierarchical;
    Strategy strategy = Strategy::Hybrid;

    // Throws InvalidInputError when any section is inconsistent.
    void validate() const;
};

// Throws InvalidInputError on malformed JSON, unknown keys, wrong types or
// out-of-range values; messages carry the JSON path of the offending entry.
ScenarioFile parse_scenario(std::string_view json_text, std::string_view fallback_name = "scenario");
ScenarioFile load_scenario(const std::filesystem::path& path);

// Canonical JSON (every field spelled out, file units).
std::string to_json(const ScenarioFile& scenario);

}  // namespace beamloc::cli
