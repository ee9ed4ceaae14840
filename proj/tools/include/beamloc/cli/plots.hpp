#pragma once

// SVG charts built only from the on-disk tables, so re-reading the CSVs
// reproduces the charts byte for byte.

#include "beamloc/cli/tables.hpp"

#include <string>

namespace beamloc::cli {

// Fused singleton belief per element with candidates highlighted and m(Theta) as a reference line.
std::string belief_chart(const FusionTable& fusion, const std::string& title);

// Objective per trace record on a log10 axis; stage transfers are marked.
std::string convergence_chart(const TraceTable& trace, const std::string& title);

// Identified Young's modulus per element with healthy and true values overlaid.
std::string modulus_chart(const ProfileTable& profile, const std::string& title);

}  // namespace beamloc::cli
