#pragma once

// Result tables as written to disk. Every table has a CSV writer and a
// reader; numbers are written with 17 significant digits so a write/read
// cycle reproduces the doubles exactly. File units: mm, GPa, rad/s.

#include "beamloc/strategies.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace beamloc::cli {

// ---------------------------------------------------------------------------
// Generic CSV

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index by name; throws InvalidInputError when absent.
    int column(const std::string& name) const;
    double number(std::size_t row, int col) const;
    int integer(std::size_t row, int col) const;
};

std::string format_number(double value);

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Measurements: measured_<state>.csv (mode, node, x_mm, shape, curvature)
// and frequencies.csv (state, mode, omega_rad_s).

void write_measurement(const std::filesystem::path& path, const MeasuredModes& modes);
MeasuredModes read_measurement(const std::filesystem::path& path, const Eigen::VectorXd& frequencies);

void write_frequencies(const std::filesystem::path& path, const MeasuredModes& healthy, const MeasuredModes& damaged);
// Frequencies for `state` ("healthy" or "damaged"), ordered by mode.
Eigen::VectorXd read_frequencies(const std::filesystem::path& path, const std::string& state);

// ---------------------------------------------------------------------------
// Evidence

struct FeatureTable {
    std::vector<std::string> names;           // feature names, one column each
    std::vector<Eigen::VectorXd> values;      // per feature, per element
};

struct BpaTable {
    std::vector<std::string> features;
    std::vector<Eigen::VectorXd> singleton_masses;
    std::vector<Eigen::VectorXd> alpha;
    std::vector<double> theta_mass;
};

struct FusionTable {
    Eigen::VectorXd belief;
    Eigen::VectorXd plausibility;
    std::vector<int> candidates;   // 0-based
    double theta_mass = 1.0;
    double conflict = 0.0;
    double concentration = 0.0;
};

void write_features(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable read_features(const std::filesystem::path& path);

void write_bpas(const std::filesystem::path& path, const BpaTable& table);
BpaTable read_bpas(const std::filesystem::path& path);

// fused.csv (element, belief, plausibility, candidate) plus the scalar
// summary in fusion_summary.csv (quantity, value).
void write_fusion(const std::filesystem::path& fused_path, const std::filesystem::path& summary_path,
                  const FusionTable& table);
FusionTable read_fusion(const std::filesystem::path& fused_path, const std::filesystem::path& summary_path);

// ---------------------------------------------------------------------------
// Localization

struct TraceRow {
    int record = 0;          // running index over all stages
    int iteration = 0;       // within its minimize run
    std::string stage;
    double objective = 0.0;
    double grad_norm = 0.0;
    double step_norm = 0.0;
    double step_length = 0.0;
    bool accepted = true;
    int evaluations = 0;
    Eigen::VectorXd moduli_gpa;
};

struct StageRow {
    int record = 0;
    double value_before = 0.0;
    double value_after = 0.0;
};

struct TraceTable {
    std::vector<TraceRow> rows;
    std::vector<StageRow> stage_events;
};

struct ProfileTable {
    Eigen::VectorXd identified_gpa;
    Eigen::VectorXd healthy_gpa;
    Eigen::VectorXd true_gpa;
};

TraceTable make_trace_table(const RunTrace& trace);
ProfileTable make_profile_table(const BeamConfig& config, const DamageParams& identified, const DamageParams& truth);

// theta_trace.csv (record, iteration, stage, E_1..E_n in GPa),
// objective_trace.csv (record, iteration, stage, objective, grad_norm, ...),
// stage_events.csv (record, value_before, value_after).
void write_trace(const std::filesystem::path& dir, const TraceTable& table);
TraceTable read_trace(const std::filesystem::path& dir);

void write_profile(const std::filesystem::path& path, const ProfileTable& table);
ProfileTable read_profile(const std::filesystem::path& path);

}  // namespace beamloc::cli
