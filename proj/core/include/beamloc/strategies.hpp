#pragma once

// Localization pipelines built on the objective and the minimizers.
//
// Every pipeline optimizes dimensionless multipliers e = theta / E_healthy.
// A StiffnessParameterization ties each optimizer variable to a group of
// elements that share one modulus; elements outside every group keep the
// value they have in the base parameter vector.

#include "beamloc/beam_model.hpp"
#include "beamloc/damage_indices.hpp"
#include "beamloc/evidence_fusion.hpp"
#include "beamloc/modal_data.hpp"
#include "beamloc/objective.hpp"
#include "beamloc/optimize.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace beamloc {

inline constexpr double kMultiplierLower = 0.05;
inline constexpr double kMultiplierUpper = 1.5;

enum class Strategy { Plain, Hierarchical, Hybrid };

std::string_view to_string(Strategy strategy);
Strategy strategy_from_string(std::string_view name);

struct StiffnessParameterization {
    std::vector<std::vector<int>> groups;   // 0-based element indices per variable
    DamageParams base;                      // pinned values for elements in no group

    static StiffnessParameterization per_element(const std::vector<int>& elements, const DamageParams& base);

    int n_variables() const { return static_cast<int>(groups.size()); }
    void validate(const BeamConfig& config) const;

    DamageParams to_params(const BeamConfig& config, const Eigen::VectorXd& x) const;
    // Group means of theta / E_healthy.
    Eigen::VectorXd to_variables(const BeamConfig& config, const DamageParams& params) const;
    // dJ/dx_g = sum over the group of E_healthy * dJ/dtheta_i.
    Eigen::VectorXd reduce_gradient(const BeamConfig& config, const Eigen::VectorXd& dtheta) const;
};

// Optimizer settings with the multiplier box filled in.
OptimizerConfig with_multiplier_bounds(OptimizerConfig config, int n_variables);

enum class LocalizationStatus { Converged, Failed };

std::string_view to_string(LocalizationStatus status);

struct LocalizationResult {
    DamageParams params;
    RunTrace trace;
    LocalizationStatus status = LocalizationStatus::Converged;
    std::string message;
    double final_value = 0.0;
    double final_grad_norm = 0.0;   // projected, dimensionless, over the optimized variables
};

// Minimizes J over the given parameterization; trace records carry theta and `stage`.
LocalizationResult update_parameters(const BeamConfig& config, const MeasuredModes& measured,
                                     const ObjectiveWeights& weights, const OptimizerConfig& opt,
                                     const StiffnessParameterization& parameterization,
                                     const DamageParams& start, std::string_view stage = "plain");

// Plain FEM updating of the listed elements, all others pinned to `base`.
LocalizationResult update_subset(const BeamConfig& config, const MeasuredModes& measured,
                                 const ObjectiveWeights& weights, const OptimizerConfig& opt,
                                 const std::vector<int>& elements, const DamageParams& base);

// Plain FEM updating of every element, starting from the healthy beam.
LocalizationResult plain_localize(const BeamConfig& config, const MeasuredModes& measured,
                                  const ObjectiveWeights& weights, const OptimizerConfig& opt);

// Frequency and governing terms only, from a homogeneous start.
LocalizationResult healthy_calibration(const BeamConfig& config, const MeasuredModes& measured_healthy,
                                       const ObjectiveWeights& weights, const OptimizerConfig& opt,
                                       double initial_modulus);

struct Cluster {
    int first = 0;    // 0-based, inclusive
    int last = 0;     // inclusive
    bool active = true;

    int size() const { return last - first + 1; }
    std::vector<int> elements() const;
};

struct ClusterState {
    std::vector<Cluster> clusters;
    int stage = 0;

    static ClusterState initial(int n_groups, int group_size);
    std::vector<Cluster> active() const;
    int n_active() const;
    void validate(int n_elements) const;
};

struct HierarchicalConfig {
    int initial_groups = 5;            // N_g
    int group_size = 4;                // G_s
    double stage_tol_fraction = 0.9;
    double final_grad_tolerance = 0.0; // <= 0: reuse the optimizer's grad_tolerance
    int max_stages = 64;

    void validate(const BeamConfig& config) const;
};

struct HierarchicalResult {
    LocalizationResult result;
    ClusterState clusters;
};

HierarchicalResult hierarchical_localize(const BeamConfig& config, const MeasuredModes& measured,
                                         const ObjectiveWeights& weights, const OptimizerConfig& opt,
                                         const HierarchicalConfig& hierarchical);

struct FusionConfig {
    std::vector<FeatureKind> features{FeatureKind::StrainEnergy, FeatureKind::Flexibility};
    IgnoranceWeights weights;
    double lambda_f = 50.0;

    void validate() const;
};

struct HybridConfig {
    double tau_fraction = 0.7;
    int fallback_top_n = 0;            // 0 disables the top-N fallback
    FusionConfig fusion;
    std::optional<std::vector<int>> forced_candidates;   // bypasses the filter when set

    void validate() const;
};

struct EvidenceState {
    std::vector<FeatureVector> features;
    std::vector<FeatureBpa> bpas;
    FusedEvidence fused;
};

EvidenceState gather_evidence(const BeamConfig& config, const MeasuredModes& measured_healthy,
                              const MeasuredModes& measured_damaged, const FusionConfig& fusion);

struct HybridResult {
    LocalizationResult result;
    EvidenceState evidence;
    std::vector<int> candidates;   // 0-based
};

HybridResult hybrid_localize(const BeamConfig& config, const MeasuredModes& measured_healthy,
                             const MeasuredModes& measured_damaged, const HybridConfig& hybrid,
                             const ObjectiveWeights& weights, const OptimizerConfig& opt);

struct GammaSweepPoint {
    double gamma = 0.0;
    double misfit = 0.0;    // data part of J
    double penalty = 0.0;   // P(theta), unweighted
    DamageParams params;
};

// Plain updating repeated for each gamma; the points trace an L-curve.
std::vector<GammaSweepPoint> gamma_sweep(const BeamConfig& config, const MeasuredModes& measured,
                                         const ObjectiveWeights& weights, const OptimizerConfig& opt,
                                         const std::vector<double>& gammas);

}  // namespace beamloc
