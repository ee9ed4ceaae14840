#pragma once

/**
 * @file evidence_fusion.hpp
 * @brief Dempster-Shafer fusion of per-element damage features.
 *
 * Frame of discernment: Theta = {element 0, ..., element n-1}, hypothesis i
 * meaning "element i is damaged". Every BPA produced here has focal elements
 * restricted to the singletons {i} and Theta itself, which gives Dempster's
 * rule a closed form.
 *
 * A feature vector D is mapped to a BPA through a dynamic ignorance model:
 *
 *   D_norm_i = D_i / (sum D + eps)          D_rel_i = D_i / (max D + eps)
 *   H = -(1/ln n) sum D_norm ln(D_norm + eps),   conc = 1 - H
 *   d_i = 1 - conc,   r'_i = 1 - D_rel_i,   k_i = rank_i / (n-1),
 *   c_i = 1 - 1/(1 + exp(-lambda_f D_i))
 *   alpha_i = clamp(w_d d_i + w_r r'_i + w_k k_i + w_c c_i, 0.1, 1)
 *   m({i}) = (1 - alpha_i) D_norm_i,   m(Theta) = 1 - sum_i m({i})
 */

#include "beamloc/damage_indices.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace beamloc {

inline constexpr double kIndexEpsilon = 1e-10;
inline constexpr double kAlphaMin = 0.1;
inline constexpr double kMassTolerance = 1e-12;

struct IgnoranceWeights {
    double distribution = 0.25;  // w_d
    double relative = 0.25;      // w_r
    double rank = 0.25;          // w_k
    double confidence = 0.25;    // w_c

    // Each weight in (0,1), sum 1 within 1e-12.
    void validate() const;
};

struct NormalizedIndices {
    Eigen::VectorXd norm;      // probability mass
    Eigen::VectorXd relative;  // relative severity
};

NormalizedIndices normalize_indices(const Eigen::VectorXd& d);

struct Concentration {
    double entropy = 1.0;
    double concentration = 0.0;
};

Concentration concentration(const Eigen::VectorXd& d_norm);

// 0 = largest D; ties go to the lower element index.
std::vector<int> damage_ranks(const Eigen::VectorXd& d);

struct IgnoranceComponents {
    Eigen::VectorXd distribution;       // d_i (same value for every element)
    Eigen::VectorXd relative_weakness;  // r'_i
    Eigen::VectorXd rank;               // k_i
    Eigen::VectorXd confidence;         // c_i
};

IgnoranceComponents ignorance_components(const Eigen::VectorXd& d, const std::vector<int>& ranks,
                                         double lambda_f);

Eigen::VectorXd synthesize_alpha(const IgnoranceComponents& components, const IgnoranceWeights& weights);

// Mass function over singletons and Theta.
struct Bpa {
    Eigen::VectorXd singletons;
    double theta = 1.0;

    static Bpa vacuous(int n);
    int size() const { return static_cast<int>(singletons.size()); }
    double total() const { return singletons.sum() + theta; }
};

struct FeatureBpa {
    FeatureKind kind = FeatureKind::StrainEnergy;
    Eigen::VectorXd singleton_masses;  // beta_i * D_norm_i
    Eigen::VectorXd alpha;
    Eigen::VectorXd beta;
    double sensitivity = 50.0;         // lambda_f
    double theta_mass = 1.0;
    Concentration concentration;
    IgnoranceComponents components;

    Bpa bpa() const { return Bpa{singleton_masses, theta_mass}; }
};

// The feature is rescaled to max 1 before the ignorance model, so
// lambda_f is independent of the feature's physical units.
FeatureBpa build_bpa(const FeatureVector& feature, const IgnoranceWeights& weights, double lambda_f);

struct FusedEvidence {
    Eigen::VectorXd singleton_masses;
    double theta_mass = 1.0;
    double conflict = 0.0;            // K, for a fold: 1 - prod(1 - K_step)
    Eigen::VectorXd belief;           // Bel({i}) = m({i})
    Eigen::VectorXd plausibility;     // Pl({i}) = m({i}) + m(Theta)

    int size() const { return static_cast<int>(singleton_masses.size()); }
    int argmax() const;
    Bpa bpa() const { return Bpa{singleton_masses, theta_mass}; }
};

// Throws TotalConflictError when K >= 1 - 1e-12.
FusedEvidence dempster_combine(const Bpa& a, const Bpa& b);

// Left fold of dempster_combine over >= 2 BPAs.
FusedEvidence fuse_features(const std::vector<FeatureBpa>& bpas);

// {i : Bel({i}) >= tau * max Bel}. When the rule admits only the argmax and
// fallback_top_n > 1, the top-N beliefs are returned instead. Sorted ascending.
std::vector<int> filter_candidates(const FusedEvidence& fused, double tau_fraction, int fallback_top_n = 0);

// Process-wide record of every combination performed, for conservation audits.
struct FusionAudit {
    std::uint64_t combinations = 0;
    double max_mass_error = 0.0;
};

FusionAudit fusion_audit();

}  // namespace beamloc
