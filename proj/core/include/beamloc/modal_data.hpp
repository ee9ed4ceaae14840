#pragma once

#include "beamloc/beam_model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace beamloc {

struct ElementDamage {
    int element = 0;          // 0-based element index
    double reduction = 0.0;   // fractional stiffness loss in [0, 1)
};

struct DamageScenario {
    std::string name;
    std::vector<ElementDamage> damaged_elements;
    double noise_level = 0.0;   // eta
    std::uint64_t seed = 0;

    // Throws InvalidInputError on duplicate/out-of-range elements or bad reductions.
    void validate(const BeamConfig& config) const;
};

// Modal data as a monitoring system would see it: translations at the
// measurement nodes only (constrained nodes read exactly 0).
struct MeasuredModes {
    Eigen::VectorXd frequencies;   // omega_j (rad/s)
    Eigen::MatrixXd mode_shapes;   // n_modes x n_nodes
    Eigen::MatrixXd curvatures;    // n_modes x n_nodes, curvature_matrix applied to each shape
    Eigen::VectorXd grid;          // node coordinates (m)

    int n_modes() const { return static_cast<int>(frequencies.size()); }
    int n_points() const { return static_cast<int>(grid.size()); }
    double spacing() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }

    void validate() const;
};

DamageParams make_damaged_params(const BeamConfig& config, const DamageScenario& scenario);

// Noise model per mode j and node i, with independent standard normals:
//   omega_j  <- omega_j (1 + eta N)
//   phi_j(x_i) <- phi_j(x_i) + eta |phi_j(x_i)| N
// Curvatures are taken from the noisy shapes. Deterministic in `seed`.
MeasuredModes synthesize_measurement(const BeamConfig& config, const DamageParams& params, int n_modes,
                                     double noise_level, std::uint64_t seed);

// Noise-free sampling of an existing solution onto the node grid.
MeasuredModes sample_modes(const BeamConfig& config, const ModalSolution& solution);

// Inner product of measured mode `mode` with the model's nodal translations.
double mode_correlation(const MeasuredModes& measured, const ModalSolution& solution, int mode);

// Flips model modes whose translations point against the measured ones.
void align_modes(ModalSolution& solution, const MeasuredModes& measured);

// Lift measured translations to free-DOF vectors (columns, one per mode).
// Rotational entries come from the first n_modes shapes of `reference`,
// sign-matched to the measurement.
Eigen::MatrixXd expand_shapes(const MeasuredModes& measured, const ModalSolution& reference);

// Lift measured translations to free-DOF vectors by static condensation on
// `model`: rotations r = -K_rr^{-1} K_rt w minimize the strain energy for the
// given translations w.
Eigen::MatrixXd condensed_shapes(const MeasuredModes& measured, const Assembly& model);

}  // namespace beamloc
