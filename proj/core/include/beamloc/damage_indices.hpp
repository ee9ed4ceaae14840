#pragma once

#include "beamloc/beam_model.hpp"
#include "beamloc/modal_data.hpp"

#include <Eigen/Dense>

#include <string_view>

namespace beamloc {

enum class FeatureKind { Frequency, Curvature, StrainEnergy, Flexibility };

std::string_view to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(std::string_view name);

// Per-element damage-sensitive feature, nonnegative and finite.
struct FeatureVector {
    FeatureKind kind = FeatureKind::StrainEnergy;
    Eigen::VectorXd values;

    int size() const { return static_cast<int>(values.size()); }
};

// Frequency shifts |w_dam - w_und| distributed over elements by the normalized
// modal strain-energy shares |phi_dam^T K_i phi_dam| of the healthy K_i.
FeatureVector frequency_index(const MeasuredModes& undamaged, const MeasuredModes& damaged,
                              const ModalSolution& healthy);

// Nodal RMS of the curvature change over modes, averaged onto elements.
FeatureVector curvature_index(const MeasuredModes& undamaged, const MeasuredModes& damaged);

// |SE_i^und - SE_i^dam| with SE_i = sum_j phi_j^T K_i phi_j. Shapes are
// free-DOF columns; K_i are the blocks of `model`.
FeatureVector msecr_index(const Eigen::MatrixXd& undamaged_shapes, const Eigen::MatrixXd& damaged_shapes,
                          const Assembly& model);
// Measured overload: shapes lifted by static condensation on the healthy model, healthy K_i.
FeatureVector msecr_index(const MeasuredModes& undamaged, const MeasuredModes& damaged,
                          const ModalSolution& healthy);

// Frobenius norm of the change in element curvature compliance
// S_e L_e F L_e^T S_e^T with modal flexibility F = sum_j phi_j phi_j^T / w_j^2.
FeatureVector flexibility_index(const Eigen::MatrixXd& undamaged_shapes, const Eigen::VectorXd& undamaged_freqs,
                                const Eigen::MatrixXd& damaged_shapes, const Eigen::VectorXd& damaged_freqs,
                                const DofMap& dof_map, double element_length);
FeatureVector flexibility_index(const MeasuredModes& undamaged, const MeasuredModes& damaged,
                                const ModalSolution& healthy);

// Modal flexibility matrix over free DOFs.
Eigen::MatrixXd modal_flexibility(const Eigen::MatrixXd& shapes, const Eigen::VectorXd& freqs);

FeatureVector compute_feature(FeatureKind kind, const MeasuredModes& undamaged, const MeasuredModes& damaged,
                              const ModalSolution& healthy);

}  // namespace beamloc
