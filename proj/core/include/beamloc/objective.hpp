#pragma once

/**
 * @file objective.hpp
 * @brief Model-updating objective and its analytic gradient.
 *
 *   J_reg(theta) = a_f E_f + a_g E_g + a_c E_c + gamma * P(theta)
 *
 *   E_f = sum_j ((w_j^exp - w_j^mod) / w_j^exp)^2
 *   E_g = sum_j (1 - phi^T K phi / ((w_j^exp)^2 phi^T M phi))^2,  phi = expanded measured shape
 *   E_c = sum_j sum_i ((k_j^exp(x_i) - k_j^mod(x_i)) / max(|k_j^exp(x_i)|, eps))^2
 *
 * Curvatures come from curvature_matrix applied to nodal translations at all
 * nodes, supports included.
 *
 * Measured shapes are expanded to the model DOFs with the rotations of the
 * current model's modes, so E_g depends on theta through the rotations as
 * well as through K; the gradient accounts for both.
 *
 * The penalty defaults to the deviation form P = sum_i ((theta_i - E_h)/E_h)^2;
 * the magnitude form P = sum_i (theta_i/E_h)^2 is available.
 */

#include "beamloc/beam_model.hpp"
#include "beamloc/modal_data.hpp"

#include <Eigen/Dense>

#include <string_view>

namespace beamloc {

enum class PenaltyForm { Deviation, Magnitude };

std::string_view to_string(PenaltyForm form);
PenaltyForm penalty_form_from_string(std::string_view name);

struct ObjectiveWeights {
    double frequency = 1.0;        // alpha_f
    double governing = 1.0;        // alpha_g
    double curvature = 1.0;        // alpha_c
    double gamma = 1e-3;           // Tikhonov coefficient (dimensionless)
    double curvature_epsilon = 1e-8;
    PenaltyForm penalty = PenaltyForm::Deviation;

    void validate() const;
};

struct ObjectiveOptions {
    bool compute_gradient = true;
    int retained_modes = 0;   // modes in the eigenvector-derivative expansion; <= 0 means all
};

struct ModeDiagnostics {
    Eigen::VectorXd frequency_residuals;   // (w_exp - w_mod) / w_exp
    Eigen::VectorXd governing_residuals;   // 1 - Rayleigh ratio
    Eigen::VectorXd curvature_errors;      // per-mode share of E_c
    Eigen::VectorXd mac;                   // MAC(measured_j, model_j)
    bool mode_order_consistent = true;     // each measured mode pairs best with the same-index model mode
};

struct ObjectiveEvaluation {
    double value = 0.0;                // J_reg
    double frequency_error = 0.0;      // E_f
    double governing_error = 0.0;      // E_g
    double curvature_error = 0.0;      // E_c (0 when its weight is 0; not evaluated)
    double penalty = 0.0;              // P(theta), before multiplying by gamma
    Eigen::VectorXd gradient;          // dJ_reg/dtheta (1/Pa); empty when not requested
    ModeDiagnostics modes;

    double data_misfit(const ObjectiveWeights& w) const {
        return w.frequency * frequency_error + w.governing * governing_error + w.curvature * curvature_error;
    }
};

struct FrequencyError {
    double value = 0.0;
    Eigen::VectorXd residuals;
};

FrequencyError eval_Ef(const MeasuredModes& measured, const ModalSolution& model);

// `shapes` are measured shapes expanded to free-DOF columns.
double eval_Eg(const Eigen::VectorXd& measured_frequencies, const Eigen::MatrixXd& shapes,
               const Eigen::MatrixXd& stiffness, const Eigen::MatrixXd& mass);

// `model_curvatures` is n_modes x n_points.
double eval_Ec(const MeasuredModes& measured, const Eigen::MatrixXd& model_curvatures, double epsilon);

// Curvature of each model mode at the nodes, C * (nodal translations).
Eigen::MatrixXd model_curvatures(const ModalSolution& solution, const Eigen::MatrixXd& c, int n_modes);

ObjectiveEvaluation eval_objective(const BeamConfig& config, const DamageParams& params,
                                   const MeasuredModes& measured, const ObjectiveWeights& weights,
                                   const ObjectiveOptions& options = {});

double penalty_value(const BeamConfig& config, const DamageParams& params, PenaltyForm form);

}  // namespace beamloc
