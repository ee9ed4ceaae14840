#include "beamloc/objective.hpp"

#include "beamloc/errors.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cmath>

namespace beamloc {

std::string_view to_string(PenaltyForm form) {
    return form == PenaltyForm::Deviation ? "deviation" : "magnitude";
}

PenaltyForm penalty_form_from_string(std::string_view name) {
    if (name == "deviation") return PenaltyForm::Deviation;
    if (name == "magnitude") return PenaltyForm::Magnitude;
    throw InvalidInputError(fmt::format("unknown penalty form '{}' (expected deviation or magnitude)", name));
}

void ObjectiveWeights::validate() const {
    for (double w : {frequency, governing, curvature, gamma}) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInputError("objective weights must be finite and >= 0");
    }
    if (!(frequency > 0.0 || governing > 0.0 || curvature > 0.0)) {
        throw InvalidInputError("at least one of alpha_f, alpha_g, alpha_c must be positive");
    }
    if (!(curvature_epsilon > 0.0)) throw InvalidInputError("curvature epsilon must be positive");
}

FrequencyError eval_Ef(const MeasuredModes& measured, const ModalSolution& model) {
    const int m = measured.n_modes();
    if (model.n_retained() < m) {
        throw InvalidInputError(fmt::format("model retains {} modes, measurement has {}", model.n_retained(), m));
    }
    FrequencyError out;
    out.residuals.resize(m);
    for (int j = 0; j < m; ++j) {
        const double w_exp = measured.frequencies[j];
        if (w_exp == 0.0) throw InvalidInputError(fmt::format("measured frequency {} is zero", j));
        out.residuals[j] = (w_exp - model.frequencies[j]) / w_exp;
    }
    out.value = out.residuals.squaredNorm();
    return out;
}

double eval_Eg(const Eigen::VectorXd& measured_frequencies, const Eigen::MatrixXd& shapes,
               const Eigen::MatrixXd& stiffness, const Eigen::MatrixXd& mass) {
    double value = 0.0;
    for (Eigen::Index j = 0; j < shapes.cols(); ++j) {
        const auto phi = shapes.col(j);
        const double denom = measured_frequencies[j] * measured_frequencies[j] * phi.dot(mass * phi);
        if (!(std::abs(denom) > 0.0)) throw NumericError(fmt::format("governing residual of mode {} has zero denominator", j));
        const double r = 1.0 - phi.dot(stiffness * phi) / denom;
        value += r * r;
    }
    return value;
}

double eval_Ec(const MeasuredModes& measured, const Eigen::MatrixXd& model_curv, double epsilon) {
    if (model_curv.rows() != measured.n_modes() || model_curv.cols() != measured.n_points()) {
        throw InvalidInputError("model curvatures and measurement grid are not aligned");
    }
    const Eigen::ArrayXXd denom = measured.curvatures.array().abs().max(epsilon);
    return ((measured.curvatures - model_curv).array() / denom).square().sum();
}

Eigen::MatrixXd model_curvatures(const ModalSolution& solution, const Eigen::MatrixXd& c, int n_modes) {
    Eigen::MatrixXd out(n_modes, c.rows());
    for (int j = 0; j < n_modes; ++j) {
        out.row(j) = (c * solution.dof_map().nodal_translations(solution.mode_shapes.col(j))).transpose();
    }
    return out;
}

double penalty_value(const BeamConfig& config, const DamageParams& params, PenaltyForm form) {
    const double eh = config.healthy_youngs_modulus;
    const Eigen::ArrayXd scaled = params.youngs_moduli.array() / eh;
    return form == PenaltyForm::Deviation ? (scaled - 1.0).square().sum() : scaled.square().sum();
}

namespace {

double mac(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double num = a.dot(b);
    const double den = a.squaredNorm() * b.squaredNorm();
    return den > 0.0 ? num * num / den : 0.0;
}

}  // namespace

ObjectiveEvaluation eval_objective(const BeamConfig& config, const DamageParams& params,
                                   const MeasuredModes& measured, const ObjectiveWeights& weights,
                                   const ObjectiveOptions& options) {
    weights.validate();
    measured.validate();
    const int m = measured.n_modes();
    const int n_el = config.n_elements;
    if (measured.n_points() != config.n_nodes()) {
        throw InvalidInputError(fmt::format("measurement has {} points, beam has {} nodes", measured.n_points(),
                                            config.n_nodes()));
    }

    ModalSolution sol = solve_modes(assemble(config, params), m);
    align_modes(sol, measured);
    const DofMap& dofs = sol.dof_map();
    const int n = dofs.n_free;

    ObjectiveEvaluation out;

    // Frequencies.
    const FrequencyError ef = eval_Ef(measured, sol);
    out.frequency_error = ef.value;
    out.modes.frequency_residuals = ef.residuals;

    // Governing-equation residual.
    const bool use_g = weights.governing > 0.0;
    Eigen::MatrixXd shapes;
    Eigen::MatrixXd k_shapes, m_shapes;
    Eigen::VectorXd ratio(m), g_denom(m);
    out.modes.governing_residuals = Eigen::VectorXd::Zero(m);
    if (use_g) {
        shapes = expand_shapes(measured, sol);
        k_shapes = sol.model.stiffness * shapes;
        m_shapes = sol.model.mass * shapes;
        for (int j = 0; j < m; ++j) {
            const double w2 = measured.frequencies[j] * measured.frequencies[j];
            g_denom[j] = w2 * shapes.col(j).dot(m_shapes.col(j));
            if (!(std::abs(g_denom[j]) > 0.0)) throw NumericError(fmt::format("mode {} has zero M-norm", j));
            ratio[j] = shapes.col(j).dot(k_shapes.col(j)) / g_denom[j];
            out.modes.governing_residuals[j] = 1.0 - ratio[j];
        }
        out.governing_error = out.modes.governing_residuals.squaredNorm();
    }

    // Curvature.
    const bool use_c = weights.curvature > 0.0;
    Eigen::MatrixXd curv_weight;  // m x n_nodes: C^T (k_exp - k_mod) / d^2, per mode as rows
    out.modes.curvature_errors = Eigen::VectorXd::Zero(m);
    if (use_c) {
        const Eigen::MatrixXd c = curvature_matrix(measured.n_points(), measured.spacing());
        const Eigen::MatrixXd kmod = model_curvatures(sol, c, m);
        const Eigen::ArrayXXd denom = measured.curvatures.array().abs().max(weights.curvature_epsilon);
        const Eigen::ArrayXXd diff = (measured.curvatures - kmod).array();
        out.modes.curvature_errors = (diff / denom).square().rowwise().sum().matrix();
        out.curvature_error = out.modes.curvature_errors.sum();
        curv_weight = ((diff / denom.square()).matrix()) * c;
    }

    out.penalty = penalty_value(config, params, weights.penalty);
    out.value = weights.frequency * out.frequency_error + weights.governing * out.governing_error +
                weights.curvature * out.curvature_error + weights.gamma * out.penalty;

    // Mode pairing diagnostics.
    out.modes.mac.resize(m);
    Eigen::MatrixXd model_nodal(dofs.n_nodes, m);
    for (int j = 0; j < m; ++j) model_nodal.col(j) = dofs.nodal_translations(sol.mode_shapes.col(j));
    for (int j = 0; j < m; ++j) {
        const Eigen::VectorXd meas = measured.mode_shapes.row(j).transpose();
        out.modes.mac[j] = mac(meas, model_nodal.col(j));
        for (int h = 0; h < m; ++h) {
            if (h != j && mac(meas, model_nodal.col(h)) > out.modes.mac[j]) out.modes.mode_order_consistent = false;
        }
    }
    if (!out.modes.mode_order_consistent) {
        spdlog::warn("model and measured mode ordering disagree (possible mode crossing); pairing by frequency");
    }

    if (!options.compute_gradient) return out;

    // Gradient.
    const double eh = config.healthy_youngs_modulus;
    out.gradient.resize(n_el);
    std::vector<bool> rotation_row(n, false);
    for (int node = 0; node < dofs.n_nodes; ++node) {
        if (dofs.rotation[node] >= 0) rotation_row[dofs.rotation[node]] = true;
    }

    for (int k = 0; k < n_el; ++k) {
        const StiffnessDerivative dk = dK_dtheta(sol, params, k);
        const EigenDerivatives d = eigen_derivatives(sol, dk, options.retained_modes);
        double g = 0.0;

        for (int j = 0; j < m; ++j) {
            const double w_exp = measured.frequencies[j];
            const double w_mod = sol.frequencies[j];
            g += weights.frequency * (-(w_exp - w_mod) / (w_exp * w_exp * w_mod)) * d.eigenvalues[j];
        }

        if (use_g) {
            for (int j = 0; j < m; ++j) {
                const auto phi = shapes.col(j);
                // Only rotational entries of the expanded shape follow the model.
                double k_dphi = 0.0, m_dphi = 0.0;
                for (int r = 0; r < n; ++r) {
                    if (!rotation_row[r]) continue;
                    k_dphi += k_shapes(r, j) * d.mode_shapes(r, j);
                    m_dphi += m_shapes(r, j) * d.mode_shapes(r, j);
                }
                const double w2 = measured.frequencies[j] * measured.frequencies[j];
                const double da = dk.form(phi, phi) + 2.0 * k_dphi;
                const double db = 2.0 * m_dphi;
                const double dq = (da - ratio[j] * w2 * db) / g_denom[j];
                g += weights.governing * 2.0 * (1.0 - ratio[j]) * (-dq);
            }
        }

        if (use_c) {
            for (int j = 0; j < m; ++j) {
                const Eigen::VectorXd dt = dofs.nodal_translations(d.mode_shapes.col(j));
                g += weights.curvature * (-2.0) * curv_weight.row(j).dot(dt);
            }
        }

        const double scaled = params.youngs_moduli[k] / eh;
        const double dp = weights.penalty == PenaltyForm::Deviation ? 2.0 * (scaled - 1.0) / eh : 2.0 * scaled / eh;
        g += weights.gamma * dp;
        out.gradient[k] = g;
    }
    return out;
}

}  // namespace beamloc
