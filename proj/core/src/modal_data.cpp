#include "beamloc/modal_data.hpp"

#include "beamloc/errors.hpp"

#include <fmt/format.h>

#include <algorithm>

#include <cmath>
#include <random>
#include <set>

namespace beamloc {

void DamageScenario::validate(const BeamConfig& config) const {
    std::set<int> seen;
    for (const auto& d : damaged_elements) {
        if (d.element < 0 || d.element >= config.n_elements) {
            throw InvalidInputError(fmt::format("scenario '{}': element {} outside [0, {})", name, d.element,
                                                config.n_elements));
        }
        if (!seen.insert(d.element).second) {
            throw InvalidInputError(fmt::format("scenario '{}': element {} listed twice", name, d.element));
        }
        if (!(d.reduction >= 0.0 && d.reduction < 1.0)) {
            throw InvalidInputError(
                fmt::format("scenario '{}': reduction {} for element {} not in [0, 1)", name, d.reduction, d.element));
        }
    }
    if (!(noise_level >= 0.0) || !std::isfinite(noise_level)) {
        throw InvalidInputError(fmt::format("scenario '{}': noise level must be >= 0", name));
    }
}

void MeasuredModes::validate() const {
    const int m = n_modes();
    if (m < 1) throw InvalidInputError("measurement holds no modes");
    for (int j = 0; j < m; ++j) {
        if (!(frequencies[j] > 0.0)) {
            throw InvalidInputError(fmt::format("measured frequency {} is not positive ({})", j, frequencies[j]));
        }
    }
    if (mode_shapes.rows() != m || mode_shapes.cols() != n_points() || curvatures.rows() != m ||
        curvatures.cols() != n_points()) {
        throw InvalidInputError(fmt::format("measurement shape/curvature tables must be {}x{}", m, n_points()));
    }
}

DamageParams make_damaged_params(const BeamConfig& config, const DamageScenario& scenario) {
    config.validate();
    scenario.validate(config);
    DamageParams params = DamageParams::uniform(config);
    for (const auto& d : scenario.damaged_elements) {
        params.youngs_moduli[d.element] = config.healthy_youngs_modulus * (1.0 - d.reduction);
    }
    return params;
}

namespace {

Eigen::VectorXd node_grid(const BeamConfig& config) {
    return Eigen::VectorXd::LinSpaced(config.n_nodes(), 0.0, config.length);
}

}  // namespace

MeasuredModes sample_modes(const BeamConfig& config, const ModalSolution& solution) {
    const int m = solution.n_modes;
    const int n = config.n_nodes();
    MeasuredModes out;
    out.grid = node_grid(config);
    out.frequencies = solution.frequencies.head(m);
    out.mode_shapes.resize(m, n);
    for (int j = 0; j < m; ++j) {
        out.mode_shapes.row(j) = solution.dof_map().nodal_translations(solution.mode_shapes.col(j)).transpose();
    }
    const Eigen::MatrixXd c = curvature_matrix(n, config.element_length());
    out.curvatures = out.mode_shapes * c.transpose();
    return out;
}

MeasuredModes synthesize_measurement(const BeamConfig& config, const DamageParams& params, int n_modes,
                                     double noise_level, std::uint64_t seed) {
    if (n_modes < 1) throw InvalidInputError("n_modes must be >= 1");
    if (!(noise_level >= 0.0)) throw InvalidInputError("noise level must be >= 0");

    const ModalSolution solution = solve_modes(assemble(config, params), n_modes);
    MeasuredModes out = sample_modes(config, solution);
    if (noise_level == 0.0) return out;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int j = 0; j < n_modes; ++j) {
        out.frequencies[j] *= 1.0 + noise_level * normal(rng);
        for (int i = 0; i < out.n_points(); ++i) {
            const double phi = out.mode_shapes(j, i);
            out.mode_shapes(j, i) = phi + noise_level * std::abs(phi) * normal(rng);
        }
    }
    const Eigen::MatrixXd c = curvature_matrix(out.n_points(), config.element_length());
    out.curvatures = out.mode_shapes * c.transpose();
    return out;
}

double mode_correlation(const MeasuredModes& measured, const ModalSolution& solution, int mode) {
    const Eigen::VectorXd model = solution.dof_map().nodal_translations(solution.mode_shapes.col(mode));
    return measured.mode_shapes.row(mode).dot(model);
}

void align_modes(ModalSolution& solution, const MeasuredModes& measured) {
    const int m = std::min(measured.n_modes(), solution.n_retained());
    for (int j = 0; j < m; ++j) {
        if (mode_correlation(measured, solution, j) < 0.0) solution.mode_shapes.col(j) *= -1.0;
    }
}

Eigen::MatrixXd expand_shapes(const MeasuredModes& measured, const ModalSolution& reference) {
    const int m = measured.n_modes();
    const auto& dofs = reference.dof_map();
    if (measured.n_points() != dofs.n_nodes) {
        throw InvalidInputError(fmt::format("measurement has {} points but the model has {} nodes",
                                            measured.n_points(), dofs.n_nodes));
    }
    if (reference.n_retained() < m) {
        throw InvalidInputError(fmt::format("reference solution holds {} modes, measurement {}",
                                            reference.n_retained(), m));
    }
    Eigen::MatrixXd out(dofs.n_free, m);
    for (int j = 0; j < m; ++j) {
        const double sign = mode_correlation(measured, reference, j) < 0.0 ? -1.0 : 1.0;
        for (int node = 0; node < dofs.n_nodes; ++node) {
            if (dofs.translation[node] >= 0) out(dofs.translation[node], j) = measured.mode_shapes(j, node);
            if (dofs.rotation[node] >= 0) {
                out(dofs.rotation[node], j) = sign * reference.mode_shapes(dofs.rotation[node], j);
            }
        }
    }
    return out;
}

Eigen::MatrixXd condensed_shapes(const MeasuredModes& measured, const Assembly& model) {
    const DofMap& dofs = model.dof_map;
    if (measured.n_points() != dofs.n_nodes) {
        throw InvalidInputError(fmt::format("measurement has {} points but the model has {} nodes",
                                            measured.n_points(), dofs.n_nodes));
    }
    std::vector<int> tr, ro;
    std::vector<int> tr_node;
    for (int node = 0; node < dofs.n_nodes; ++node) {
        if (dofs.translation[node] >= 0) {
            tr.push_back(dofs.translation[node]);
            tr_node.push_back(node);
        }
        if (dofs.rotation[node] >= 0) ro.push_back(dofs.rotation[node]);
    }
    const auto nt = static_cast<Eigen::Index>(tr.size());
    const auto nr = static_cast<Eigen::Index>(ro.size());
    Eigen::MatrixXd k_rr(nr, nr), k_rt(nr, nt);
    for (Eigen::Index a = 0; a < nr; ++a) {
        for (Eigen::Index b = 0; b < nr; ++b) k_rr(a, b) = model.stiffness(ro[a], ro[b]);
        for (Eigen::Index b = 0; b < nt; ++b) k_rt(a, b) = model.stiffness(ro[a], tr[b]);
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(k_rr);
    if (llt.info() != Eigen::Success) throw NumericError("rotational stiffness block is not positive definite");

    const int m = measured.n_modes();
    Eigen::MatrixXd w(nt, m);
    for (int j = 0; j < m; ++j) {
        for (Eigen::Index a = 0; a < nt; ++a) w(a, j) = measured.mode_shapes(j, tr_node[a]);
    }
    const Eigen::MatrixXd r = -llt.solve(k_rt * w);
    Eigen::MatrixXd out(dofs.n_free, m);
    for (Eigen::Index a = 0; a < nt; ++a) out.row(tr[a]) = w.row(a);
    for (Eigen::Index a = 0; a < nr; ++a) out.row(ro[a]) = r.row(a);
    return out;
}

}  // namespace beamloc
