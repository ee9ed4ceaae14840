#include "beamloc/damage_indices.hpp"

#include "beamloc/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace beamloc {

std::string_view to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::Frequency: return "frequency";
        case FeatureKind::Curvature: return "curvature";
        case FeatureKind::StrainEnergy: return "strain_energy";
        case FeatureKind::Flexibility: return "flexibility";
    }
    return "unknown";
}

FeatureKind feature_kind_from_string(std::string_view name) {
    if (name == "frequency") return FeatureKind::Frequency;
    if (name == "curvature") return FeatureKind::Curvature;
    if (name == "strain_energy") return FeatureKind::StrainEnergy;
    if (name == "flexibility") return FeatureKind::Flexibility;
    throw InvalidInputError(fmt::format(
        "unknown feature '{}' (expected frequency, curvature, strain_energy or flexibility)", name));
}

namespace {

void require_same_layout(const MeasuredModes& a, const MeasuredModes& b) {
    if (a.n_modes() != b.n_modes()) {
        throw InvalidInputError(fmt::format("mode count mismatch: {} vs {}", a.n_modes(), b.n_modes()));
    }
    if (a.n_points() != b.n_points() || !a.grid.isApprox(b.grid, 1e-12)) {
        throw InvalidInputError("measurement grids differ");
    }
}

Eigen::Matrix<double, 4, Eigen::Dynamic> element_rows(const DofMap& dofs, int element,
                                                      const Eigen::MatrixXd& shapes) {
    Eigen::Matrix<double, 4, Eigen::Dynamic> out = Eigen::MatrixXd::Zero(4, shapes.cols());
    const auto idx = dofs.element_dofs(element);
    for (int a = 0; a < 4; ++a) {
        if (idx[a] >= 0) out.row(a) = shapes.row(idx[a]);
    }
    return out;
}

}  // namespace

FeatureVector frequency_index(const MeasuredModes& undamaged, const MeasuredModes& damaged,
                              const ModalSolution& healthy) {
    require_same_layout(undamaged, damaged);
    const Eigen::MatrixXd shapes = condensed_shapes(damaged, healthy.model);
    const int n_el = healthy.model.n_elements();
    FeatureVector out{FeatureKind::Frequency, Eigen::VectorXd::Zero(n_el)};
    Eigen::VectorXd share(n_el);
    for (int j = 0; j < damaged.n_modes(); ++j) {
        for (int i = 0; i < n_el; ++i) {
            share[i] = std::abs(healthy.model.element_form(i, shapes.col(j), shapes.col(j)));
        }
        const double total = share.sum();
        if (!(total > 0.0)) continue;
        out.values += (std::abs(damaged.frequencies[j] - undamaged.frequencies[j]) / total) * share;
    }
    return out;
}

FeatureVector curvature_index(const MeasuredModes& undamaged, const MeasuredModes& damaged) {
    require_same_layout(undamaged, damaged);
    const Eigen::MatrixXd diff = undamaged.curvatures - damaged.curvatures;
    const Eigen::VectorXd rms = (diff.array().square().colwise().sum() / diff.rows()).sqrt().transpose();
    const int n_el = undamaged.n_points() - 1;
    FeatureVector out{FeatureKind::Curvature, Eigen::VectorXd(n_el)};
    for (int i = 0; i < n_el; ++i) out.values[i] = 0.5 * (rms[i] + rms[i + 1]);
    return out;
}

FeatureVector msecr_index(const Eigen::MatrixXd& undamaged_shapes, const Eigen::MatrixXd& damaged_shapes,
                          const Assembly& model) {
    const int n = model.n_free();
    if (undamaged_shapes.rows() != n || damaged_shapes.rows() != n ||
        undamaged_shapes.cols() != damaged_shapes.cols()) {
        throw InvalidInputError(fmt::format("strain-energy shapes must both be {}x m with equal m", n));
    }
    const int n_el = model.n_elements();
    FeatureVector out{FeatureKind::StrainEnergy, Eigen::VectorXd(n_el)};
    for (int i = 0; i < n_el; ++i) {
        double se_und = 0.0;
        double se_dam = 0.0;
        for (Eigen::Index j = 0; j < undamaged_shapes.cols(); ++j) {
            se_und += model.element_form(i, undamaged_shapes.col(j), undamaged_shapes.col(j));
            se_dam += model.element_form(i, damaged_shapes.col(j), damaged_shapes.col(j));
        }
        out.values[i] = std::abs(se_und - se_dam);
    }
    return out;
}

FeatureVector msecr_index(const MeasuredModes& undamaged, const MeasuredModes& damaged,
                          const ModalSolution& healthy) {
    require_same_layout(undamaged, damaged);
    return msecr_index(condensed_shapes(undamaged, healthy.model), condensed_shapes(damaged, healthy.model),
                       healthy.model);
}

Eigen::MatrixXd modal_flexibility(const Eigen::MatrixXd& shapes, const Eigen::VectorXd& freqs) {
    if (shapes.cols() != freqs.size()) throw InvalidInputError("one frequency per mode shape required");
    for (Eigen::Index j = 0; j < freqs.size(); ++j) {
        if (!(std::abs(freqs[j]) > 0.0)) throw NumericError(fmt::format("frequency {} is zero", j));
    }
    const Eigen::VectorXd inv = freqs.array().square().inverse();
    return shapes * inv.asDiagonal() * shapes.transpose();
}

FeatureVector flexibility_index(const Eigen::MatrixXd& undamaged_shapes, const Eigen::VectorXd& undamaged_freqs,
                                const Eigen::MatrixXd& damaged_shapes, const Eigen::VectorXd& damaged_freqs,
                                const DofMap& dof_map, double element_length) {
    if (undamaged_shapes.cols() < 1) throw InvalidInputError("flexibility index needs at least one mode");
    if (undamaged_shapes.rows() != dof_map.n_free || damaged_shapes.rows() != dof_map.n_free) {
        throw InvalidInputError("flexibility shapes must span the free DOFs");
    }
    auto weights = [](const Eigen::VectorXd& freqs) -> Eigen::VectorXd {
        for (Eigen::Index j = 0; j < freqs.size(); ++j) {
            if (!(std::abs(freqs[j]) > 0.0) || !std::isfinite(freqs[j])) {
                throw NumericError(fmt::format("frequency {} is zero or non-finite", j));
            }
        }
        return freqs.array().square().inverse();
    };
    const Eigen::VectorXd w_und = weights(undamaged_freqs);
    const Eigen::VectorXd w_dam = weights(damaged_freqs);
    const Eigen::Matrix<double, 2, 4> s = hermite_curvature_operator(element_length);

    const int n_el = dof_map.n_nodes - 1;
    FeatureVector out{FeatureKind::Flexibility, Eigen::VectorXd(n_el)};
    for (int e = 0; e < n_el; ++e) {
        const Eigen::MatrixXd cu = s * element_rows(dof_map, e, undamaged_shapes);
        const Eigen::MatrixXd cd = s * element_rows(dof_map, e, damaged_shapes);
        const Eigen::Matrix2d f_und = cu * w_und.asDiagonal() * cu.transpose();
        const Eigen::Matrix2d f_dam = cd * w_dam.asDiagonal() * cd.transpose();
        out.values[e] = (f_dam - f_und).norm();
    }
    return out;
}

FeatureVector flexibility_index(const MeasuredModes& undamaged, const MeasuredModes& damaged,
                                const ModalSolution& healthy) {
    require_same_layout(undamaged, damaged);
    return flexibility_index(condensed_shapes(undamaged, healthy.model), undamaged.frequencies,
                             condensed_shapes(damaged, healthy.model), damaged.frequencies, healthy.dof_map(),
                             undamaged.spacing());
}

FeatureVector compute_feature(FeatureKind kind, const MeasuredModes& undamaged, const MeasuredModes& damaged,
                              const ModalSolution& healthy) {
    switch (kind) {
        case FeatureKind::Frequency: return frequency_index(undamaged, damaged, healthy);
        case FeatureKind::Curvature: return curvature_index(undamaged, damaged);
        case FeatureKind::StrainEnergy: return msecr_index(undamaged, damaged, healthy);
        case FeatureKind::Flexibility: return flexibility_index(undamaged, damaged, healthy);
    }
    throw InvalidInputError("unknown feature kind");
}

}  // namespace beamloc
