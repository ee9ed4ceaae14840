#include "beamloc/beam_model.hpp"

#include "beamloc/errors.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <cmath>

namespace beamloc {

std::string_view to_string(BoundaryCondition bc) {
    switch (bc) {
        case BoundaryCondition::SimplySupported: return "simply_supported";
        case BoundaryCondition::Cantilever: return "cantilever";
    }
    return "unknown";
}

BoundaryCondition boundary_condition_from_string(std::string_view name) {
    if (name == "simply_supported") return BoundaryCondition::SimplySupported;
    if (name == "cantilever") return BoundaryCondition::Cantilever;
    throw InvalidInputError(fmt::format(
        "unknown boundary condition '{}' (expected simply_supported or cantilever)", name));
}

void BeamConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw InvalidInputError(fmt::format("beam {} must be positive, got {}", name, v));
        }
    };
    positive(length, "length");
    positive(width, "width");
    positive(thickness, "thickness");
    positive(density, "density");
    positive(healthy_youngs_modulus, "healthy_youngs_modulus");
    if (n_elements < 2) {
        throw InvalidInputError(fmt::format("n_elements must be >= 2, got {}", n_elements));
    }
}

BeamConfig reference_beam(BoundaryCondition bc, int n_elements) {
    BeamConfig config;
    config.length = 1.0;
    config.width = 0.020;
    config.thickness = 0.00325;
    config.density = 2700.0;
    config.healthy_youngs_modulus = 70e9;
    config.n_elements = n_elements;
    config.boundary_condition = bc;
    return config;
}

DamageParams DamageParams::uniform(const BeamConfig& config) {
    return uniform(config, config.healthy_youngs_modulus);
}

DamageParams DamageParams::uniform(const BeamConfig& config, double modulus) {
    return DamageParams{Eigen::VectorXd::Constant(config.n_elements, modulus)};
}

void DamageParams::validate(const BeamConfig& config) const {
    if (youngs_moduli.size() != config.n_elements) {
        throw InvalidInputError(fmt::format("damage parameter length {} does not match n_elements {}",
                                            youngs_moduli.size(), config.n_elements));
    }
    for (Eigen::Index i = 0; i < youngs_moduli.size(); ++i) {
        if (!(youngs_moduli[i] > 0.0) || !std::isfinite(youngs_moduli[i])) {
            throw InvalidInputError(
                fmt::format("Young's modulus of element {} must be positive, got {}", i, youngs_moduli[i]));
        }
    }
}

// ============================================================================
// DOF numbering
// ============================================================================

std::array<int, 4> DofMap::element_dofs(int element) const {
    return {translation[element], rotation[element], translation[element + 1], rotation[element + 1]};
}

Eigen::VectorXd DofMap::nodal_translations(const Eigen::Ref<const Eigen::VectorXd>& free) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_nodes);
    for (int n = 0; n < n_nodes; ++n) {
        if (translation[n] >= 0) out[n] = free[translation[n]];
    }
    return out;
}

DofMap make_dof_map(const BeamConfig& config) {
    DofMap map;
    map.n_nodes = config.n_nodes();
    map.translation.assign(map.n_nodes, -1);
    map.rotation.assign(map.n_nodes, -1);

    std::vector<bool> fixed_w(map.n_nodes, false), fixed_r(map.n_nodes, false);
    switch (config.boundary_condition) {
        case BoundaryCondition::SimplySupported:
            fixed_w.front() = true;
            fixed_w.back() = true;
            break;
        case BoundaryCondition::Cantilever:
            fixed_w.front() = true;
            fixed_r.front() = true;
            break;
    }

    int next = 0;
    for (int n = 0; n < map.n_nodes; ++n) {
        if (!fixed_w[n]) map.translation[n] = next++;
        if (!fixed_r[n]) map.rotation[n] = next++;
    }
    map.n_free = next;
    return map;
}

// ============================================================================
// Element matrices
// ============================================================================

Eigen::Matrix4d hermite_stiffness(double ei, double h) {
    const double h2 = h * h;
    Eigen::Matrix4d k;
    k << 12, 6 * h, -12, 6 * h,
         6 * h, 4 * h2, -6 * h, 2 * h2,
         -12, -6 * h, 12, -6 * h,
         6 * h, 2 * h2, -6 * h, 4 * h2;
    return k * (ei / (h2 * h));
}

Eigen::Matrix4d hermite_mass(double rho_a, double h) {
    const double h2 = h * h;
    Eigen::Matrix4d m;
    m << 156, 22 * h, 54, -13 * h,
         22 * h, 4 * h2, 13 * h, -3 * h2,
         54, 13 * h, 156, -22 * h,
         -13 * h, -3 * h2, -22 * h, 4 * h2;
    return m * (rho_a * h / 420.0);
}

Eigen::Matrix<double, 2, 4> hermite_curvature_operator(double h) {
    const double h2 = h * h;
    Eigen::Matrix<double, 2, 4> s;
    s << -6 / h2, -4 / h, 6 / h2, -2 / h,
          6 / h2,  2 / h, -6 / h2, 4 / h;
    return s;
}

// ============================================================================
// Assembly
// ============================================================================

Eigen::MatrixXd Assembly::element_stiffness_global(int element) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_free(), n_free());
    const auto dofs = dof_map.element_dofs(element);
    const auto& ke = element_stiffness[element];
    for (int a = 0; a < 4; ++a) {
        if (dofs[a] < 0) continue;
        for (int b = 0; b < 4; ++b) {
            if (dofs[b] < 0) continue;
            out(dofs[a], dofs[b]) = ke(a, b);
        }
    }
    return out;
}

namespace {

Eigen::Vector4d gather(const std::array<int, 4>& dofs, const Eigen::Ref<const Eigen::VectorXd>& v) {
    Eigen::Vector4d out;
    for (int a = 0; a < 4; ++a) out[a] = dofs[a] >= 0 ? v[dofs[a]] : 0.0;
    return out;
}

}  // namespace

double Assembly::element_form(int element, const Eigen::Ref<const Eigen::VectorXd>& u,
                              const Eigen::Ref<const Eigen::VectorXd>& v) const {
    const auto dofs = dof_map.element_dofs(element);
    return gather(dofs, u).dot(element_stiffness[element] * gather(dofs, v));
}

Assembly assemble(const BeamConfig& config, const DamageParams& params) {
    config.validate();
    params.validate(config);

    Assembly out;
    out.dof_map = make_dof_map(config);
    const int n = out.dof_map.n_free;
    out.stiffness = Eigen::MatrixXd::Zero(n, n);
    out.mass = Eigen::MatrixXd::Zero(n, n);
    out.element_stiffness.reserve(config.n_elements);

    const double h = config.element_length();
    const double inertia = config.second_moment();
    const Eigen::Matrix4d me = hermite_mass(config.density * config.area(), h);
    const Eigen::Matrix4d k_unit = hermite_stiffness(inertia, h);

    for (int e = 0; e < config.n_elements; ++e) {
        const Eigen::Matrix4d ke = params.youngs_moduli[e] * k_unit;
        out.element_stiffness.push_back(ke);
        const auto dofs = out.dof_map.element_dofs(e);
        for (int a = 0; a < 4; ++a) {
            if (dofs[a] < 0) continue;
            for (int b = 0; b < 4; ++b) {
                if (dofs[b] < 0) continue;
                out.stiffness(dofs[a], dofs[b]) += ke(a, b);
                out.mass(dofs[a], dofs[b]) += me(a, b);
            }
        }
    }
    return out;
}

// ============================================================================
// Eigensolution
// ============================================================================

ModalSolution solve_modes(Assembly model, int n_modes, int n_retained) {
    const int n = model.n_free();
    if (n_modes < 1 || n_modes > n) {
        throw InvalidInputError(fmt::format("requested {} modes but the model has {} free DOFs", n_modes, n));
    }
    if (n_retained <= 0) n_retained = n;
    if (n_retained < n_modes || n_retained > n) {
        throw InvalidInputError(
            fmt::format("retained mode count {} must lie in [{}, {}]", n_retained, n_modes, n));
    }

    // Reciprocal pencil M phi = mu K phi, lambda = 1 / mu; the lowest modes sit at the top of mu.
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(model.mass, model.stiffness,
                                                                     Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (solver.info() != Eigen::Success) {
        throw NumericError(fmt::format("generalized eigensolver failed (info={}); is the structure restrained?",
                                       static_cast<int>(solver.info())));
    }

    ModalSolution sol;
    sol.n_modes = n_modes;
    sol.eigenvalues.resize(n_retained);
    sol.mode_shapes.resize(n, n_retained);
    for (int j = 0; j < n_retained; ++j) {
        const double mu = solver.eigenvalues()[n - 1 - j];
        if (!(mu > 0.0)) {
            throw NumericError(fmt::format("eigenvalue {} is not positive (1/{}); structure is not restrained", j, mu));
        }
        sol.mode_shapes.col(j) = solver.eigenvectors().col(n - 1 - j);
    }

    // Mass-normalize, take the Rayleigh quotient as the eigenvalue, and fix signs.
    const auto& dofs = model.dof_map;
    for (int j = 0; j < n_retained; ++j) {
        auto phi = sol.mode_shapes.col(j);
        phi /= std::sqrt(phi.dot(model.mass * phi));
        sol.eigenvalues[j] = phi.dot(model.stiffness * phi);
        double best = 0.0;
        for (int node = 0; node < dofs.n_nodes; ++node) {
            const int d = dofs.translation[node];
            if (d >= 0 && std::abs(phi[d]) > std::abs(best)) best = phi[d];
        }
        if (best < 0.0) phi = -phi;
    }
    sol.frequencies = sol.eigenvalues.cwiseSqrt();
    sol.model = std::move(model);
    return sol;
}

// ============================================================================
// Derivatives
// ============================================================================

Eigen::MatrixXd StiffnessDerivative::to_dense(int n_free) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_free, n_free);
    for (int a = 0; a < 4; ++a) {
        if (dofs[a] < 0) continue;
        for (int b = 0; b < 4; ++b) {
            if (dofs[b] < 0) continue;
            out(dofs[a], dofs[b]) = block(a, b);
        }
    }
    return out;
}

double StiffnessDerivative::form(const Eigen::Ref<const Eigen::VectorXd>& u,
                                 const Eigen::Ref<const Eigen::VectorXd>& v) const {
    return gather(dofs, u).dot(block * gather(dofs, v));
}

StiffnessDerivative dK_dtheta(const ModalSolution& solution, const DamageParams& params, int element) {
    const int n_el = solution.model.n_elements();
    if (element < 0 || element >= n_el) {
        throw InvalidInputError(fmt::format("element index {} out of range [0, {})", element, n_el));
    }
    if (params.size() != n_el) {
        throw InvalidInputError("damage parameters do not match the model");
    }
    const double theta = params.youngs_moduli[element];
    if (!(theta > 0.0)) {
        throw InvalidInputError(fmt::format("theta[{}] must be positive", element));
    }
    StiffnessDerivative out;
    out.element = element;
    out.dofs = solution.dof_map().element_dofs(element);
    out.block = solution.model.element_stiffness[element] / theta;
    return out;
}

namespace {

int resolve_retained(const ModalSolution& solution, int retained) {
    if (retained <= 0) retained = solution.n_retained();
    if (retained > solution.n_retained()) {
        throw InvalidInputError(fmt::format("{} retained modes requested but only {} available", retained,
                                            solution.n_retained()));
    }
    return retained;
}

// coupling(h, j) = phi_h^T dK phi_j for h < retained, j < m.
EigenDerivatives expand(const ModalSolution& solution, const Eigen::MatrixXd& coupling, int retained) {
    const int m = solution.n_modes;
    EigenDerivatives out;
    out.eigenvalues = Eigen::VectorXd::Zero(m);
    out.mode_shapes = Eigen::MatrixXd::Zero(solution.model.n_free(), m);
    for (int j = 0; j < m; ++j) {
        out.eigenvalues[j] = coupling(j, j);
        const double lj = solution.eigenvalues[j];
        for (int h = 0; h < retained; ++h) {
            if (h == j) continue;
            const double gap = lj - solution.eigenvalues[h];
            if (std::abs(gap) <= 1e-8 * std::max(std::abs(lj), std::abs(solution.eigenvalues[h]))) {
                throw DegenerateSpectrumError(
                    j, h, fmt::format("eigenvalues {} and {} coincide ({} vs {})", j, h, lj, solution.eigenvalues[h]));
            }
            out.mode_shapes.col(j) += (coupling(h, j) / gap) * solution.mode_shapes.col(h);
        }
    }
    return out;
}

}  // namespace

EigenDerivatives eigen_derivatives(const ModalSolution& solution, const StiffnessDerivative& dk, int retained) {
    retained = resolve_retained(solution, retained);
    const int m = solution.n_modes;
    const int rows = std::max(retained, m);

    // Restrict every mode to the element's DOF block once.
    Eigen::Matrix<double, 4, Eigen::Dynamic> local = Eigen::MatrixXd::Zero(4, rows);
    for (int a = 0; a < 4; ++a) {
        if (dk.dofs[a] >= 0) local.row(a) = solution.mode_shapes.row(dk.dofs[a]).head(rows);
    }
    const Eigen::MatrixXd coupling = local.transpose() * dk.block * local.leftCols(m);
    return expand(solution, coupling, retained);
}

EigenDerivatives eigen_derivatives(const ModalSolution& solution, const Eigen::MatrixXd& dk, int retained) {
    retained = resolve_retained(solution, retained);
    const int n = solution.model.n_free();
    if (dk.rows() != n || dk.cols() != n) {
        throw InvalidInputError(fmt::format("dK must be {}x{}, got {}x{}", n, n, dk.rows(), dk.cols()));
    }
    const int m = solution.n_modes;
    const int rows = std::max(retained, m);
    const Eigen::MatrixXd coupling =
        solution.mode_shapes.leftCols(rows).transpose() * dk * solution.mode_shapes.leftCols(m);
    return expand(solution, coupling, retained);
}

Eigen::MatrixXd curvature_matrix(int n_points, double spacing) {
    if (n_points < 4) {
        throw InvalidInputError(fmt::format("curvature matrix needs at least 4 points, got {}", n_points));
    }
    if (!(spacing > 0.0)) {
        throw InvalidInputError(fmt::format("grid spacing must be positive, got {}", spacing));
    }
    const int n = n_points;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
    c.row(0).head(4) << 2, -5, 4, -1;
    for (int i = 1; i < n - 1; ++i) {
        c(i, i - 1) = 1;
        c(i, i) = -2;
        c(i, i + 1) = 1;
    }
    c.row(n - 1).tail(4) << -1, 4, -5, 2;
    return c / (spacing * spacing);
}

}  // namespace beamloc
