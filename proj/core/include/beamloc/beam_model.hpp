#pragma once

/**
 * @file beam_model.hpp
 * @brief Euler-Bernoulli beam finite elements with per-element Young's moduli.
 *
 * Element: 2-node Hermite cubic, DOFs per node (w, dw/dx).
 * Matrices are expressed over the free DOFs only; constrained DOFs are
 * removed by row/column deletion.
 *
 *   SimplySupported : w = 0 at both end nodes
 *   Cantilever      : w = 0 and dw/dx = 0 at the left node
 *
 * All quantities are SI (m, kg, Pa, rad/s).
 */

#include <Eigen/Dense>

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace beamloc {

enum class BoundaryCondition { SimplySupported, Cantilever };

std::string_view to_string(BoundaryCondition bc);
BoundaryCondition boundary_condition_from_string(std::string_view name);

struct BeamConfig {
    double length = 1.0;                    // m
    double width = 0.02;                    // m
    double thickness = 0.00325;             // m
    double density = 2700.0;                // kg/m^3
    double healthy_youngs_modulus = 70e9;   // Pa
    int n_elements = 20;
    BoundaryCondition boundary_condition = BoundaryCondition::SimplySupported;

    double area() const { return width * thickness; }
    double second_moment() const { return width * thickness * thickness * thickness / 12.0; }
    double element_length() const { return length / n_elements; }
    int n_nodes() const { return n_elements + 1; }

    // Throws InvalidInputError on non-positive dimensions or n_elements < 2.
    void validate() const;
};

// 1000 x 20 x 3.25 mm aluminium strip, 20 elements.
BeamConfig reference_beam(BoundaryCondition bc = BoundaryCondition::SimplySupported,
                          int n_elements = 20);

// Per-element Young's moduli (Pa).
struct DamageParams {
    Eigen::VectorXd youngs_moduli;

    static DamageParams uniform(const BeamConfig& config);
    static DamageParams uniform(const BeamConfig& config, double modulus);

    Eigen::Index size() const { return youngs_moduli.size(); }
    // Throws InvalidInputError on length mismatch or non-positive entries.
    void validate(const BeamConfig& config) const;
};

// Node/element to free-DOF numbering. Constrained DOFs map to -1.
struct DofMap {
    int n_nodes = 0;
    int n_free = 0;
    std::vector<int> translation;  // per node
    std::vector<int> rotation;     // per node

    // (w_i, rot_i, w_{i+1}, rot_{i+1}) of element e; -1 where constrained.
    std::array<int, 4> element_dofs(int element) const;

    // Gather the nodal translations of a free-DOF vector; constrained nodes read 0.
    Eigen::VectorXd nodal_translations(const Eigen::Ref<const Eigen::VectorXd>& free) const;
};

DofMap make_dof_map(const BeamConfig& config);

// Local element matrices for bending stiffness EI and mass per length rhoA.
Eigen::Matrix4d hermite_stiffness(double ei, double h);
Eigen::Matrix4d hermite_mass(double rho_a, double h);

// Rows map (w_i, rot_i, w_{i+1}, rot_{i+1}) to curvature at the element's
// left and right end from the exact second derivatives of the Hermite cubics.
Eigen::Matrix<double, 2, 4> hermite_curvature_operator(double h);

struct Assembly {
    Eigen::MatrixXd stiffness;                          // K over free DOFs
    Eigen::MatrixXd mass;                               // M over free DOFs
    std::vector<Eigen::Matrix4d> element_stiffness;     // K_i local blocks, linear in E_i
    DofMap dof_map;

    int n_elements() const { return static_cast<int>(element_stiffness.size()); }
    int n_free() const { return dof_map.n_free; }

    // K_i expanded to the global free-DOF basis.
    Eigen::MatrixXd element_stiffness_global(int element) const;
    // u^T K_i v evaluated on the element's DOF block.
    double element_form(int element, const Eigen::Ref<const Eigen::VectorXd>& u,
                        const Eigen::Ref<const Eigen::VectorXd>& v) const;
};

Assembly assemble(const BeamConfig& config, const DamageParams& params);

struct ModalSolution {
    Assembly model;
    int n_modes = 0;                 // modes of interest m
    Eigen::VectorXd eigenvalues;     // retained lambda_j = omega_j^2, ascending
    Eigen::VectorXd frequencies;     // retained omega_j (rad/s)
    Eigen::MatrixXd mode_shapes;     // columns: mass-normalized phi_j over free DOFs

    int n_retained() const { return static_cast<int>(eigenvalues.size()); }
    const DofMap& dof_map() const { return model.dof_map; }
};

// Solves K phi = lambda M phi and keeps the lowest `n_retained` pairs
// (all free DOFs when n_retained <= 0). Each phi_j is mass-normalized and its
// largest-magnitude translational entry is positive.
ModalSolution solve_modes(Assembly model, int n_modes, int n_retained = 0);

// Sparse derivative dK/dtheta_k = K_k / theta_k, stored as the element block.
struct StiffnessDerivative {
    int element = 0;
    std::array<int, 4> dofs{};
    Eigen::Matrix4d block = Eigen::Matrix4d::Zero();

    Eigen::MatrixXd to_dense(int n_free) const;
    double form(const Eigen::Ref<const Eigen::VectorXd>& u,
                const Eigen::Ref<const Eigen::VectorXd>& v) const;
};

StiffnessDerivative dK_dtheta(const ModalSolution& solution, const DamageParams& params, int element);

struct EigenDerivatives {
    Eigen::VectorXd eigenvalues;   // d lambda_j / d theta_k, j < m
    Eigen::MatrixXd mode_shapes;   // d phi_j / d theta_k as columns, j < m
};

// Fox-Kapoor modal expansion with dM/dtheta = 0 over the first `retained`
// modes (all retained pairs of the solution when retained <= 0).
// Throws DegenerateSpectrumError if lambda_j (j < m) repeats within 1e-8.
EigenDerivatives eigen_derivatives(const ModalSolution& solution, const StiffnessDerivative& dk,
                                   int retained = 0);
EigenDerivatives eigen_derivatives(const ModalSolution& solution, const Eigen::MatrixXd& dk,
                                   int retained = 0);

// Second-difference operator on N equispaced samples: one-sided
// [2,-5,4,-1]/h^2 in the first row, its mirror in the last, [1,-2,1]/h^2 inside.
Eigen::MatrixXd curvature_matrix(int n_points, double spacing);

}  // namespace beamloc
