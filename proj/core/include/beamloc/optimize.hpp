#pragma once

/**
 * @file optimize.hpp
 * @brief Bound-constrained quasi-Newton minimizers with iterate traces.
 *
 * LBFGS       : two-loop recursion on the free variables, projected
 *               strong-Wolfe line search along P(x + a d).
 * TrustRegion : dogleg step on the limited-memory BFGS model, clipped to
 *               the box; ratio test 0.25 / 0.75, radius x0.5 / x2.
 *
 * A variable is free unless it sits on a bound with the gradient pushing
 * outward. Convergence is measured with the projected gradient
 * ||P(x - g) - x||_inf.
 */

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace beamloc {

enum class Method { LBFGS, TrustRegion };
enum class Termination { GradTol, StepTol, MaxIter, Stalled, Error };

std::string_view to_string(Method method);
std::string_view to_string(Termination termination);
Method method_from_string(std::string_view name);

struct TrustRegionSettings {
    double initial_radius = 0.1;
    double max_radius = 1.0;
    double accept_ratio = 1e-4;
    double shrink_below = 0.25;
    double expand_above = 0.75;
    double shrink_factor = 0.5;
    double expand_factor = 2.0;
};

struct OptimizerConfig {
    Method method = Method::LBFGS;
    int memory = 10;
    int max_iterations = 100;
    double grad_tolerance = 1e-8;     // projected gradient, inf-norm
    double step_tolerance = 1e-12;    // inf-norm of an accepted step
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    Eigen::VectorXd lower_bounds;     // per variable; overrides `lower` when non-empty
    Eigen::VectorXd upper_bounds;
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    int max_line_search = 30;
    double initial_step = 0.1;        // inf-norm of the first trial step without curvature pairs
    int stall_window = 3;             // |dJ| < stall_delta for this many iterations -> Stalled
    double stall_delta = 1e-14;
    TrustRegionSettings trust_region;

    Eigen::VectorXd lower_for(Eigen::Index n) const;
    Eigen::VectorXd upper_for(Eigen::Index n) const;
    void validate(Eigen::Index n) const;
};

struct IterationRecord {
    int iteration = 0;             // within one minimize run; 0 = starting point
    int evaluation = 0;            // objective evaluations so far
    Eigen::VectorXd x;             // optimizer variables
    Eigen::VectorXd theta;         // per-element moduli (filled by callers that map x to theta)
    double value = 0.0;
    double grad_norm = 0.0;        // projected gradient inf-norm
    double step_norm = 0.0;
    double step_length = 0.0;      // line-search alpha or trust radius
    bool accepted = true;
    std::string stage;
};

struct StageEvent {
    std::size_t record = 0;        // index of the first record of the new stage
    double value_before = 0.0;
    double value_after = 0.0;
    std::string description;
};

struct RunTrace {
    std::vector<IterationRecord> records;
    std::vector<StageEvent> events;
    Termination termination = Termination::MaxIter;
    std::string message;
    int evaluations = 0;

    int iterations() const;   // records with iteration > 0
};

// Returns J(x) and writes dJ/dx into `grad`. May throw NumericError.
using ObjectiveFunction = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct MinimizeResult {
    Eigen::VectorXd x;
    double value = 0.0;
    RunTrace trace;
};

MinimizeResult minimize(const ObjectiveFunction& objective, const Eigen::VectorXd& x0, const OptimizerConfig& config);

namespace detail {

struct CurvaturePair {
    Eigen::VectorXd s;
    Eigen::VectorXd y;
};

// -H g by the two-loop recursion with H0 = (s^T y / y^T y) I from the newest
// pair (identity when there are none).
Eigen::VectorXd lbfgs_direction(const Eigen::VectorXd& g, const std::vector<CurvaturePair>& pairs);

// Dense BFGS matrix built from the same pairs with B0 = (y^T y / s^T y) I,
// or `fallback_scale` * I when there are none.
Eigen::MatrixXd lbfgs_matrix(const std::vector<CurvaturePair>& pairs, Eigen::Index n, double fallback_scale);

Eigen::VectorXd dogleg_step(const Eigen::VectorXd& g, const Eigen::MatrixXd& b, double radius);

}  // namespace detail

}  // namespace beamloc
