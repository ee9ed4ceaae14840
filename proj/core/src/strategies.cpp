#include "beamloc/strategies.hpp"

#include "beamloc/errors.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ranges>
#include <set>

namespace beamloc {

std::string_view to_string(Strategy strategy) {
    switch (strategy) {
        case Strategy::Plain: return "plain";
        case Strategy::Hierarchical: return "hierarchical";
        case Strategy::Hybrid: return "hybrid";
    }
    return "unknown";
}

Strategy strategy_from_string(std::string_view name) {
    if (name == "plain") return Strategy::Plain;
    if (name == "hierarchical") return Strategy::Hierarchical;
    if (name == "hybrid") return Strategy::Hybrid;
    throw InvalidInputError(fmt::format("unknown strategy '{}' (expected plain, hierarchical or hybrid)", name));
}

std::string_view to_string(LocalizationStatus status) {
    return status == LocalizationStatus::Converged ? "converged" : "failed";
}

StiffnessParameterization StiffnessParameterization::per_element(const std::vector<int>& elements,
                                                                 const DamageParams& base) {
    StiffnessParameterization p;
    p.base = base;
    p.groups.reserve(elements.size());
    for (int e : elements) p.groups.push_back({e});
    return p;
}

void StiffnessParameterization::validate(const BeamConfig& config) const {
    base.validate(config);
    if (groups.empty()) throw InvalidInputError("parameterization has no variables");
    std::set<int> seen;
    for (const auto& g : groups) {
        if (g.empty()) throw InvalidInputError("parameterization has an empty group");
        for (int e : g) {
            if (e < 0 || e >= config.n_elements) throw InvalidInputError(fmt::format("element {} out of range", e));
            if (!seen.insert(e).second) throw InvalidInputError(fmt::format("element {} appears in two groups", e));
        }
    }
}

DamageParams StiffnessParameterization::to_params(const BeamConfig& config, const Eigen::VectorXd& x) const {
    if (x.size() != n_variables()) throw InvalidInputError("variable count does not match the parameterization");
    DamageParams p = base;
    for (int g = 0; g < n_variables(); ++g) {
        for (int e : groups[g]) p.youngs_moduli[e] = config.healthy_youngs_modulus * x[g];
    }
    return p;
}

Eigen::VectorXd StiffnessParameterization::to_variables(const BeamConfig& config, const DamageParams& params) const {
    Eigen::VectorXd x(n_variables());
    for (int g = 0; g < n_variables(); ++g) {
        double sum = 0.0;
        for (int e : groups[g]) sum += params.youngs_moduli[e];
        x[g] = sum / static_cast<double>(groups[g].size()) / config.healthy_youngs_modulus;
    }
    return x;
}

Eigen::VectorXd StiffnessParameterization::reduce_gradient(const BeamConfig& config,
                                                           const Eigen::VectorXd& dtheta) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n_variables());
    for (int k = 0; k < n_variables(); ++k) {
        for (int e : groups[k]) g[k] += config.healthy_youngs_modulus * dtheta[e];
    }
    return g;
}

OptimizerConfig with_multiplier_bounds(OptimizerConfig config, int n_variables) {
    config.lower = std::max(config.lower, kMultiplierLower);
    config.upper = std::min(config.upper, kMultiplierUpper);
    config.lower_bounds.resize(0);
    config.upper_bounds.resize(0);
    config.validate(n_variables);
    return config;
}

LocalizationResult update_parameters(const BeamConfig& config, const MeasuredModes& measured,
                                     const ObjectiveWeights& weights, const OptimizerConfig& opt,
                                     const StiffnessParameterization& parameterization,
                                     const DamageParams& start, std::string_view stage) {
    config.validate();
    parameterization.validate(config);
    start.validate(config);
    const int nv = parameterization.n_variables();
    const OptimizerConfig bounded = with_multiplier_bounds(opt, nv);

    const Eigen::VectorXd x0 = parameterization.to_variables(config, start);
    for (int i = 0; i < nv; ++i) {
        if (x0[i] < bounded.lower || x0[i] > bounded.upper) {
            throw InvalidInputError(fmt::format("starting multiplier {} = {} outside [{}, {}]", i, x0[i],
                                                bounded.lower, bounded.upper));
        }
    }

    const ObjectiveFunction objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        const ObjectiveEvaluation ev =
            eval_objective(config, parameterization.to_params(config, x), measured, weights);
        grad = parameterization.reduce_gradient(config, ev.gradient);
        return ev.value;
    };

    MinimizeResult run = minimize(objective, x0, bounded);
    for (auto& r : run.trace.records) {
        r.theta = parameterization.to_params(config, r.x).youngs_moduli;
        r.stage = std::string(stage);
    }

    LocalizationResult out;
    out.params = parameterization.to_params(config, run.x);
    out.final_value = run.value;
    out.final_grad_norm = run.trace.records.empty() ? 0.0 : run.trace.records.back().grad_norm;
    out.status = run.trace.termination == Termination::Error ? LocalizationStatus::Failed
                                                             : LocalizationStatus::Converged;
    out.message = fmt::format("{} after {} iterations: {}", to_string(run.trace.termination),
                              run.trace.iterations(), run.trace.message);
    out.trace = std::move(run.trace);
    spdlog::debug("[{}] {} (J = {:.6e})", stage, out.message, out.final_value);
    return out;
}

LocalizationResult update_subset(const BeamConfig& config, const MeasuredModes& measured,
                                 const ObjectiveWeights& weights, const OptimizerConfig& opt,
                                 const std::vector<int>& elements, const DamageParams& base) {
    return update_parameters(config, measured, weights, opt, StiffnessParameterization::per_element(elements, base),
                             base, "fem_update");
}

LocalizationResult plain_localize(const BeamConfig& config, const MeasuredModes& measured,
                                  const ObjectiveWeights& weights, const OptimizerConfig& opt) {
    std::vector<int> all(config.n_elements);
    std::iota(all.begin(), all.end(), 0);
    return update_subset(config, measured, weights, opt, all, DamageParams::uniform(config));
}

LocalizationResult healthy_calibration(const BeamConfig& config, const MeasuredModes& measured_healthy,
                                       const ObjectiveWeights& weights, const OptimizerConfig& opt,
                                       double initial_modulus) {
    if (!(initial_modulus > 0.0)) throw InvalidInputError("initial modulus must be positive");
    ObjectiveWeights global = weights;
    global.curvature = 0.0;
    std::vector<int> all(config.n_elements);
    std::iota(all.begin(), all.end(), 0);
    const DamageParams start = DamageParams::uniform(config, initial_modulus);
    return update_parameters(config, measured_healthy, global, opt,
                             StiffnessParameterization::per_element(all, DamageParams::uniform(config)), start,
                             "calibration");
}

std::vector<int> Cluster::elements() const {
    std::vector<int> out(size());
    std::iota(out.begin(), out.end(), first);
    return out;
}

ClusterState ClusterState::initial(int n_groups, int group_size) {
    ClusterState s;
    for (int g = 0; g < n_groups; ++g) s.clusters.push_back({g * group_size, (g + 1) * group_size - 1, true});
    return s;
}

std::vector<Cluster> ClusterState::active() const {
    std::vector<Cluster> out;
    std::copy_if(clusters.begin(), clusters.end(), std::back_inserter(out), [](const Cluster& c) { return c.active; });
    return out;
}

int ClusterState::n_active() const {
    return static_cast<int>(std::count_if(clusters.begin(), clusters.end(), [](const Cluster& c) { return c.active; }));
}

void ClusterState::validate(int n_elements) const {
    int next = 0;
    for (const auto& c : clusters) {
        if (c.first != next || c.last < c.first) throw InvalidInputError("clusters do not partition the elements");
        next = c.last + 1;
    }
    if (next != n_elements) throw InvalidInputError("clusters do not cover every element");
}

void HierarchicalConfig::validate(const BeamConfig& config) const {
    if (initial_groups < 1 || group_size < 1) throw InvalidInputError("N_g and G_s must be positive");
    if (initial_groups * group_size != config.n_elements) {
        throw InvalidInputError(fmt::format("N_g * G_s = {} but the beam has {} elements",
                                            initial_groups * group_size, config.n_elements));
    }
    if (!(stage_tol_fraction > 0.0 && stage_tol_fraction <= 1.0)) {
        throw InvalidInputError("stage tolerance fraction must lie in (0, 1]");
    }
    if (max_stages < 1) throw InvalidInputError("max_stages must be positive");
}

namespace {

double full_projected_gradient(const BeamConfig& config, const DamageParams& params, const MeasuredModes& measured,
                               const ObjectiveWeights& weights, double& value) {
    const ObjectiveEvaluation ev = eval_objective(config, params, measured, weights);
    value = ev.value;
    double worst = 0.0;
    for (int i = 0; i < config.n_elements; ++i) {
        const double e = params.youngs_moduli[i] / config.healthy_youngs_modulus;
        const double g = config.healthy_youngs_modulus * ev.gradient[i];
        const double moved = std::clamp(e - g, kMultiplierLower, kMultiplierUpper) - e;
        worst = std::max(worst, std::abs(moved));
    }
    return worst;
}

void append_trace(RunTrace& into, RunTrace&& from) {
    for (auto& r : from.records) into.records.push_back(std::move(r));
    into.evaluations += from.evaluations;
    into.termination = from.termination;
    into.message = std::move(from.message);
}

}  // namespace

HierarchicalResult hierarchical_localize(const BeamConfig& config, const MeasuredModes& measured,
                                         const ObjectiveWeights& weights, const OptimizerConfig& opt,
                                         const HierarchicalConfig& hierarchical) {
    config.validate();
    hierarchical.validate(config);
    const double eh = config.healthy_youngs_modulus;

    HierarchicalResult out;
    out.clusters = ClusterState::initial(hierarchical.initial_groups, hierarchical.group_size);
    DamageParams theta = DamageParams::uniform(config);
    RunTrace& trace = out.result.trace;
    std::optional<std::size_t> pending_event;

    for (int stage = 1; stage <= hierarchical.max_stages; ++stage) {
        out.clusters.stage = stage;
        StiffnessParameterization param;
        param.base = theta;
        for (const auto& c : out.clusters.active()) param.groups.push_back(c.elements());

        const std::string label = fmt::format("stage {}", stage);
        LocalizationResult run = update_parameters(config, measured, weights, opt, param, theta, label);
        if (pending_event) {
            trace.events[*pending_event].value_after = run.trace.records.front().value;
            pending_event.reset();
        }
        append_trace(trace, std::move(run.trace));
        theta = run.params;
        if (trace.termination == Termination::Error) {
            out.result.params = theta;
            out.result.status = LocalizationStatus::Failed;
            out.result.message = fmt::format("optimizer error in {}: {}", label, trace.message);
            return out;
        }
        spdlog::info("{}: {} active clusters, J = {:.6e}, {}", label, param.n_variables(), run.final_value,
                     to_string(trace.termination));

        // Refine: keep clusters that moved, split the large ones, freeze the rest.
        double max_dev = 0.0;
        for (const auto& c : out.clusters.clusters) {
            if (c.active) max_dev = std::max(max_dev, std::abs(theta.youngs_moduli[c.first] - eh) / eh);
        }
        const double tol = hierarchical.stage_tol_fraction * max_dev;
        std::vector<Cluster> next;
        bool changed = false;
        for (const auto& c : out.clusters.clusters) {
            if (!c.active) {
                next.push_back(c);
                continue;
            }
            const double dev = std::abs(theta.youngs_moduli[c.first] - eh) / eh;
            if (dev > tol && max_dev > 0.0) {
                if (c.size() == 1) {
                    next.push_back(c);
                } else {
                    const int left = (c.size() + 1) / 2;
                    next.push_back({c.first, c.first + left - 1, true});
                    next.push_back({c.first + left, c.last, true});
                    changed = true;
                }
            } else {
                for (int e = c.first; e <= c.last; ++e) theta.youngs_moduli[e] = eh;
                next.push_back({c.first, c.last, false});
                changed = true;
            }
        }
        out.clusters.clusters = std::move(next);
        out.clusters.validate(config.n_elements);

        if (!changed || out.clusters.n_active() == 0) break;
        StageEvent ev;
        ev.record = trace.records.size();
        ev.value_before = trace.records[trace.records.size() - 1].value;
        ev.description = fmt::format("stage {} -> {}: {} active clusters (tol {:.4g})", stage, stage + 1,
                                     out.clusters.n_active(), tol);
        trace.events.push_back(ev);
        pending_event = trace.events.size() - 1;
    }

    double value = 0.0;
    const double grad = full_projected_gradient(config, theta, measured, weights, value);
    if (pending_event) trace.events[*pending_event].value_after = value;
    const double tolerance =
        hierarchical.final_grad_tolerance > 0.0 ? hierarchical.final_grad_tolerance : opt.grad_tolerance;

    out.result.params = theta;
    out.result.final_value = value;
    out.result.final_grad_norm = grad;
    if (grad <= tolerance) {
        out.result.status = LocalizationStatus::Converged;
        out.result.message = fmt::format("converged after {} stages, projected gradient {:.3e}",
                                         out.clusters.stage, grad);
    } else {
        out.result.status = LocalizationStatus::Failed;
        out.result.message = fmt::format("process failed: projected gradient {:.3e} exceeds {:.1e} after {} stages ({})",
                                         grad, tolerance, out.clusters.stage, to_string(trace.termination));
    }
    return out;
}

void FusionConfig::validate() const {
    if (features.size() < 2) throw InvalidInputError("fusion needs at least two features");
    std::set<FeatureKind> unique(features.begin(), features.end());
    if (unique.size() != features.size()) throw InvalidInputError("fusion features must be distinct");
    weights.validate();
    if (!(lambda_f > 0.0)) throw InvalidInputError("lambda_f must be positive");
}

void HybridConfig::validate() const {
    if (!(tau_fraction > 0.0 && tau_fraction <= 1.0)) throw InvalidInputError("tau must lie in (0, 1]");
    if (fallback_top_n < 0) throw InvalidInputError("fallback_top_n must be >= 0");
    fusion.validate();
}

EvidenceState gather_evidence(const BeamConfig& config, const MeasuredModes& measured_healthy,
                              const MeasuredModes& measured_damaged, const FusionConfig& fusion) {
    fusion.validate();
    if (measured_healthy.n_modes() != measured_damaged.n_modes()) {
        throw InvalidInputError("healthy and damaged measurements have different mode counts");
    }
    const ModalSolution healthy =
        solve_modes(assemble(config, DamageParams::uniform(config)), measured_healthy.n_modes());
    EvidenceState out;
    for (FeatureKind kind : fusion.features) {
        out.features.push_back(compute_feature(kind, measured_healthy, measured_damaged, healthy));
        out.bpas.push_back(build_bpa(out.features.back(), fusion.weights, fusion.lambda_f));
    }
    out.fused = fuse_features(out.bpas);
    return out;
}

HybridResult hybrid_localize(const BeamConfig& config, const MeasuredModes& measured_healthy,
                             const MeasuredModes& measured_damaged, const HybridConfig& hybrid,
                             const ObjectiveWeights& weights, const OptimizerConfig& opt) {
    hybrid.validate();
    HybridResult out;
    out.evidence = gather_evidence(config, measured_healthy, measured_damaged, hybrid.fusion);
    out.candidates = hybrid.forced_candidates
                         ? *hybrid.forced_candidates
                         : filter_candidates(out.evidence.fused, hybrid.tau_fraction, hybrid.fallback_top_n);
    spdlog::info("hybrid candidates (1-based): {}",
                 fmt::join(out.candidates | std::views::transform([](int e) { return e + 1; }), ", "));
    out.result =
        update_subset(config, measured_damaged, weights, opt, out.candidates, DamageParams::uniform(config));
    return out;
}

std::vector<GammaSweepPoint> gamma_sweep(const BeamConfig& config, const MeasuredModes& measured,
                                         const ObjectiveWeights& weights, const OptimizerConfig& opt,
                                         const std::vector<double>& gammas) {
    std::vector<GammaSweepPoint> out;
    for (double gamma : gammas) {
        ObjectiveWeights w = weights;
        w.gamma = gamma;
        const LocalizationResult run = plain_localize(config, measured, w, opt);
        const ObjectiveEvaluation ev =
            eval_objective(config, run.params, measured, w, ObjectiveOptions{.compute_gradient = false});
        out.push_back({gamma, ev.data_misfit(w), ev.penalty, run.params});
    }
    return out;
}

}  // namespace beamloc
