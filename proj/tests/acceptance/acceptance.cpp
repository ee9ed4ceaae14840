// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "support/cases.hpp"
#include "support/oracles.hpp"

#include "beamloc/evidence_fusion.hpp"
#include "beamloc/strategies.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace {

using namespace beamloc;
using namespace beamloc::test;

struct Verdict {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double max_relative_error(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
    return ((got - want).cwiseAbs().array() / want.cwiseAbs().array()).maxCoeff();
}

Verdict modal_correctness() {
    const auto start = std::chrono::steady_clock::now();
    const BeamConfig ss = reference_beam(BoundaryCondition::SimplySupported);
    const BeamConfig cant = reference_beam(BoundaryCondition::Cantilever);

    const ModalSolution ss_modes = solve_modes(assemble(ss, DamageParams::uniform(ss)), 5);
    const ModalSolution cant_modes = solve_modes(assemble(cant, DamageParams::uniform(cant)), 3);

    Eigen::VectorXd ss_exact(5);
    for (int j = 0; j < 5; ++j) ss_exact[j] = oracle::beam_frequency(ss, (j + 1) * std::numbers::pi);
    Eigen::VectorXd cant_exact(3);
    for (int j = 0; j < 3; ++j) cant_exact[j] = oracle::beam_frequency(cant, oracle::cantilever_root(j));

    const double ss_err = max_relative_error(ss_modes.frequencies.head(5), ss_exact);
    const double cant_err = max_relative_error(cant_modes.frequencies.head(3), cant_exact);
    const double elapsed = seconds_since(start);
    return {ss_err < 5e-3 && cant_err < 5e-3 && elapsed < 1.0,
            fmt::format("simply supported max rel err {:.2e}, cantilever {:.2e}, {:.3f} s", ss_err, cant_err,
                        elapsed)};
}

Verdict gradient_fidelity() {
    const auto start = std::chrono::steady_clock::now();
    const BeamConfig config = reference_beam();
    const MeasuredModes measured = measure(config, case_one()).damaged;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> multiplier(kMultiplierLower, kMultiplierUpper);

    struct Term {
        const char* name;
        ObjectiveWeights weights;
    };
    std::vector<Term> terms(4);
    terms[0] = {"E_f", {1, 0, 0, 0}};
    terms[1] = {"E_g", {0, 1, 0, 0}};
    terms[2] = {"E_c", {0, 0, 1, 0}};
    terms[3] = {"J", ObjectiveWeights{}};

    std::vector<double> worst(terms.size(), 0.0);
    for (int sample = 0; sample < 10; ++sample) {
        DamageParams params = DamageParams::uniform(config);
        for (Eigen::Index i = 0; i < params.size(); ++i) params.youngs_moduli[i] *= multiplier(rng);
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const Eigen::VectorXd analytic = eval_objective(config, params, measured, terms[t].weights).gradient;
            const Eigen::VectorXd fd = oracle::central_difference_gradient(config, params, measured, terms[t].weights);
            worst[t] = std::max(worst[t], oracle::max_component_relative_error(analytic, fd));
        }
    }
    const double elapsed = seconds_since(start);
    const bool pass = std::ranges::all_of(worst, [](double e) { return e < 1e-4; }) && elapsed < 30.0;
    return {pass, fmt::format("worst rel err E_f {:.1e}, E_g {:.1e}, E_c {:.1e}, J {:.1e}, {:.2f} s", worst[0],
                              worst[1], worst[2], worst[3], elapsed)};
}

Verdict dempster_equivalence() {
    std::mt19937_64 rng(99);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + trial % 5;
        const Bpa a = oracle::random_bpa(n, rng);
        const Bpa b = oracle::random_bpa(n, rng);
        const FusedEvidence fast = dempster_combine(a, b);
        const oracle::PowerSetMass brute = oracle::power_set_combine(a, b);
        worst = std::max(worst, oracle::max_difference(fast, brute));
    }
    // Runs last, so the audit covers every combination performed by the other criteria.
    const FusionAudit audit = fusion_audit();
    return {worst <= 1e-12 && audit.max_mass_error <= 1e-12,
            fmt::format("max |fast - power set| {:.1e}; {} combinations so far, max mass error {:.1e}", worst,
                        audit.combinations, audit.max_mass_error)};
}

Verdict fusion_localization() {
    const BeamConfig config = reference_beam();
    const FusionConfig fusion;
    const MeasurementPair single = measure(config, scenario({7}));
    const MeasurementPair quad = measure(config, scenario({3, 8, 12, 17}));
    const FusedEvidence single_fused = gather_evidence(config, single.healthy, single.damaged, fusion).fused;
    const FusedEvidence quad_fused = gather_evidence(config, quad.healthy, quad.damaged, fusion).fused;

    const int top = single_fused.argmax();
    const double single_max = single_fused.belief.maxCoeff();
    const double quad_max = quad_fused.belief.maxCoeff();
    return {top == 6 && quad_max < single_max,
            fmt::format("single-site argmax element {} (Bel {:.4f}); four-site max Bel {:.4f}", top + 1, single_max,
                        quad_max)};
}

Verdict healthy_recovery() {
    const BeamConfig config = reference_beam();
    const MeasuredModes healthy = synthesize_measurement(config, DamageParams::uniform(config), kModes, 0.0, 0);
    ObjectiveWeights weights;
    weights.curvature = 0.0;
    const LocalizationResult r = healthy_calibration(config, healthy, weights, OptimizerConfig{}, 10e9);
    const double err = (r.params.youngs_moduli.array() / kHealthyModulus - 1.0).abs().maxCoeff();

    // First iteration from which every later iterate stays within 0.5% of 70 GPa.
    int recovered_at = -1;
    for (const IterationRecord& rec : r.trace.records) {
        const bool inside = (rec.theta.array() / kHealthyModulus - 1.0).abs().maxCoeff() < 5e-3;
        if (!inside) recovered_at = -1;
        if (inside && recovered_at < 0) recovered_at = rec.iteration;
    }
    const bool pass = r.status == LocalizationStatus::Converged && err < 5e-3 && recovered_at >= 0 &&
                      recovered_at <= 50;
    return {pass, fmt::format("within 0.5% from iteration {}; {} after {} iterations ({}), final max |E/70 GPa - 1| "
                              "= {:.2e}",
                              recovered_at, to_string(r.status), r.trace.iterations(), to_string(r.trace.termination),
                              err)};
}

Verdict hybrid_case(const DamageScenario& s, std::vector<int> expected_one_based) {
    const auto start = std::chrono::steady_clock::now();
    const BeamConfig config = reference_beam();
    const MeasurementPair data = measure(config, s);
    const HybridResult r =
        hybrid_localize(config, data.healthy, data.damaged, HybridConfig{}, ObjectiveWeights{}, OptimizerConfig{});
    const double elapsed = seconds_since(start);

    const std::vector<int> candidates = to_one_based(r.candidates);
    const bool contains = std::ranges::includes(candidates, expected_one_based);
    double damaged_err = 0.0;
    for (int e : expected_one_based) {
        damaged_err = std::max(damaged_err, std::abs(r.result.params.youngs_moduli[e - 1] / kDamagedModulus - 1.0));
    }
    bool others_exact = true;
    for (int i = 0; i < config.n_elements; ++i) {
        if (!std::ranges::binary_search(r.candidates, i)) {
            others_exact = others_exact && r.result.params.youngs_moduli[i] == kHealthyModulus;
        }
    }
    const int iterations = r.result.trace.iterations();
    const bool pass = r.result.status == LocalizationStatus::Converged && contains && damaged_err < 0.02 &&
                      others_exact && r.result.final_value < 1e-3 && iterations <= 10 && elapsed < 10.0;
    return {pass, fmt::format("candidates [{}], damaged max rel err {:.2e}, non-candidates exact: {}, J = {:.2e}, "
                              "{} iterations ({}), {:.2f} s",
                              fmt::join(candidates, " "), damaged_err, others_exact, r.result.final_value,
                              iterations, to_string(r.result.trace.termination), elapsed)};
}

Verdict hierarchical_case_one() {
    const BeamConfig config = reference_beam();
    const MeasurementPair data = measure(config, group_case());
    const HierarchicalResult h =
        hierarchical_localize(config, data.damaged, ObjectiveWeights{}, OptimizerConfig{}, HierarchicalConfig{});
    const LocalizationResult& r = h.result;

    double group_err = 0.0;
    for (int e = 4; e < 8; ++e) group_err = std::max(group_err, std::abs(r.params.youngs_moduli[e] / kDamagedModulus - 1.0));
    const auto jumps = std::ranges::count_if(r.trace.events, [](const StageEvent& ev) {
        return ev.value_before != ev.value_after;
    });
    const bool pass = r.status == LocalizationStatus::Converged && group_err < 0.03 && jumps >= 1;
    return {pass, fmt::format("status {} ({}), damaged group max rel err {:.2e}, {} stage transfers with objective "
                              "jumps, final projected gradient {:.2e}",
                              to_string(r.status), to_string(r.trace.termination), group_err, jumps,
                              r.final_grad_norm)};
}

Verdict noise_degradation() {
    const auto start = std::chrono::steady_clock::now();
    const BeamConfig config = reference_beam();
    const FusionConfig fusion;
    const std::vector<double> levels{0.01, 0.02, 0.03, 0.05};
    constexpr int kSeeds = 20;

    std::vector<double> mean_theta;
    std::vector<double> mean_peak;
    for (double eta : levels) {
        double theta = 0.0;
        double peak = 0.0;
        for (int seed = 0; seed < kSeeds; ++seed) {
            const MeasurementPair data = measure(config, scenario({5, 6, 9, 10}, 0.25, eta, 1000 + 2 * seed));
            const FusedEvidence fused = gather_evidence(config, data.healthy, data.damaged, fusion).fused;
            theta += fused.theta_mass;
            peak += fused.belief.maxCoeff();
        }
        mean_theta.push_back(theta / kSeeds);
        mean_peak.push_back(peak / kSeeds);
    }
    const double elapsed = seconds_since(start);
    const bool theta_up = std::ranges::is_sorted(mean_theta);
    const bool peak_down = std::ranges::is_sorted(mean_peak, std::greater<>{});
    return {theta_up && peak_down && elapsed < 60.0,
            fmt::format("mean m(Theta) [{:.4f}], mean peak Bel [{:.4f}], {:.2f} s", fmt::join(mean_theta, " "),
                        fmt::join(mean_peak, " "), elapsed)};
}

bool same_trace(const RunTrace& a, const RunTrace& b) {
    if (a.records.size() != b.records.size() || a.termination != b.termination) return false;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        const IterationRecord& x = a.records[i];
        const IterationRecord& y = b.records[i];
        if (x.iteration != y.iteration || x.value != y.value || x.grad_norm != y.grad_norm || x.theta != y.theta ||
            x.x != y.x) {
            return false;
        }
    }
    return true;
}

Verdict regression_equivalence() {
    const BeamConfig config = reference_beam();
    const MeasurementPair data = measure(config, case_two());
    OptimizerConfig opt;
    opt.max_iterations = 40;

    HybridConfig hybrid;
    std::vector<int> all(config.n_elements);
    for (int i = 0; i < config.n_elements; ++i) all[i] = i;
    hybrid.forced_candidates = all;

    const HybridResult h = hybrid_localize(config, data.healthy, data.damaged, hybrid, ObjectiveWeights{}, opt);
    const LocalizationResult p = plain_localize(config, data.damaged, ObjectiveWeights{}, opt);
    const bool same = same_trace(h.result.trace, p.trace) && h.result.params.youngs_moduli == p.params.youngs_moduli;
    return {same, fmt::format("{} hybrid records vs {} plain records, identical: {}", h.result.trace.records.size(),
                              p.trace.records.size(), same)};
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::off);

    struct Criterion {
        int id;
        const char* title;
        std::function<Verdict()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "modal correctness", modal_correctness},
        {2, "gradient fidelity", gradient_fidelity},
        {3, "Dempster oracle equivalence", dempster_equivalence},
        {4, "fusion localization", fusion_localization},
        {5, "healthy recovery", healthy_recovery},
        {6, "hybrid case I", [] { return hybrid_case(case_one(), {7, 8}); }},
        {7, "hybrid case II", [] { return hybrid_case(case_two(), {5, 6, 9, 10}); }},
        {8, "hierarchical case I", hierarchical_case_one},
        {9, "noise degradation", noise_degradation},
        {10, "regression equivalence", regression_equivalence},
    };

    // Criterion 3 audits all fusions of the run, so it is evaluated after the others.
    std::vector<Verdict> verdicts(criteria.size());
    auto evaluate = [&](std::size_t i) {
        try {
            verdicts[i] = criteria[i].run();
        } catch (const std::exception& e) {
            verdicts[i] = {false, fmt::format("exception: {}", e.what())};
        }
    };
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (criteria[i].id != 3) evaluate(i);
    }
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (criteria[i].id == 3) evaluate(i);
    }

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        failures += verdicts[i].pass ? 0 : 1;
        fmt::print("[{}] criterion {:>2} {}: {}\n", verdicts[i].pass ? "PASS" : "FAIL", criteria[i].id,
                   criteria[i].title, verdicts[i].detail);
    }
    fmt::print("{} of {} criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
