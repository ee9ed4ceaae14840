#include "beamloc/cli/commands.hpp"

#include "beamloc/cli/plots.hpp"
#include "beamloc/errors.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <atomic>
#include <fstream>
#include <ranges>
#include <thread>

namespace beamloc::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kHealthyFile = "measured_healthy.csv";
constexpr const char* kDamagedFile = "measured_damaged.csv";
constexpr const char* kFrequencyFile = "frequencies.csv";

constexpr const char* kBeliefTitle = "Fused belief per element";
constexpr const char* kConvergenceTitle = "Objective convergence";
constexpr const char* kModulusTitle = "Young's modulus per element";

void prepare_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InvalidInputError(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError(fmt::format("cannot write '{}'", path.string()));
    out << text;
}

ScenarioFile with_overrides(ScenarioFile scenario, const CommandOptions& options) {
    if (options.strategy) scenario.strategy = *options.strategy;
    if (options.seed) scenario.damage.seed = *options.seed;
    return scenario;
}

std::string one_based(const std::vector<int>& elements) {
    return fmt::format("{}", fmt::join(elements | std::views::transform([](int e) { return e + 1; }), " "));
}

FusionTable fusion_table(const FusedEvidence& fused, const std::vector<int>& candidates) {
    FusionTable t;
    t.belief = fused.belief;
    t.plausibility = fused.plausibility;
    t.candidates = candidates;
    t.theta_mass = fused.theta_mass;
    t.conflict = fused.conflict;
    t.concentration = concentration(normalize_indices(fused.belief).norm).concentration;
    return t;
}

void write_fusion_outputs(const fs::path& dir, const FusionTable& table) {
    write_fusion(dir / "fused.csv", dir / "fusion_summary.csv", table);
    write_text(dir / "fused_belief.svg", belief_chart(table, kBeliefTitle));
}

}  // namespace

Measurements synthesize(const ScenarioFile& s) {
    Measurements m;
    m.truth = make_damaged_params(s.beam, s.damage);
    m.healthy = synthesize_measurement(s.beam, DamageParams::uniform(s.beam), s.n_modes, s.damage.noise_level,
                                       s.damage.seed);
    m.damaged = synthesize_measurement(s.beam, m.truth, s.n_modes, s.damage.noise_level, s.damage.seed + 1);
    return m;
}

Measurements load_or_synthesize(const ScenarioFile& s, const fs::path& dir) {
    if (!(fs::exists(dir / kHealthyFile) && fs::exists(dir / kDamagedFile) && fs::exists(dir / kFrequencyFile))) {
        return synthesize(s);
    }
    spdlog::info("reading measurements from {}", dir.string());
    Measurements m;
    m.truth = make_damaged_params(s.beam, s.damage);
    m.healthy = read_measurement(dir / kHealthyFile, read_frequencies(dir / kFrequencyFile, "healthy"));
    m.damaged = read_measurement(dir / kDamagedFile, read_frequencies(dir / kFrequencyFile, "damaged"));
    if (m.healthy.n_points() != s.beam.n_nodes() || m.damaged.n_points() != s.beam.n_nodes()) {
        throw InvalidInputError(fmt::format("measurements in '{}' do not match the {}-node beam", dir.string(),
                                            s.beam.n_nodes()));
    }
    return m;
}

CommandOutcome cmd_synthesize(const ScenarioFile& s, const CommandOptions& options) {
    prepare_dir(options.out_dir);
    const Measurements m = synthesize(s);
    write_measurement(options.out_dir / kHealthyFile, m.healthy);
    write_measurement(options.out_dir / kDamagedFile, m.damaged);
    write_frequencies(options.out_dir / kFrequencyFile, m.healthy, m.damaged);
    return {kExitOk, fmt::format("{}: synthesized {} modes on {} nodes (noise {}, seed {})", s.name, s.n_modes,
                                 s.beam.n_nodes(), s.damage.noise_level, s.damage.seed)};
}

CommandOutcome cmd_fuse(const ScenarioFile& s, const CommandOptions& options) {
    prepare_dir(options.out_dir);
    const Measurements m = load_or_synthesize(s, options.out_dir);

    const ModalSolution healthy_model = solve_modes(assemble(s.beam, DamageParams::uniform(s.beam)), s.n_modes);
    FeatureTable features;
    for (FeatureKind k : {FeatureKind::Frequency, FeatureKind::Curvature, FeatureKind::StrainEnergy,
                          FeatureKind::Flexibility}) {
        features.names.emplace_back(to_string(k));
        features.values.push_back(compute_feature(k, m.healthy, m.damaged, healthy_model).values);
    }
    write_features(options.out_dir / "features.csv", features);

    const EvidenceState evidence = gather_evidence(s.beam, m.healthy, m.damaged, s.hybrid.fusion);
    BpaTable bpas;
    for (const FeatureBpa& b : evidence.bpas) {
        bpas.features.emplace_back(to_string(b.kind));
        bpas.singleton_masses.push_back(b.singleton_masses);
        bpas.alpha.push_back(b.alpha);
        bpas.theta_mass.push_back(b.theta_mass);
    }
    write_bpas(options.out_dir / "bpas.csv", bpas);

    const std::vector<int> candidates =
        filter_candidates(evidence.fused, s.hybrid.tau_fraction, s.hybrid.fallback_top_n);
    const FusionTable table = fusion_table(evidence.fused, candidates);
    write_fusion_outputs(options.out_dir, table);

    const int top = evidence.fused.argmax();
    std::string summary = fmt::format(
        "{}: argmax element = {} (Bel {:.4f}), m(Theta) = {:.4f}, conflict K = {:.4f}, concentration = {:.3f}, "
        "candidates = [{}]",
        s.name, top + 1, evidence.fused.belief[top], evidence.fused.theta_mass, evidence.fused.conflict,
        table.concentration, one_based(candidates));
    if (table.concentration < kLowConcentration) summary += ", low concentration";
    return {kExitOk, summary};
}

CommandOutcome cmd_localize(const ScenarioFile& s, const CommandOptions& options) {
    prepare_dir(options.out_dir);
    const Measurements m = load_or_synthesize(s, options.out_dir);

    LocalizationResult result;
    std::vector<int> candidates;
    switch (s.strategy) {
        case Strategy::Plain:
            result = plain_localize(s.beam, m.damaged, s.weights, s.optimizer);
            break;
        case Strategy::Hierarchical:
            result = hierarchical_localize(s.beam, m.damaged, s.weights, s.optimizer, s.hierarchical).result;
            break;
        case Strategy::Hybrid: {
            HybridResult hybrid = hybrid_localize(s.beam, m.healthy, m.damaged, s.hybrid, s.weights, s.optimizer);
            candidates = hybrid.candidates;
            write_fusion_outputs(options.out_dir, fusion_table(hybrid.evidence.fused, candidates));
            result = std::move(hybrid.result);
            break;
        }
    }

    const TraceTable trace = make_trace_table(result.trace);
    const ProfileTable profile = make_profile_table(s.beam, result.params, m.truth);
    write_trace(options.out_dir, trace);
    write_profile(options.out_dir / "profile.csv", profile);
    write_text(options.out_dir / "objective.svg", convergence_chart(trace, kConvergenceTitle));
    write_text(options.out_dir / "profile.svg", modulus_chart(profile, kModulusTitle));

    CsvTable summary;
    summary.header = {"quantity", "value"};
    summary.rows = {{"strategy", std::string(to_string(s.strategy))},
                    {"status", std::string(to_string(result.status))},
                    {"termination", std::string(to_string(result.trace.termination))},
                    {"iterations", std::to_string(result.trace.iterations())},
                    {"evaluations", std::to_string(result.trace.evaluations)},
                    {"final_objective", format_number(result.final_value)},
                    {"final_grad_norm", format_number(result.final_grad_norm)},
                    {"candidates", one_based(candidates)}};
    write_csv(options.out_dir / "localize_summary.csv", summary);

    const double max_error = ((profile.identified_gpa - profile.true_gpa).cwiseAbs().array() /
                              profile.true_gpa.array()).maxCoeff();
    std::string line = fmt::format("{}: {} {} after {} iterations ({}), J = {:.3e}, max |E - E_true|/E_true = {:.2e}",
                                   s.name, to_string(s.strategy), to_string(result.status),
                                   result.trace.iterations(), to_string(result.trace.termination), result.final_value,
                                   max_error);
    if (s.strategy == Strategy::Hybrid) line += fmt::format(", candidates = [{}]", one_based(candidates));
    if (result.status == LocalizationStatus::Failed) {
        line += fmt::format(": {}", result.message);
        return {kExitStrategy, line};
    }
    return {kExitOk, line};
}

CommandOutcome run_scenario_file(const Command& command, const fs::path& scenario_path,
                                 const CommandOptions& options) {
    try {
        const ScenarioFile scenario = with_overrides(load_scenario(scenario_path), options);
        scenario.validate();
        return command(scenario, options);
    } catch (const InvalidInputError& e) {
        return {kExitInput, fmt::format("{}: input error: {}", scenario_path.string(), e.what())};
    } catch (const nlohmann::json::exception& e) {
        return {kExitInput, fmt::format("{}: input error: {}", scenario_path.string(), e.what())};
    } catch (const fs::filesystem_error& e) {
        return {kExitInput, fmt::format("{}: file error: {}", scenario_path.string(), e.what())};
    } catch (const NumericError& e) {
        return {kExitNumeric, fmt::format("{}: numeric error: {}", scenario_path.string(), e.what())};
    } catch (const std::exception& e) {
        return {kExitInternal, fmt::format("{}: internal error: {}", scenario_path.string(), e.what())};
    }
}

std::vector<CommandOutcome> run_batch(const Command& command, const std::vector<fs::path>& scenarios,
                                      const CommandOptions& options, int jobs) {
    std::vector<CommandOutcome> outcomes(scenarios.size());
    auto run_one = [&](std::size_t i) {
        CommandOptions local = options;
        if (scenarios.size() > 1) local.out_dir = options.out_dir / scenarios[i].stem();
        outcomes[i] = run_scenario_file(command, scenarios[i], local);
    };

    const auto workers = static_cast<std::size_t>(std::max(1, jobs));
    if (workers == 1 || scenarios.size() <= 1) {
        for (std::size_t i = 0; i < scenarios.size(); ++i) run_one(i);
        return outcomes;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, scenarios.size()); ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < scenarios.size(); i = next++) run_one(i);
        });
    }
    pool.clear();
    return outcomes;
}

std::vector<std::pair<std::string, std::string>> charts_from_directory(const fs::path& dir) {
    std::vector<std::pair<std::string, std::string>> out;
    if (fs::exists(dir / "fused.csv") && fs::exists(dir / "fusion_summary.csv")) {
        out.emplace_back("fused_belief.svg",
                         belief_chart(read_fusion(dir / "fused.csv", dir / "fusion_summary.csv"), kBeliefTitle));
    }
    if (fs::exists(dir / "objective_trace.csv")) {
        out.emplace_back("objective.svg", convergence_chart(read_trace(dir), kConvergenceTitle));
    }
    if (fs::exists(dir / "profile.csv")) {
        out.emplace_back("profile.svg", modulus_chart(read_profile(dir / "profile.csv"), kModulusTitle));
    }
    return out;
}

}  // namespace beamloc::cli
