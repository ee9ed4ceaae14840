#include "beamloc/beam_model.hpp"
#include "beamloc/evidence_fusion.hpp"
#include "beamloc/modal_data.hpp"
#include "beamloc/objective.hpp"
#include "beamloc/strategies.hpp"

#include <benchmark/benchmark.h>
#include <spdlog/spdlog.h>

namespace beamloc {
namespace {

constexpr int kModes = 8;

BeamConfig beam_with(int n_elements) {
    BeamConfig c = reference_beam();
    c.n_elements = n_elements;
    return c;
}

DamageScenario case_one() {
    DamageScenario s;
    s.damaged_elements = {{6, 0.25}, {7, 0.25}};
    return s;
}

void BM_SolveModes(benchmark::State& state) {
    const BeamConfig c = beam_with(static_cast<int>(state.range(0)));
    const auto model = assemble(c, DamageParams::uniform(c));
    for (auto _ : state) benchmark::DoNotOptimize(solve_modes(model, kModes));
}
BENCHMARK(BM_SolveModes)->Arg(20)->Arg(40)->Arg(80)->Unit(benchmark::kMicrosecond);

void BM_EvalObjective(benchmark::State& state) {
    const BeamConfig c = reference_beam();
    const MeasuredModes measured = synthesize_measurement(c, make_damaged_params(c, case_one()), kModes, 0.0, 1);
    const DamageParams trial = DamageParams::uniform(c);
    ObjectiveOptions options;
    options.compute_gradient = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(eval_objective(c, trial, measured, ObjectiveWeights{}, options));
}
BENCHMARK(BM_EvalObjective)->ArgName("gradient")->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_DempsterCombine(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Bpa a{Eigen::VectorXd::LinSpaced(n, 0.1, 1.0), 0.0};
    Bpa b{Eigen::VectorXd::LinSpaced(n, 1.0, 0.1), 0.0};
    a.singletons *= 0.6 / a.singletons.sum();
    b.singletons *= 0.7 / b.singletons.sum();
    a.theta = 0.4;
    b.theta = 0.3;
    for (auto _ : state) benchmark::DoNotOptimize(dempster_combine(a, b));
}
BENCHMARK(BM_DempsterCombine)->Arg(20)->Arg(200);

void BM_GatherEvidence(benchmark::State& state) {
    const BeamConfig c = reference_beam();
    const MeasuredModes healthy = synthesize_measurement(c, DamageParams::uniform(c), kModes, 0.0, 0);
    const MeasuredModes damaged = synthesize_measurement(c, make_damaged_params(c, case_one()), kModes, 0.0, 1);
    for (auto _ : state) benchmark::DoNotOptimize(gather_evidence(c, healthy, damaged, FusionConfig{}));
}
BENCHMARK(BM_GatherEvidence)->Unit(benchmark::kMicrosecond);

void BM_HybridLocalize(benchmark::State& state) {
    const BeamConfig c = reference_beam();
    const MeasuredModes healthy = synthesize_measurement(c, DamageParams::uniform(c), kModes, 0.0, 0);
    const MeasuredModes damaged = synthesize_measurement(c, make_damaged_params(c, case_one()), kModes, 0.0, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            hybrid_localize(c, healthy, damaged, HybridConfig{}, ObjectiveWeights{}, OptimizerConfig{}));
    }
}
BENCHMARK(BM_HybridLocalize)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace beamloc

int main(int argc, char** argv) {
    spdlog::set_level(spdlog::level::off);
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
