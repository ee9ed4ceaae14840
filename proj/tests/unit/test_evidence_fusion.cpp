#include "support/cases.hpp"
#include "support/oracles.hpp"

#include "beamloc/errors.hpp"
#include "beamloc/evidence_fusion.hpp"
#include "beamloc/strategies.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace beamloc {
namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

FusedEvidence with_beliefs(const Eigen::VectorXd& belief) {
    FusedEvidence f;
    f.singleton_masses = belief;
    f.belief = belief;
    f.theta_mass = 1.0 - belief.sum();
    f.plausibility = belief.array() + f.theta_mass;
    return f;
}

TEST(NormalizeIndices, HandValues) {
    const NormalizedIndices uniform = normalize_indices(vec({1, 1, 1, 1}));
    EXPECT_NEAR((uniform.norm.array() - 0.25).abs().maxCoeff(), 0.0, 1e-9);

    const NormalizedIndices zero = normalize_indices(Eigen::VectorXd::Zero(5));
    EXPECT_EQ(zero.norm.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(zero.relative.cwiseAbs().maxCoeff(), 0.0);

    const NormalizedIndices pair = normalize_indices(vec({3, 1}));
    EXPECT_NEAR(pair.norm[0], 0.75, 1e-9);
    EXPECT_NEAR(pair.norm[1], 0.25, 1e-9);
    EXPECT_NEAR(pair.relative[0], 1.0, 1e-9);
    EXPECT_NEAR(pair.relative[1], 1.0 / 3.0, 1e-9);
}

TEST(Concentration, EntropyExtremesAndHandValue) {
    const Concentration flat = concentration(Eigen::VectorXd::Constant(20, 0.05));
    EXPECT_NEAR(flat.entropy, 1.0, 1e-6);
    EXPECT_NEAR(flat.concentration, 0.0, 1e-6);

    Eigen::VectorXd one_hot = Eigen::VectorXd::Zero(20);
    one_hot[4] = 1.0;
    const Concentration sharp = concentration(one_hot);
    EXPECT_NEAR(sharp.entropy, 0.0, 1e-6);
    EXPECT_NEAR(sharp.concentration, 1.0, 1e-6);

    const double expected = -(0.75 * std::log(0.75) + 0.25 * std::log(0.25)) / std::log(2.0);
    EXPECT_NEAR(concentration(vec({0.75, 0.25})).entropy, expected, 1e-8);
    EXPECT_NEAR(expected, 0.8113, 1e-4);
}

TEST(IgnoranceComponents, ExtremesAndLogistic) {
    const Eigen::VectorXd d = vec({0.1, 0.0, 0.05, 0.02});
    const IgnoranceComponents c = ignorance_components(d, damage_ranks(d), 50.0);
    EXPECT_NEAR(c.relative_weakness[0], 0.0, 1e-8);
    EXPECT_EQ(c.rank[0], 0.0);
    EXPECT_DOUBLE_EQ(c.rank[1], 1.0);
    EXPECT_DOUBLE_EQ(c.confidence[1], 0.5);
    EXPECT_NEAR(c.confidence[0], 1.0 - 1.0 / (1.0 + std::exp(-5.0)), 1e-12);
    EXPECT_NEAR(c.confidence[0], 0.0067, 1e-4);
    EXPECT_EQ(c.distribution.minCoeff(), c.distribution.maxCoeff());
}

TEST(DamageRanks, TiesGoToLowerIndex) {
    EXPECT_EQ(damage_ranks(vec({0.2, 0.5, 0.2, 0.1})), (std::vector<int>{1, 0, 2, 3}));
}

TEST(SynthesizeAlpha, FloorCeilingAndConvexCombination) {
    const int n = 3;
    auto components = [n](double d, double r, double k, double c) {
        return IgnoranceComponents{Eigen::VectorXd::Constant(n, d), Eigen::VectorXd::Constant(n, r),
                                   Eigen::VectorXd::Constant(n, k), Eigen::VectorXd::Constant(n, c)};
    };
    const IgnoranceWeights w;
    EXPECT_EQ(synthesize_alpha(components(0, 0, 0, 0), w), Eigen::VectorXd::Constant(n, kAlphaMin));
    EXPECT_NEAR((synthesize_alpha(components(1, 1, 1, 1), w).array() - 1.0).abs().maxCoeff(), 0.0, 1e-15);
    EXPECT_NEAR(synthesize_alpha(components(0.2, 0.4, 0.0, 0.5), w)[0], 0.275, 1e-15);
}

TEST(IgnoranceWeights, ValidationRejectsBadSums) {
    IgnoranceWeights w;
    EXPECT_NO_THROW(w.validate());
    w.rank = 0.3;
    EXPECT_THROW(w.validate(), InvalidInputError);
    w = IgnoranceWeights{0.0, 0.5, 0.25, 0.25};
    EXPECT_THROW(w.validate(), InvalidInputError);
}

TEST(BuildBpa, ZeroFeatureIsTotalIgnorance) {
    const FeatureBpa b = build_bpa(FeatureVector{FeatureKind::Flexibility, Eigen::VectorXd::Zero(20)},
                                   IgnoranceWeights{}, 50.0);
    EXPECT_EQ(b.singleton_masses.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(b.theta_mass, 1.0);
}

TEST(BuildBpa, MassesSumToOneForRandomFeatures) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd d(20);
        for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = u(rng);
        const FeatureBpa b = build_bpa(FeatureVector{FeatureKind::StrainEnergy, d}, IgnoranceWeights{}, 50.0);
        EXPECT_NEAR(b.bpa().total(), 1.0, kMassTolerance);
        EXPECT_GE(b.singleton_masses.minCoeff(), 0.0);
        EXPECT_GE(b.theta_mass, 0.0);
        EXPECT_LT((b.beta - (1.0 - b.alpha.array()).matrix()).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(BuildBpa, ScalingChangesOnlyConfidence) {
    Eigen::VectorXd d(6);
    d << 0.4, 0.1, 0.0, 0.7, 0.2, 0.05;
    const FeatureBpa a = build_bpa(FeatureVector{FeatureKind::StrainEnergy, d}, IgnoranceWeights{}, 50.0);
    const FeatureBpa b = build_bpa(FeatureVector{FeatureKind::StrainEnergy, 1e-6 * d}, IgnoranceWeights{}, 50.0);
    const NormalizedIndices na = normalize_indices(d);
    const NormalizedIndices nb = normalize_indices(1e-6 * d);
    EXPECT_LT((na.relative - nb.relative).cwiseAbs().maxCoeff(), 1e-3);
    EXPECT_EQ(damage_ranks(d), damage_ranks(1e-6 * d));
    EXPECT_EQ(a.components.rank, b.components.rank);

    const IgnoranceComponents raw_a = ignorance_components(d, damage_ranks(d), 50.0);
    const IgnoranceComponents raw_b = ignorance_components(10.0 * d, damage_ranks(10.0 * d), 50.0);
    EXPECT_LT((raw_a.distribution - raw_b.distribution).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((raw_a.relative_weakness - raw_b.relative_weakness).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_EQ(raw_a.rank, raw_b.rank);
    EXPECT_GT((raw_a.confidence - raw_b.confidence).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(DempsterCombine, HandEnumeratedPair) {
    const Bpa a{vec({0.6, 0.0}), 0.4};
    const FusedEvidence f = dempster_combine(a, a);
    EXPECT_NEAR(f.conflict, 0.0, 1e-15);
    EXPECT_NEAR(f.singleton_masses[0], 0.84, 1e-15);
    EXPECT_NEAR(f.theta_mass, 0.16, 1e-15);
}

TEST(DempsterCombine, VacuousIsNeutral) {
    std::mt19937_64 rng(4);
    const Bpa a = test::oracle::random_bpa(6, rng);
    const FusedEvidence f = dempster_combine(a, Bpa::vacuous(6));
    EXPECT_LT((f.singleton_masses - a.singletons).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(f.theta_mass, a.theta, 1e-15);
    EXPECT_EQ(f.conflict, 0.0);
}

TEST(DempsterCombine, MatchesPowerSetOracle) {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + trial % 6;
        const Bpa a = test::oracle::random_bpa(n, rng);
        const Bpa b = test::oracle::random_bpa(n, rng);
        const FusedEvidence fast = dempster_combine(a, b);
        EXPECT_LE(test::oracle::max_difference(fast, test::oracle::power_set_combine(a, b)), 1e-12) << trial;
        EXPECT_NEAR(fast.bpa().total(), 1.0, 1e-12);
        EXPECT_TRUE(((fast.plausibility - fast.belief).array() >= 0.0).all());
        EXPECT_GE(fast.conflict, 0.0);
        EXPECT_LT(fast.conflict, 1.0);
    }
}

TEST(DempsterCombine, TotalConflictThrows) {
    const Bpa a{vec({1.0, 0.0}), 0.0};
    const Bpa b{vec({0.0, 1.0}), 0.0};
    EXPECT_THROW(dempster_combine(a, b), TotalConflictError);
    EXPECT_THROW(dempster_combine(a, Bpa::vacuous(3)), InvalidInputError);
}

TEST(FuseFeatures, OrderDoesNotMatter) {
    const BeamConfig c = reference_beam();
    const test::MeasurementPair data = test::measure(c, test::case_two());
    FusionConfig cfg;
    cfg.features = {FeatureKind::Frequency, FeatureKind::Curvature, FeatureKind::StrainEnergy,
                    FeatureKind::Flexibility};
    const EvidenceState e = gather_evidence(c, data.healthy, data.damaged, cfg);
    std::vector<FeatureBpa> reversed(e.bpas.rbegin(), e.bpas.rend());
    const FusedEvidence forward = fuse_features(e.bpas);
    const FusedEvidence backward = fuse_features(reversed);
    EXPECT_LT((forward.singleton_masses - backward.singleton_masses).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(forward.theta_mass, backward.theta_mass, 1e-12);
    EXPECT_NEAR(forward.conflict, backward.conflict, 1e-12);
}

TEST(FuseFeatures, SingleSiteArgmaxAndFlatterFourSite) {
    const BeamConfig c = reference_beam();
    const test::MeasurementPair one = test::measure(c, test::scenario({12}));
    const test::MeasurementPair four = test::measure(c, test::scenario({3, 8, 12, 17}));
    const FusedEvidence f1 = gather_evidence(c, one.healthy, one.damaged, FusionConfig{}).fused;
    const FusedEvidence f4 = gather_evidence(c, four.healthy, four.damaged, FusionConfig{}).fused;
    EXPECT_EQ(f1.argmax(), 11);
    EXPECT_LT(f4.belief.maxCoeff(), f1.belief.maxCoeff());
}

TEST(FuseFeatures, NoDamageLeavesThetaDominant) {
    const BeamConfig c = reference_beam();
    const test::MeasurementPair data = test::measure(c, DamageScenario{});
    const FusedEvidence f = gather_evidence(c, data.healthy, data.damaged, FusionConfig{}).fused;
    EXPECT_TRUE((f.belief.array() < f.theta_mass).all());
}

TEST(FuseFeatures, RequiresTwoBpas) {
    const FeatureBpa b = build_bpa(FeatureVector{FeatureKind::StrainEnergy, Eigen::VectorXd::Ones(4)},
                                   IgnoranceWeights{}, 50.0);
    EXPECT_THROW(fuse_features({b}), InvalidInputError);
}

TEST(FilterCandidates, ThresholdRule) {
    EXPECT_EQ(filter_candidates(with_beliefs(vec({0.5, 0.4, 0.1})), 0.7), (std::vector<int>{0, 1}));
    EXPECT_EQ(filter_candidates(with_beliefs(vec({0.5, 0.4, 0.1})), 1.0), (std::vector<int>{0}));
    EXPECT_EQ(filter_candidates(with_beliefs(vec({0.2, 0.2, 0.2})), 0.7), (std::vector<int>{0, 1, 2}));
}

TEST(FilterCandidates, TopNFallbackOnlyWhenArgmaxIsAlone) {
    const FusedEvidence lone = with_beliefs(vec({0.05, 0.6, 0.1, 0.2}));
    EXPECT_EQ(filter_candidates(lone, 0.7), (std::vector<int>{1}));
    EXPECT_EQ(filter_candidates(lone, 0.7, 3), (std::vector<int>{1, 2, 3}));
    const FusedEvidence pair = with_beliefs(vec({0.05, 0.5, 0.4, 0.02}));
    EXPECT_EQ(filter_candidates(pair, 0.7, 3), (std::vector<int>{1, 2}));
}

TEST(FusionAudit, CountsCombinations) {
    const FusionAudit before = fusion_audit();
    dempster_combine(Bpa{vec({0.3, 0.2}), 0.5}, Bpa{vec({0.1, 0.1}), 0.8});
    const FusionAudit after = fusion_audit();
    EXPECT_EQ(after.combinations, before.combinations + 1);
    EXPECT_LE(after.max_mass_error, 1e-12);
}

}  // namespace
}  // namespace beamloc
