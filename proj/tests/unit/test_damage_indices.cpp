#include "support/cases.hpp"

#include "beamloc/damage_indices.hpp"
#include "beamloc/evidence_fusion.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

namespace beamloc {
namespace {

constexpr FeatureKind kAllFeatures[] = {FeatureKind::Frequency, FeatureKind::Curvature, FeatureKind::StrainEnergy,
                                        FeatureKind::Flexibility};

struct Fixture {
    BeamConfig config = reference_beam();
    ModalSolution healthy_model = solve_modes(assemble(config, DamageParams::uniform(config)), test::kModes);
};

std::vector<int> top_two(const Eigen::VectorXd& v) {
    std::vector<int> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + 2, idx.end(), [&](int a, int b) { return v[a] > v[b]; });
    std::vector<int> out{idx[0], idx[1]};
    std::ranges::sort(out);
    return out;
}

TEST(Features, AllVanishWhenStatesAgree) {
    const Fixture f;
    const MeasuredModes m = synthesize_measurement(f.config, DamageParams::uniform(f.config), test::kModes, 0.0, 0);
    for (FeatureKind k : kAllFeatures) {
        const FeatureVector v = compute_feature(k, m, m, f.healthy_model);
        EXPECT_EQ(v.size(), 20);
        EXPECT_EQ(v.values.cwiseAbs().maxCoeff(), 0.0) << to_string(k);
    }
}

TEST(Features, NonnegativeAndFiniteUnderDamageAndNoise) {
    const Fixture f;
    const test::MeasurementPair data = test::measure(f.config, test::scenario({7, 8}, 0.25, 0.03, 5));
    for (FeatureKind k : kAllFeatures) {
        const FeatureVector v = compute_feature(k, data.healthy, data.damaged, f.healthy_model);
        EXPECT_TRUE(v.values.allFinite()) << to_string(k);
        EXPECT_GE(v.values.minCoeff(), 0.0) << to_string(k);
    }
}

TEST(Features, InvariantToModeShapeSignFlips) {
    const Fixture f;
    const test::MeasurementPair data = test::measure(f.config, test::case_one());
    MeasuredModes healthy = data.healthy;
    MeasuredModes damaged = data.damaged;
    for (int j : {0, 3, 5}) {
        for (MeasuredModes* m : {&healthy, &damaged}) {
            m->mode_shapes.row(j) *= -1.0;
            m->curvatures.row(j) *= -1.0;
        }
    }
    for (FeatureKind k : kAllFeatures) {
        const Eigen::VectorXd a = compute_feature(k, data.healthy, data.damaged, f.healthy_model).values;
        const Eigen::VectorXd b = compute_feature(k, healthy, damaged, f.healthy_model).values;
        EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10 * std::max(a.cwiseAbs().maxCoeff(), 1e-300))
            << to_string(k);
    }
}

TEST(StrainEnergy, TopTwoEntriesAreTheDamagedElements) {
    const Fixture f;
    const test::MeasurementPair data = test::measure(f.config, test::case_one());
    const FeatureVector v = msecr_index(data.healthy, data.damaged, f.healthy_model);
    EXPECT_EQ(top_two(v.values), (std::vector<int>{6, 7}));
}

TEST(StrainEnergy, ElementSharesSumToEigenvalues) {
    const Fixture f;
    const ModalSolution& s = f.healthy_model;
    double total = 0.0;
    for (int e = 0; e < s.model.n_elements(); ++e) {
        for (int j = 0; j < s.n_modes; ++j) total += s.model.element_form(e, s.mode_shapes.col(j), s.mode_shapes.col(j));
    }
    EXPECT_NEAR(total / s.eigenvalues.head(s.n_modes).sum(), 1.0, 1e-10);

    const Eigen::MatrixXd zero_shift = s.mode_shapes.leftCols(s.n_modes);
    EXPECT_EQ(msecr_index(zero_shift, zero_shift, s.model).values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Flexibility, SingleSiteArgmaxIsDamaged) {
    const Fixture f;
    const test::MeasurementPair data = test::measure(f.config, test::scenario({7}));
    const FeatureVector v = flexibility_index(data.healthy, data.damaged, f.healthy_model);
    Eigen::Index top = 0;
    v.values.maxCoeff(&top);
    EXPECT_EQ(top, 6);
}

TEST(Flexibility, FirstModeDominatesModalFlexibility) {
    const Fixture f;
    const ModalSolution& s = f.healthy_model;
    const Eigen::MatrixXd f1 = modal_flexibility(s.mode_shapes.leftCols(1), s.frequencies.head(1));
    const Eigen::MatrixXd f2 = modal_flexibility(s.mode_shapes.leftCols(2), s.frequencies.head(2));
    const double ratio = s.frequencies[0] / s.frequencies[1];
    const double n1 = f1.jacobiSvd().singularValues()[0];
    const double n2 = f2.jacobiSvd().singularValues()[0];
    EXPECT_LE(std::abs(n2 - n1) / n1, ratio * ratio + 1e-12);
}

TEST(Frequency, NonnegativeOnPairedCase) {
    const Fixture f;
    const test::MeasurementPair data = test::measure(f.config, test::case_one());
    const FeatureVector v = frequency_index(data.healthy, data.damaged, f.healthy_model);
    EXPECT_GE(v.values.minCoeff(), 0.0);
    // Each mode spreads |d omega_j| over the elements, so the total equals the summed shifts.
    const double shifts = (data.damaged.frequencies - data.healthy.frequencies).cwiseAbs().sum();
    EXPECT_NEAR(v.values.sum() / shifts, 1.0, 1e-10);
}

TEST(Curvature, SingleNodeChangeTouchesAdjacentElementsOnly) {
    const BeamConfig c = reference_beam();
    MeasuredModes und = synthesize_measurement(c, DamageParams::uniform(c), 1, 0.0, 0);
    MeasuredModes dam = und;
    dam.curvatures(0, 9) += 3.0;
    const FeatureVector v = curvature_index(und, dam);
    for (int e = 0; e < v.size(); ++e) {
        if (e == 8 || e == 9) {
            EXPECT_GT(v.values[e], 0.0);
        } else {
            EXPECT_EQ(v.values[e], 0.0) << e;
        }
    }
    EXPECT_DOUBLE_EQ(v.values[8], 0.5 * 3.0);
}

TEST(Features, PositiveScalingKeepsRankingAndNormalization) {
    const Fixture f;
    const test::MeasurementPair data = test::measure(f.config, test::case_two());
    const Eigen::VectorXd d = msecr_index(data.healthy, data.damaged, f.healthy_model).values;
    const Eigen::VectorXd scaled = 37.5 * d;
    EXPECT_EQ(damage_ranks(d), damage_ranks(scaled));
    const NormalizedIndices a = normalize_indices(d);
    const NormalizedIndices b = normalize_indices(scaled);
    EXPECT_LT((a.norm - b.norm).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((a.relative - b.relative).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(FeatureNames, RoundTrip) {
    for (FeatureKind k : kAllFeatures) EXPECT_EQ(feature_kind_from_string(to_string(k)), k);
}

}  // namespace
}  // namespace beamloc
