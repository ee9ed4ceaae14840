#include "support/cases.hpp"

#include "beamloc/errors.hpp"
#include "beamloc/modal_data.hpp"

#include <gtest/gtest.h>

namespace beamloc {
namespace {

using test::kModes;

TEST(DamagedParams, ReductionsApplyToListedElements) {
    const BeamConfig c = reference_beam();
    const DamageParams p = make_damaged_params(c, test::case_one());
    EXPECT_DOUBLE_EQ(p.youngs_moduli[6], 52.5e9);
    EXPECT_DOUBLE_EQ(p.youngs_moduli[7], 52.5e9);
    EXPECT_DOUBLE_EQ(p.youngs_moduli[0], 70e9);

    const DamageParams half = make_damaged_params(c, test::scenario({1}, 0.5));
    EXPECT_DOUBLE_EQ(half.youngs_moduli[0], 35e9);
    EXPECT_EQ((half.youngs_moduli.tail(19).array() == 70e9).count(), 19);

    EXPECT_EQ(make_damaged_params(c, DamageScenario{}).youngs_moduli, DamageParams::uniform(c).youngs_moduli);
}

TEST(DamagedParams, InvalidScenariosAreRejected) {
    const BeamConfig c = reference_beam();
    EXPECT_THROW(test::scenario({21}).validate(c), InvalidInputError);
    EXPECT_THROW(test::scenario({3, 3}).validate(c), InvalidInputError);
    EXPECT_THROW(test::scenario({3}, 1.0).validate(c), InvalidInputError);
    EXPECT_THROW(test::scenario({3}, -0.1).validate(c), InvalidInputError);
    DamageScenario noisy = test::scenario({3});
    noisy.noise_level = -0.01;
    EXPECT_THROW(noisy.validate(c), InvalidInputError);
}

TEST(Synthesize, NoiselessHealthyMatchesModel) {
    const BeamConfig c = reference_beam();
    const MeasuredModes m = synthesize_measurement(c, DamageParams::uniform(c), kModes, 0.0, 17);
    const ModalSolution s = solve_modes(assemble(c, DamageParams::uniform(c)), kModes);
    const MeasuredModes sampled = sample_modes(c, s);
    EXPECT_EQ(m.frequencies, sampled.frequencies);
    EXPECT_EQ(m.mode_shapes, sampled.mode_shapes);
    EXPECT_EQ(m.curvatures, sampled.curvatures);
    EXPECT_EQ(m.n_points(), 21);
    EXPECT_DOUBLE_EQ(m.spacing(), 0.05);
    for (int j = 0; j < kModes; ++j) {
        EXPECT_EQ(m.frequencies[j], s.frequencies[j]);
        EXPECT_EQ(m.mode_shapes.row(j).transpose(), s.dof_map().nodal_translations(s.mode_shapes.col(j)));
    }
}

TEST(Synthesize, SameSeedIsDeterministicAndDifferentSeedsDiffer) {
    const BeamConfig c = reference_beam();
    const DamageParams p = make_damaged_params(c, test::case_two());
    const MeasuredModes a = synthesize_measurement(c, p, kModes, 0.02, 42);
    const MeasuredModes b = synthesize_measurement(c, p, kModes, 0.02, 42);
    const MeasuredModes other = synthesize_measurement(c, p, kModes, 0.02, 43);
    EXPECT_EQ(a.frequencies, b.frequencies);
    EXPECT_EQ(a.mode_shapes, b.mode_shapes);
    EXPECT_EQ(a.curvatures, b.curvatures);
    EXPECT_NE(a.mode_shapes, other.mode_shapes);
}

TEST(Synthesize, OnePercentNoiseKeepsFrequenciesClose) {
    const BeamConfig c = reference_beam();
    const MeasuredModes clean = synthesize_measurement(c, DamageParams::uniform(c), kModes, 0.0, 0);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const MeasuredModes noisy = synthesize_measurement(c, DamageParams::uniform(c), kModes, 0.01, seed);
        const double worst = (noisy.frequencies.array() / clean.frequencies.array() - 1.0).abs().maxCoeff();
        EXPECT_LT(worst, 0.05) << "seed " << seed;
    }
}

TEST(Synthesize, ZeroShapeEntriesStayZeroUnderNoise) {
    for (BoundaryCondition bc : {BoundaryCondition::SimplySupported, BoundaryCondition::Cantilever}) {
        const BeamConfig c = reference_beam(bc);
        const MeasuredModes clean = synthesize_measurement(c, DamageParams::uniform(c), kModes, 0.0, 0);
        const MeasuredModes noisy = synthesize_measurement(c, DamageParams::uniform(c), kModes, 0.05, 9);
        for (Eigen::Index j = 0; j < clean.mode_shapes.rows(); ++j) {
            for (Eigen::Index i = 0; i < clean.mode_shapes.cols(); ++i) {
                if (clean.mode_shapes(j, i) == 0.0) {
                    EXPECT_EQ(noisy.mode_shapes(j, i), 0.0);
                }
            }
        }
        EXPECT_EQ(noisy.mode_shapes.col(0).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(Synthesize, NoisyCurvatureComesFromNoisyShapes) {
    const BeamConfig c = reference_beam();
    const MeasuredModes m = synthesize_measurement(c, DamageParams::uniform(c), kModes, 0.03, 4);
    const Eigen::MatrixXd cm = curvature_matrix(m.n_points(), m.spacing());
    EXPECT_LT((m.curvatures - m.mode_shapes * cm.transpose()).norm(), 1e-9 * m.curvatures.norm());
}

TEST(AlignModes, FlippedModelModesAreRestored) {
    const BeamConfig c = reference_beam();
    const MeasuredModes measured = synthesize_measurement(c, DamageParams::uniform(c), kModes, 0.0, 0);
    ModalSolution s = solve_modes(assemble(c, DamageParams::uniform(c)), kModes);
    const Eigen::MatrixXd original = s.mode_shapes;
    s.mode_shapes.col(1) *= -1.0;
    s.mode_shapes.col(4) *= -1.0;
    EXPECT_LT(mode_correlation(measured, s, 1), 0.0);
    align_modes(s, measured);
    EXPECT_EQ(s.mode_shapes, original);
}

TEST(CondensedShapes, LowModesAreRecoveredClosely) {
    const BeamConfig c = reference_beam();
    const ModalSolution s = solve_modes(assemble(c, DamageParams::uniform(c)), 3);
    const MeasuredModes m = sample_modes(c, s);
    const Eigen::MatrixXd lifted = condensed_shapes(m, s.model);
    for (int j = 0; j < 3; ++j) {
        EXPECT_LT((lifted.col(j) - s.mode_shapes.col(j)).norm(), 2e-2 * s.mode_shapes.col(j).norm()) << j;
    }
}

TEST(MeasuredModes, ValidateCatchesShapeMismatch) {
    const BeamConfig c = reference_beam();
    MeasuredModes m = synthesize_measurement(c, DamageParams::uniform(c), 3, 0.0, 0);
    EXPECT_NO_THROW(m.validate());
    m.curvatures.conservativeResize(2, Eigen::NoChange);
    EXPECT_THROW(m.validate(), InvalidInputError);
}

}  // namespace
}  // namespace beamloc
