#include "support/cases.hpp"
#include "support/oracles.hpp"

#include "beamloc/errors.hpp"
#include "beamloc/objective.hpp"

#include <gtest/gtest.h>

#include <random>

namespace beamloc {
namespace {

ObjectiveWeights only(double f, double g, double c) {
    ObjectiveWeights w;
    w.frequency = f;
    w.governing = g;
    w.curvature = c;
    w.gamma = 0.0;
    return w;
}

class ObjectiveTest : public ::testing::Test {
protected:
    BeamConfig config = reference_beam();
    test::MeasurementPair data = test::measure(config, test::case_one());
};

TEST_F(ObjectiveTest, VanishesAtTheTruth) {
    const ObjectiveEvaluation e = eval_objective(config, data.truth, data.damaged, only(1, 1, 1));
    EXPECT_LT(e.value, 1e-20);
    EXPECT_LT(e.gradient.cwiseAbs().maxCoeff() * test::kHealthyModulus, 1e-8);
    EXPECT_TRUE(e.modes.mode_order_consistent);
    EXPECT_NEAR(e.modes.mac.minCoeff(), 1.0, 1e-10);
}

TEST_F(ObjectiveTest, NonnegativeAndRecombinesTerms) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.5, 1.3);
    const ObjectiveWeights w{0.7, 1.3, 0.4, 2e-3, 1e-8, PenaltyForm::Deviation};
    for (int trial = 0; trial < 5; ++trial) {
        DamageParams p = DamageParams::uniform(config);
        for (Eigen::Index i = 0; i < p.size(); ++i) p.youngs_moduli[i] *= u(rng);
        const ObjectiveEvaluation e = eval_objective(config, p, data.damaged, w);
        EXPECT_GE(e.value, 0.0);
        EXPECT_NEAR(e.value, e.data_misfit(w) + w.gamma * e.penalty, 1e-12 * e.value);
        EXPECT_NEAR(e.penalty, penalty_value(config, p, PenaltyForm::Deviation), 1e-15);
    }
}

TEST_F(ObjectiveTest, EachTermMatchesFiniteDifferences) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.8, 1.1);
    DamageParams p = DamageParams::uniform(config);
    for (Eigen::Index i = 0; i < p.size(); ++i) p.youngs_moduli[i] *= u(rng);
    for (const ObjectiveWeights& w : {only(1, 0, 0), only(0, 1, 0), only(0, 0, 1), ObjectiveWeights{}}) {
        const Eigen::VectorXd analytic = eval_objective(config, p, data.damaged, w).gradient;
        const Eigen::VectorXd fd = test::oracle::central_difference_gradient(config, p, data.damaged, w);
        EXPECT_LT(test::oracle::max_component_relative_error(analytic, fd), 1e-4);
    }
}

TEST_F(ObjectiveTest, DroppedTermContributesNothing) {
    const DamageParams p = DamageParams::uniform(config);
    const Eigen::VectorXd full = eval_objective(config, p, data.damaged, only(1, 1, 1)).gradient;
    const Eigen::VectorXd fg = eval_objective(config, p, data.damaged, only(1, 1, 0)).gradient;
    const Eigen::VectorXd c = eval_objective(config, p, data.damaged, only(0, 0, 1)).gradient;
    EXPECT_LT((full - fg - c).cwiseAbs().maxCoeff(), 1e-12 * full.cwiseAbs().maxCoeff());

    const ObjectiveEvaluation no_curv = eval_objective(config, p, data.damaged, only(1, 1, 0));
    EXPECT_EQ(no_curv.curvature_error, 0.0);
}

TEST_F(ObjectiveTest, CurvatureOfSignFlippedModeIsLarge) {
    ModalSolution s = solve_modes(assemble(config, DamageParams::uniform(config)), test::kModes);
    const MeasuredModes healthy = data.healthy;
    const Eigen::MatrixXd cm = curvature_matrix(healthy.n_points(), healthy.spacing());
    const double aligned = eval_Ec(healthy, model_curvatures(s, cm, test::kModes), 1e-8);
    s.mode_shapes.col(2) *= -1.0;
    const double flipped = eval_Ec(healthy, model_curvatures(s, cm, test::kModes), 1e-8);
    EXPECT_LT(aligned, 1e-12);
    EXPECT_GT(flipped, 1.0);
}

TEST(EvalEf, HandValueAndIdentity) {
    const BeamConfig c = reference_beam();
    const ModalSolution s = solve_modes(assemble(c, DamageParams::uniform(c)), 1);
    MeasuredModes m = sample_modes(c, s);
    EXPECT_EQ(eval_Ef(m, s).value, 0.0);
    m.frequencies[0] = s.frequencies[0] / 0.9;
    EXPECT_NEAR(eval_Ef(m, s).value, 0.01, 1e-14);
    m.mode_shapes *= -1.0;
    EXPECT_NEAR(eval_Ef(m, s).value, 0.01, 1e-14);
}

TEST(EvalEg, RayleighIdentityScalingAndStiffnessShift) {
    const BeamConfig c = reference_beam();
    const ModalSolution s = solve_modes(assemble(c, DamageParams::uniform(c)), 5);
    const Eigen::MatrixXd shapes = s.mode_shapes.leftCols(5);
    const Eigen::VectorXd freqs = s.frequencies.head(5);
    EXPECT_LT(eval_Eg(freqs, shapes, s.model.stiffness, s.model.mass), 1e-20);

    Eigen::MatrixXd scaled = shapes;
    scaled.col(1) *= 2.0;
    scaled.col(3) *= -0.3;
    EXPECT_LT(eval_Eg(freqs, scaled, s.model.stiffness, s.model.mass), 1e-20);

    const double delta = 0.03;
    EXPECT_NEAR(eval_Eg(freqs, shapes, (1.0 + delta) * s.model.stiffness, s.model.mass), 5 * delta * delta, 1e-12);
}

TEST(EvalEc, ZeroMeasuredCurvatureUsesEpsilonFloor) {
    const BeamConfig c = reference_beam();
    const ModalSolution s = solve_modes(assemble(c, DamageParams::uniform(c)), 1);
    MeasuredModes m = sample_modes(c, s);
    Eigen::MatrixXd model = m.curvatures;
    m.curvatures(0, 5) = 0.0;
    model(0, 5) = 1e-9;
    const double ec = eval_Ec(m, model, 1e-8);
    EXPECT_TRUE(std::isfinite(ec));
    EXPECT_NEAR(ec, 0.01, 1e-12);
}

TEST(ObjectiveWeights, Validation) {
    EXPECT_THROW(only(0, 0, 0).validate(), InvalidInputError);
    ObjectiveWeights w;
    w.gamma = -1.0;
    EXPECT_THROW(w.validate(), InvalidInputError);
    EXPECT_EQ(penalty_form_from_string(to_string(PenaltyForm::Magnitude)), PenaltyForm::Magnitude);
}

TEST(Penalty, FormsOnHandVectors) {
    const BeamConfig c = reference_beam(BoundaryCondition::SimplySupported, 2);
    DamageParams p{Eigen::Vector2d(35e9, 70e9)};
    EXPECT_DOUBLE_EQ(penalty_value(c, p, PenaltyForm::Deviation), 0.25);
    EXPECT_DOUBLE_EQ(penalty_value(c, p, PenaltyForm::Magnitude), 1.25);
}

}  // namespace
}  // namespace beamloc
