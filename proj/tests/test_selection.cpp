#include <gtest/gtest.h>

#include "support.hpp"

using namespace ctckit;
using namespace ctckit::testing;

TEST(MaxEntropy, RhoBSelectsChaoticState) {
    const FixedPointSet f = fixed_point_set(example_discontinuous_gate(), example_rho_b());
    const SelectionResult r = max_entropy_state(f);
    EXPECT_TRUE(r.converged);
    EXPECT_LT(trace_distance(r.sigma, DensityOperator::maximally_mixed(2)), 1e-8);
    EXPECT_NEAR(r.entropy, std::log(2.0), 1e-12);
}

TEST(MaxEntropy, SingletonShortCircuits) {
    const FixedPointSet f = fixed_point_set(example_discontinuous_gate(), example_rho_c(0.1));
    const SelectionResult r = max_entropy_state(f);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 0);
    EXPECT_LT(trace_distance(r.sigma, DensityOperator::basis_state(2, 0)), 1e-8);
    EXPECT_NEAR(r.entropy, 0.0, 1e-8);
}

TEST(MaxEntropy, IdentityGateGivesMaximallyMixed) {
    SeededRng rng(30);
    for (Index d2 : {2, 3}) {
        const FixedPointSet f = fixed_point_set(UnitaryGate::identity(2, d2), random_density(rng, 2));
        const SelectionResult r = max_entropy_state(f);
        EXPECT_TRUE(r.converged);
        EXPECT_LT(trace_distance(r.sigma, DensityOperator::maximally_mixed(d2)), 1e-8);
        EXPECT_NEAR(r.entropy, std::log(static_cast<double>(d2)), 1e-10);
    }
}

TEST(MaxEntropy, BoundaryMaximiser) {
    // Ascent started from a pure state on the boundary of the identity-gate set.
    const FixedPointSet f = fixed_point_set(UnitaryGate::identity(2, 2), DensityOperator::maximally_mixed(2));
    const RealVector start = HermitianBasis(2).traceless_coordinates(DensityOperator::basis_state(2, 1).matrix()) -
                             f.particular_coordinates;
    const RealVector y = f.basis_coordinates.transpose() * start;
    const SelectionResult r = max_entropy_state(f, {}, y);
    EXPECT_LT(trace_distance(r.sigma, DensityOperator::maximally_mixed(2)), 1e-8);
}

TEST(MaxEntropy, RejectsInfeasibleStart) {
    const FixedPointSet f = fixed_point_set(UnitaryGate::identity(2, 2), DensityOperator::maximally_mixed(2));
    EXPECT_THROW(max_entropy_state(f, {}, RealVector::Constant(3, 5.0)), InvalidStateError);
    EXPECT_THROW(max_entropy_state(f, {}, RealVector::Zero(2)), DimensionError);
}

TEST(MaxEntropy, NonConvergenceIsReported) {
    SelectionRule rule;
    rule.max_iters = 1;
    const FixedPointSet g = fixed_point_set(UnitaryGate::identity(2, 3), DensityOperator::maximally_mixed(2));
    SeededRng rng(31);
    const SelectionResult r = max_entropy_state(g, rule, random_feasible_coordinates(rng, g));
    EXPECT_FALSE(r.converged);
    EXPECT_TRUE(membership(g, r.sigma).member);
}

TEST(MinEntropy, RhoBGivesNorthPole) {
    const FixedPointSet f = fixed_point_set(example_discontinuous_gate(), example_rho_b());
    const SelectionResult r = min_entropy_state(f);
    EXPECT_TRUE(r.converged);
    EXPECT_LT(trace_distance(r.sigma, DensityOperator::basis_state(2, 0)), 1e-8);
    EXPECT_NEAR(r.entropy, 0.0, 1e-8);
    // Deterministic.
    const SelectionResult again = min_entropy_state(f);
    EXPECT_EQ(r.sigma.matrix(), again.sigma.matrix());
}

TEST(MinEntropy, IdentityGateGivesPureState) {
    SeededRng rng(32);
    const FixedPointSet f = fixed_point_set(UnitaryGate::identity(2, 2), random_density(rng, 2));
    const SelectionResult r = min_entropy_state(f);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.entropy, 0.0, 1e-8);
    EXPECT_TRUE(membership(f, r.sigma).member);
}

TEST(MinEntropy, SingletonIsItsElement) {
    const FixedPointSet f = fixed_point_set(example_discontinuous_gate(), example_rho_a(0.1));
    EXPECT_LT(trace_distance(min_entropy_state(f).sigma, DensityOperator::maximally_mixed(2)), 1e-8);
}

TEST(ConstantIndex, SelectsRequestedPointAndClampsOutside) {
    const FixedPointSet f = fixed_point_set(example_discontinuous_gate(), example_rho_b());
    const RealVector y0 = RealVector::Zero(1);
    const SelectionResult r = constant_index_state(f, SelectionRule::constant(y0));
    EXPECT_TRUE(r.converged);
    EXPECT_LT(trace_distance(r.sigma, f.particular), 1e-12);
    const SelectionResult far = constant_index_state(f, SelectionRule::constant(RealVector::Constant(1, 10.0)));
    EXPECT_FALSE(far.converged);
    EXPECT_TRUE(membership(f, far.sigma).member);
    // Extra coordinates are ignored so one rule can be applied where k varies.
    const SelectionResult extra = constant_index_state(f, SelectionRule::constant(RealVector::Zero(2)));
    EXPECT_LT(trace_distance(extra.sigma, f.particular), 1e-12);
}

TEST(SelectionRuleValidation, RejectsBadParameters) {
    SelectionRule r;
    r.grad_tol = 0.0;
    EXPECT_THROW(r.validate(), InvalidStateError);
    r = {};
    r.step_init = -1.0;
    EXPECT_THROW(r.validate(), InvalidStateError);
    EXPECT_EQ(parse_selection_kind("max-entropy"), SelectionKind::MaxEntropy);
    EXPECT_EQ(parse_selection_kind("min_entropy"), SelectionKind::MinEntropy);
    EXPECT_EQ(parse_selection_kind("constant"), SelectionKind::ConstantIndex);
    EXPECT_THROW(parse_selection_kind("median"), ParseError);
}

TEST(Channel, ExampleOutputs) {
    const UnitaryGate u = example_discontinuous_gate();
    for (auto rule : {SelectionRule::max_entropy(), SelectionRule::min_entropy()}) {
        EXPECT_NEAR(ctc_channel(u, example_rho_a(0.1), rule).rho_hat(0, 0).real(), 0.45, 1e-8);
        EXPECT_NEAR(ctc_channel(u, example_rho_c(0.1), rule).rho_hat(0, 0).real(), 0.1, 1e-8);
    }
}

TEST(Channel, IdentityGateLeavesRhoUnchanged) {
    SeededRng rng(33);
    const DensityOperator r = random_density(rng, 3);
    for (auto rule : {SelectionRule::max_entropy(), SelectionRule::min_entropy()})
        EXPECT_LT(trace_distance(ctc_channel(UnitaryGate::identity(3, 2), r, rule).rho_hat, r), 1e-12);
}

// The channel is not affine in rho: mixing rho^A and rho^C (both product
// states near rho^B) and applying it differs from mixing the outputs.
TEST(Channel, NonlinearityWitness) {
    const UnitaryGate u = example_discontinuous_gate();
    const DensityOperator ra = example_rho_a(0.1), rc = example_rho_c(0.1);
    const double lambda = 0.5;
    const DensityOperator mixed_in = ctc_channel(u, mix(ra, rc, lambda)).rho_hat;
    const DensityOperator mixed_out = mix(ctc_channel(u, ra).rho_hat, ctc_channel(u, rc).rho_hat, lambda);
    EXPECT_GT(trace_distance(mixed_in, mixed_out), 1e-3);
}
