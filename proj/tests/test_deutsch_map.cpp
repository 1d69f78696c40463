#include <gtest/gtest.h>

#include "support.hpp"

using namespace ctckit;
using namespace ctckit::testing;

TEST(DeutschMap, IdentityGateKeepsSigma) {
    SeededRng rng(10);
    const DensityOperator r = random_density(rng, 3), s = random_density(rng, 2);
    EXPECT_LT(trace_distance(deutsch_map(UnitaryGate::identity(3, 2), r, s), s), 1e-14);
    EXPECT_LT(trace_distance(evolve_out(UnitaryGate::identity(3, 2), r, s), r), 1e-14);
}

TEST(DeutschMap, SwapReturnsRho) {
    SeededRng rng(11);
    const DensityOperator r = random_density(rng, 3), s = random_density(rng, 3);
    EXPECT_LT(trace_distance(deutsch_map(UnitaryGate::swap(3), r, s), r), 1e-14);
    EXPECT_LT(trace_distance(evolve_out(UnitaryGate::swap(3), r, s), s), 1e-14);
}

TEST(DeutschMap, MatchesBruteForceOnRandomGates) {
    SeededRng rng(12);
    for (auto [d1, d2] : std::vector<std::pair<Index, Index>>{{2, 2}, {4, 2}, {3, 2}, {2, 3}}) {
        for (int t = 0; t < 5; ++t) {
            const UnitaryGate u = random_unitary(rng, d1, d2);
            const DensityOperator r = random_density(rng, d1), s = random_density(rng, d2);
            EXPECT_LT(max_abs_entry(deutsch_map(u, r, s).matrix() - ref_time_traveller_map(u, r.matrix(), s.matrix())), 1e-13);
            const DensityOperator out = evolve_out(u, r, s);
            EXPECT_LT(max_abs_entry(out.matrix() - ref_output_map(u, r.matrix(), s.matrix())), 1e-13);
            EXPECT_NEAR(out.matrix().trace().real(), 1.0, 1e-12);
        }
    }
}

TEST(DeutschMap, PermutationFastPathMatchesDenseProduct) {
    SeededRng rng(13);
    for (int t = 0; t < 10; ++t) {
        const UnitaryGate p = UnitaryGate::from_permutation(4, 2, random_permutation(rng, 8));
        const UnitaryGate dense = UnitaryGate::from_matrix(4, 2, p.matrix());
        const DensityOperator r = random_density(rng, 4), s = random_density(rng, 2);
        EXPECT_LT(trace_distance(deutsch_map(p, r, s), deutsch_map(dense, r, s)), 1e-14);
        EXPECT_LT(trace_distance(evolve_out(p, r, s), evolve_out(dense, r, s)), 1e-14);
    }
}

TEST(DeutschMap, ExampleGateComponentEquations) {
    SeededRng rng(14);
    const UnitaryGate u = example_discontinuous_gate();
    for (int t = 0; t < 20; ++t) {
        const DensityOperator a = random_density(rng, 2), b = random_density(rng, 2), s = random_density(rng, 2);
        const ComplexMatrix out = deutsch_map(u, kron(a, b), s).matrix();
        EXPECT_LT(std::abs(out(0, 0) - example_sigma_00(a.matrix(), b.matrix(), s.matrix())), 1e-12);
        EXPECT_LT(std::abs(out(0, 1) - example_sigma_01(a.matrix(), b.matrix(), s.matrix())), 1e-12);
        const ComplexMatrix rh = evolve_out(u, kron(a, b), s).matrix();
        EXPECT_LT(std::abs(rh(0, 0) - example_rho_hat_00(a.matrix(), b.matrix(), s.matrix())), 1e-12);
    }
}

TEST(DeutschMap, RejectsMismatchedDimensions) {
    const UnitaryGate u = example_discontinuous_gate();
    EXPECT_THROW(deutsch_map(u, DensityOperator::maximally_mixed(2), DensityOperator::maximally_mixed(2)), DimensionError);
    EXPECT_THROW(deutsch_map(u, DensityOperator::maximally_mixed(4), DensityOperator::maximally_mixed(3)), DimensionError);
    EXPECT_THROW(evolve_out(u, DensityOperator::maximally_mixed(8), DensityOperator::maximally_mixed(2)), DimensionError);
}

TEST(Superoperator, IdentityAndSwap) {
    SeededRng rng(15);
    const DensityOperator r = random_density(rng, 2);
    const AffineMapReal id = build_superoperator(UnitaryGate::identity(2, 2), r);
    EXPECT_TRUE(id.linear.isApprox(RealMatrix::Identity(3, 3), 1e-14));
    EXPECT_LT(id.offset.norm(), 1e-14);
    const AffineMapReal sw = build_superoperator(UnitaryGate::swap(2), r);
    EXPECT_LT(sw.linear.norm(), 1e-14);
    EXPECT_LT((sw.offset - HermitianBasis(2).traceless_coordinates(r.matrix())).norm(), 1e-14);
}

TEST(Superoperator, ReconstructsTheMap) {
    SeededRng rng(16);
    for (auto [d1, d2] : std::vector<std::pair<Index, Index>>{{2, 2}, {4, 2}, {2, 3}}) {
        const UnitaryGate u = random_unitary(rng, d1, d2);
        const DensityOperator r = random_density(rng, d1);
        const AffineMapReal m = build_superoperator(u, r);
        const HermitianBasis hb(d2);
        for (int t = 0; t < 20; ++t) {
            const DensityOperator s = random_density(rng, d2);
            const ComplexMatrix via_map = hb.from_traceless(m(hb.traceless_coordinates(s.matrix())));
            EXPECT_LT(max_abs_entry(via_map - deutsch_map(u, r, s).matrix()), 1e-12);
        }
    }
}

TEST(FixedPoints, ExampleRhoB) {
    const FixedPointSet f = fixed_point_set(example_discontinuous_gate(), example_rho_b());
    ASSERT_EQ(f.k(), 1);
    const ComplexMatrix& b = f.basis[0];
    EXPECT_LT(std::abs(b(0, 1)), 1e-9);
    EXPECT_LT(std::abs(b.trace()), 1e-12);
    EXPECT_NEAR(std::abs(b(0, 0)), 1.0 / std::sqrt(2.0), 1e-12);
    const BlochVector p = to_bloch(f.particular);
    EXPECT_LT(std::hypot(p.x, p.y), 1e-9);
    EXPECT_LE(f.map_residual, 1e-10);
}

TEST(FixedPoints, ExampleRhoAIsChaoticState) {
    for (double eps : {0.5, 0.1, 0.01, 0.001}) {
        const FixedPointSet f = fixed_point_set(example_discontinuous_gate(), example_rho_a(eps));
        EXPECT_EQ(f.k(), 0);
        EXPECT_LE(trace_distance(f.particular, DensityOperator::maximally_mixed(2)), 1e-8);
    }
}

TEST(FixedPoints, ExampleRhoCIsNorthPole) {
    for (double eps : {0.5, 0.1, 0.01, 0.001}) {
        const FixedPointSet f = fixed_point_set(example_discontinuous_gate(), example_rho_c(eps));
        EXPECT_EQ(f.k(), 0);
        EXPECT_LE(trace_distance(f.particular, DensityOperator::basis_state(2, 0)), 1e-8);
    }
}

// With rho_a = |0><0| and (rho_b)_00 = 1 - eps the component equations read
//   s00 = (1 - eps) - (1 - 2 eps)(s00 - 1)  =>  s00 = 1/2
//   s01 = (1 - eps) * 0 * s01 + eps * s10   =>  |s01| = eps |s01|  =>  s01 = 0
// so the chaotic state is the only solution for every 0 < eps < 1.
TEST(FixedPoints, RhoAUniqueSolutionFromComponentEquations) {
    for (double eps : {0.9, 0.3, 0.05}) {
        const ComplexMatrix ra = DensityOperator::basis_state(2, 0).matrix();
        const ComplexMatrix rb = DensityOperator::diagonal({1.0 - eps, eps}).matrix();
        const ComplexMatrix half = DensityOperator::maximally_mixed(2).matrix();
        EXPECT_LT(std::abs(example_sigma_00(ra, rb, half) - 0.5), 1e-15);
        EXPECT_LT(std::abs(example_sigma_01(ra, rb, half)), 1e-15);
        const FixedPointSet f = fixed_point_set(example_discontinuous_gate(), example_rho_a(eps));
        EXPECT_EQ(f.k(), 0);
    }
}

TEST(FixedPoints, IdentityAndSwapDimensions) {
    SeededRng rng(17);
    EXPECT_EQ(fixed_point_set(UnitaryGate::identity(2, 2), random_density(rng, 2)).k(), 3);
    EXPECT_EQ(fixed_point_set(UnitaryGate::identity(2, 3), random_density(rng, 2)).k(), 8);
    const DensityOperator r = random_density(rng, 3);
    const FixedPointSet sw = fixed_point_set(UnitaryGate::swap(3), r);
    EXPECT_EQ(sw.k(), 0);
    EXPECT_LT(trace_distance(sw.particular, r), 1e-10);
}

TEST(FixedPoints, BasisDirectionsAreFixedAndOrthonormal) {
    SeededRng rng(18);
    for (int t = 0; t < 30; ++t) {
        const UnitaryGate u = UnitaryGate::from_permutation(4, 2, random_permutation(rng, 8));
        const FixedPointSet f = fixed_point_set(u, DensityOperator::basis_state(4, static_cast<Index>(rng.below(4))));
        const RealMatrix& bc = f.basis_coordinates;
        EXPECT_LT((bc.transpose() * bc - RealMatrix::Identity(f.k(), f.k())).norm(), 1e-12);
        EXPECT_LT((f.map.linear * bc - bc).norm(), 1e-10);
        for (Index i = 0; i < f.k(); ++i)
            for (Index j = 0; j < f.k(); ++j)
                EXPECT_NEAR(HermitianBasis::hs_inner(f.basis[static_cast<std::size_t>(i)], f.basis[static_cast<std::size_t>(j)]),
                            i == j ? 1.0 : 0.0, 1e-12);
        EXPECT_LE(ref_trace_distance(ref_time_traveller_map(u, f.rho.matrix(), f.particular.matrix()), f.particular.matrix()),
                  1e-10);
    }
}

TEST(FixedPoints, ParticularMatchesRestartedCesaroReference) {
    SeededRng rng(19);
    for (int t = 0; t < 10; ++t) {
        const UnitaryGate u = random_unitary(rng, 4, 2);
        const DensityOperator r = random_density(rng, 4);
        const FixedPointSet f = fixed_point_set(u, r);
        const ComplexMatrix ref = ref_cesaro_fixed_point(u, r.matrix(), DensityOperator::maximally_mixed(2).matrix());
        if (f.k() == 0) {
            EXPECT_LE(ref_trace_distance(ref, f.particular.matrix()), 1e-8);
        }
    }
}

TEST(Membership, ExampleRhoB) {
    const FixedPointSet f = fixed_point_set(example_discontinuous_gate(), example_rho_b());
    EXPECT_TRUE(membership(f, DensityOperator::diagonal({0.3, 0.7})).member);
    EXPECT_FALSE(membership(f, from_bloch({0.5, 0.0, 0.0})).member);
    EXPECT_TRUE(membership(f, f.particular).member);
    EXPECT_TRUE(membership(f, DensityOperator::basis_state(2, 0)).member);
    EXPECT_TRUE(membership(f, DensityOperator::basis_state(2, 1)).member);
    EXPECT_THROW(membership(f, DensityOperator::maximally_mixed(3)), DimensionError);
}

TEST(Membership, ParticularAlwaysMember) {
    SeededRng rng(20);
    for (int t = 0; t < 20; ++t) {
        const FixedPointSet f = fixed_point_set(random_unitary(rng, 2, 2), random_density(rng, 2));
        EXPECT_TRUE(membership(f, f.particular).member);
    }
}

TEST(Cesaro, ConvergesOnPeriodicMap) {
    // x -> -x has the fixed point 0, which plain iteration from 1 never reaches.
    AffineMapReal m{-RealMatrix::Identity(1, 1), RealVector::Zero(1)};
    const CesaroResult r = cesaro_average(m, RealVector::Ones(1), 1000, 1e-12);
    EXPECT_LT(std::abs(r.x(0)), 1e-12);
}
