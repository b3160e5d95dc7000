#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qstab/error.hpp"
#include "qstab/presets.hpp"
#include "qstab/steady.hpp"
#include "support.hpp"

using namespace qstab;
using qstab::testing::max_abs;

namespace {

const InvariantSet& two_photon_set() {
    static const InvariantSet set = invariant_set(presets::two_photon_loss());
    return set;
}

// Cosines of the principal angles between the column spaces of two isometries.
Eigen::VectorXd principal_cosines(const Operator& u, const Operator& v) {
    Eigen::JacobiSVD<Operator> svd(u.adjoint() * v);
    return svd.singularValues();
}

}  // namespace

// Singular values from numpy.linalg.svd of the dense vectorized generator
// (tests/oracle/generate.py).
TEST(FixedPoints, TwoPhotonLossKernelAndGap) {
    const InvariantSet& set = two_photon_set();
    EXPECT_EQ(set.fixed_points.dimension(), 4);
    EXPECT_NEAR(set.fixed_points.largest_singular_value, 1347.7388764442217, 1e-8 * 1347.7);
    EXPECT_NEAR(set.fixed_points.gap_estimate, 0.39572398429074596, 1e-9);
    for (const Operator& b : set.fixed_points.basis) {
        EXPECT_LT(hermiticity_error(b), 1e-12);
        EXPECT_NEAR(b.norm(), 1.0, 1e-12);
    }
}

TEST(FixedPoints, DisplacedOscillatorKernelAndGap) {
    const presets::DisplacedOscillator p;
    const InvariantSet set = invariant_set(presets::displaced_oscillator(p));
    EXPECT_EQ(set.fixed_points.dimension(), 1);
    EXPECT_NEAR(set.fixed_points.largest_singular_value, 76.9016204984865, 1e-9 * 76.9);
    EXPECT_NEAR(set.fixed_points.gap_estimate, 0.18367675926660901, 1e-9);
    ASSERT_TRUE(set.has_dark_structure());
    EXPECT_EQ(set.k, 1);
    const Vector c = coherent_state(p.alpha, p.dim).amplitudes();
    EXPECT_NEAR(std::abs(c.dot(set.isometry().col(0))), 1.0, 1e-9);
}

TEST(FixedPoints, EveryStateIsInvariantForTheZeroGenerator) {
    const SystemModel m(Operator::Zero(3, 3), {Operator::Zero(3, 3)});
    const InvariantSet set = invariant_set(m);
    EXPECT_EQ(set.fixed_points.dimension(), 9);
    EXPECT_EQ(set.k, 3);
}

TEST(FixedPoints, CapIsEnforced) {
    EXPECT_THROW(fixed_point_basis(presets::two_photon_loss(), 1e-9, 100), CapacityError);
}

TEST(DarkSubspace, MatchesAnalyticCatPair) {
    const InvariantSet& set = two_photon_set();
    ASSERT_TRUE(set.has_dark_structure());
    EXPECT_EQ(set.k, 2);
    const CatPair cats = cat_basis(cplx(1.0, 0.0), 30);
    Operator analytic(30, 2);
    analytic << cats.even.amplitudes(), cats.odd.amplitudes();
    const Eigen::VectorXd cosines = principal_cosines(set.isometry(), analytic);
    for (int i = 0; i < 2; ++i) EXPECT_LT(std::acos(std::min(1.0, cosines(i))), 1e-6);
    EXPECT_LT(max_abs(set.isometry().adjoint() * set.isometry() - Operator::Identity(2, 2)), 1e-12);
}

TEST(DarkSubspace, AbsentWithoutCommonKernel) {
    const SystemModel m(number_op(4), {creation_op(4) + annihilation_op(4)});
    EXPECT_FALSE(dark_subspace(m).has_value());
}

TEST(DarkSubspace, UnsupportedWhenFixedPointsAreNotDark) {
    // H = 0 with a random coupling: unique full-rank fixed point, no dark states
    std::mt19937_64 gen(4);
    const SystemModel m(Operator::Zero(4, 4), {qstab::testing::random_matrix(4, 4, gen)});
    const InvariantSet set = invariant_set(m);
    EXPECT_EQ(set.fixed_points.dimension(), 1);
    EXPECT_FALSE(set.has_dark_structure());
    EXPECT_THROW(set.isometry(), UnsupportedStructure);
    EXPECT_THROW(distance_to_set(random_density(4, 2, 1), set), UnsupportedStructure);
}

TEST(Invariance, ConvexCombinationsOfInvariantStates) {
    const SystemModel m = presets::two_photon_loss();
    const InvariantSet& set = two_photon_set();
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const DensityOperator r1 = set.embed(random_density(2, 1 + trial % 2, 3 * trial).op());
        const DensityOperator r2 = set.embed(random_density(2, 2, 3 * trial + 1).op());
        const double lambda = u(gen);
        const DensityOperator mix{lambda * r1.op() + (1.0 - lambda) * r2.op()};
        const InvarianceCheck c = is_invariant(m, mix, 2e-8);
        EXPECT_TRUE(c) << c.residual;
        EXPECT_TRUE(in_dark_set(set, mix.op()));
    }
    const InvarianceCheck off = is_invariant(m, pure_density(fock_state(2, 30)));
    EXPECT_FALSE(off);
    EXPECT_GT(off.residual, 1.0);
    EXPECT_FALSE(in_dark_set(set, pure_density(fock_state(2, 30)).op()));
}

// Semidefinite-program values from cvxpy, cross-checked by a Bloch-ball
// Nelder-Mead search (tests/oracle/generate.py).
TEST(Distance, TwoPhotonLossFrozenValues) {
    const InvariantSet& set = two_photon_set();
    const struct {
        DensityOperator rho;
        double d;
    } cases[] = {{pure_density(fock_state(0, 30)), 1.186500276859145},
                 {pure_density(fock_state(1, 30)), 0.7722224337976475},
                 {pure_density(coherent_state(cplx(0.5, 0.0), 30)), 0.844507948552676},
                 {pure_density(fock_state(3, 30)), 1.8527604400534872}};
    for (const auto& c : cases) EXPECT_NEAR(distance_to_set(c.rho, set), c.d, 1e-6);
}

TEST(Distance, SingletonIsTraceDistance) {
    const presets::DisplacedOscillator p{1.0, cplx(0.8, 0.4), 20};
    const InvariantSet set = invariant_set(presets::displaced_oscillator(p));
    const DensityOperator star = pure_density(coherent_state(p.alpha, p.dim));
    for (int s = 0; s < 5; ++s) {
        const DensityOperator rho = random_density(p.dim, 1 + s, s);
        EXPECT_NEAR(distance_to_set(rho, set), trace_distance(rho, star), 1e-8);
    }
    EXPECT_NEAR(distance_to_set(star, set), 0.0, 1e-8);
}

TEST(Distance, AgreesWithGridOracle) {
    const InvariantSet& set = two_photon_set();
    for (int s = 0; s < 6; ++s) {
        const DensityOperator rho = random_density(30, 1 + s % 3, 700 + s);
        const double d = distance_to_set(rho, set);
        EXPECT_NEAR(d, qstab::testing::bloch_grid_distance(rho.op(), set.isometry()), 1e-3);
    }
}

TEST(Distance, MetricProperties) {
    const InvariantSet& set = two_photon_set();
    for (int s = 0; s < 5; ++s) {
        const DensityOperator inside = set.embed(random_density(2, 2, s).op());
        EXPECT_LT(distance_to_set(inside, set), 1e-7);
        const DensityOperator rho = random_density(30, 2, 40 + s);
        const DistanceResult r = distance_to_set_detail(rho.op(), set);
        // the minimizer is a state and attains the reported value
        Eigen::SelfAdjointEigenSolver<Operator> es(r.tau);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
        EXPECT_NEAR(r.tau.trace().real(), 1.0, 1e-12);
        EXPECT_NEAR(trace_norm(rho.op() - set.embed(r.tau).op()), r.distance, 1e-12);
        // bounded by the distance to any particular invariant state
        EXPECT_LE(r.distance, trace_distance(rho, inside) + 1e-12);
        EXPECT_LE(r.distance, 2.0 + 1e-12);
    }
    EXPECT_THROW(distance_to_set(random_density(5, 1, 1), set), ShapeMismatch);
}
