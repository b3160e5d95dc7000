#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qstab/error.hpp"
#include "qstab/hilbert.hpp"
#include "qstab/reference.hpp"
#include "support.hpp"

using namespace qstab;
using qstab::testing::max_abs;

TEST(Operators, LadderStructure) {
    const int d = 6;
    const Operator a = annihilation_op(d);
    const Operator ad = creation_op(d);
    EXPECT_LT(max_abs(ad - a.adjoint()), 1e-15);
    EXPECT_LT(max_abs(number_op(d) - ad * a), 1e-14);
    const Operator comm = a * ad - ad * a;
    for (int n = 0; n < d - 1; ++n) EXPECT_NEAR(comm(n, n).real(), 1.0, 1e-14);
    // the commutator is broken on the top level only
    EXPECT_NEAR(comm(d - 1, d - 1).real(), -(d - 1.0), 1e-14);
    EXPECT_THROW(annihilation_op(1), InvalidDimension);
    EXPECT_THROW(identity_op(0), InvalidDimension);
}

TEST(States, FockAndCoherent) {
    const StateVector f = fock_state(2, 5);
    EXPECT_EQ(f[2], cplx(1.0, 0.0));
    EXPECT_THROW(fock_state(5, 5), Error);

    const cplx alpha(0.8, 0.4);
    const StateVector c = coherent_state(alpha, 40);
    EXPECT_NEAR(c.amplitudes().norm(), 1.0, 1e-14);
    const Vector ac = annihilation_op(40) * c.amplitudes();
    EXPECT_LT((ac.head(39) - alpha * c.amplitudes().head(39)).norm(), 1e-12);
    EXPECT_NEAR(expectation(number_op(40), pure_density(c)).real(), std::norm(alpha), 1e-12);
    EXPECT_NEAR(std::abs(c[0]), std::exp(-0.5 * std::norm(alpha)), 1e-12);
}

TEST(States, CoherentTruncationError) {
    const cplx alpha(5.0, 0.0);
    try {
        coherent_state(alpha, 10);
        FAIL() << "expected TruncationTooSmall";
    } catch (const TruncationTooSmall& e) {
        EXPECT_EQ(e.required_dim(), required_coherent_dim(alpha, 1e-9));
        EXPECT_NO_THROW(coherent_state(alpha, e.required_dim()));
        EXPECT_LE(coherent_tail_mass(alpha, e.required_dim()), 1e-9);
        EXPECT_GT(coherent_tail_mass(alpha, e.required_dim() - 1), 1e-9);
    }
}

TEST(States, CatPair) {
    const CatPair cats = cat_basis(cplx(1.0, 0.0), 30);
    EXPECT_NEAR(cats.even.amplitudes().norm(), 1.0, 1e-14);
    EXPECT_NEAR(std::abs(cats.even.amplitudes().dot(cats.odd.amplitudes())), 0.0, 1e-14);
    for (int n = 1; n < 30; n += 2) EXPECT_EQ(std::abs(cats.even[n]), 0.0);
    for (int n = 0; n < 30; n += 2) EXPECT_EQ(std::abs(cats.odd[n]), 0.0);
    // eigenvectors of a^2 with eigenvalue alpha^2 away from the top levels
    const Operator a = annihilation_op(30);
    const Vector aa = a * a * cats.even.amplitudes();
    EXPECT_LT((aa - cats.even.amplitudes()).head(26).norm(), 1e-9);
    EXPECT_THROW(cat_basis(cplx(0.0, 0.0), 10), DegenerateInput);
}

TEST(States, StateVectorValidation) {
    Vector v = Vector::Zero(3);
    v(0) = 1.1;
    EXPECT_THROW(StateVector{v}, NormalizationError);
}

TEST(Density, Validation) {
    Operator bad = Operator::Zero(2, 2);
    bad(0, 0) = 1.0;
    bad(0, 1) = 0.3;
    EXPECT_THROW(DensityOperator{bad}, InvalidState);  // not Hermitian
    Operator half = Operator::Identity(2, 2) * 0.4;
    EXPECT_THROW(DensityOperator{half}, InvalidState);  // trace 0.8
    Operator neg = Operator::Zero(2, 2);
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    EXPECT_THROW(DensityOperator{neg}, InvalidState);
    EXPECT_THROW(DensityOperator{Operator::Zero(2, 3)}, InvalidDimension);
    EXPECT_NO_THROW(DensityOperator{Operator::Identity(3, 3) / 3.0});
}

TEST(Density, RandomDensity) {
    const DensityOperator r = random_density(8, 3, 17);
    EXPECT_NEAR(r.op().trace().real(), 1.0, 1e-14);
    Eigen::SelfAdjointEigenSolver<Operator> es(r.op());
    int positive = 0;
    for (int i = 0; i < 8; ++i) positive += es.eigenvalues()(i) > 1e-12;
    EXPECT_EQ(positive, 3);
    EXPECT_EQ(max_abs(r.op() - random_density(8, 3, 17).op()), 0.0);
    EXPECT_GT(max_abs(r.op() - random_density(8, 3, 18).op()), 1e-3);
}

TEST(TraceNorm, MatchesReferenceSvd) {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 2 + trial % 9;
        const Operator x = qstab::testing::random_matrix(d, d, gen);
        const Operator h = qstab::testing::random_hermitian(d, gen);
        EXPECT_NEAR(trace_norm(x), reference::trace_norm_svd(x), 1e-10 * (1.0 + trace_norm(x)));
        EXPECT_NEAR(trace_norm(h), reference::trace_norm_svd(h), 1e-10 * (1.0 + trace_norm(h)));
    }
}

TEST(TraceNorm, NormProperties) {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 3 + trial % 6;
        const Operator x = qstab::testing::random_matrix(d, d, gen);
        const Operator y = qstab::testing::random_matrix(d, d, gen);
        EXPECT_LE(trace_norm(x + y), trace_norm(x) + trace_norm(y) + 1e-12);
        EXPECT_NEAR(trace_norm(cplx(-2.0, 1.0) * x), std::sqrt(5.0) * trace_norm(x), 1e-10 * trace_norm(x));
        const Operator u = Eigen::HouseholderQR<Operator>(qstab::testing::random_matrix(d, d, gen)).householderQ();
        EXPECT_NEAR(trace_norm(u * x * u.adjoint()), trace_norm(x), 1e-10 * trace_norm(x));
        EXPECT_NEAR(trace_norm(x.adjoint()), trace_norm(x), 1e-10 * trace_norm(x));
    }
    EXPECT_NEAR(trace_norm(random_density(6, 4, 1).op()), 1.0, 1e-13);
}

TEST(TraceDistance, ClosedForms) {
    const int d = 40;
    const DensityOperator f0 = pure_density(fock_state(0, d));
    const DensityOperator f1 = pure_density(fock_state(1, d));
    EXPECT_NEAR(trace_distance(f0, f1), 2.0, 1e-13);
    const cplx a(0.8, 0.4), b(-1.0, 0.0);
    const double closed = 2.0 * std::sqrt(1.0 - std::exp(-std::norm(a - b)));
    EXPECT_NEAR(trace_distance(pure_density(coherent_state(a, d)), pure_density(coherent_state(b, d))), closed,
                1e-9);
    EXPECT_THROW(trace_distance(f0, pure_density(fock_state(0, 5))), ShapeMismatch);
}

TEST(Vectorization, ColumnStacking) {
    std::mt19937_64 gen(9);
    const int d = 4;
    const Operator a = qstab::testing::random_matrix(d, d, gen);
    const Operator x = qstab::testing::random_matrix(d, d, gen);
    const Operator b = qstab::testing::random_matrix(d, d, gen);
    const Vector v = vectorize(x);
    EXPECT_EQ(v(1 + 2 * d), x(1, 2));
    EXPECT_EQ(max_abs(devectorize(v, d) - x), 0.0);
    // vec(A X B) = (B^T kron A) vec(X)
    Operator kron(d * d, d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) kron.block(i * d, j * d, d, d) = b(j, i) * a;
    EXPECT_LT((kron * v - vectorize(a * x * b)).norm(), 1e-12);
}
