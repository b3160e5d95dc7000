#include "qstab/hilbert.hpp"

#include <cmath>
#include <random>
#include <string>

#include "qstab/error.hpp"

namespace qstab {

void require_operator(const Operator& op, int dim, const char* what) {
    if (op.rows() != dim || op.cols() != dim) {
        throw ShapeMismatch(std::string(what) + ": expected " + std::to_string(dim) + "x" +
                            std::to_string(dim) + ", got " + std::to_string(op.rows()) + "x" +
                            std::to_string(op.cols()));
    }
    if (!op.allFinite()) {
        throw InvalidArgument(std::string(what) + ": non-finite entries");
    }
}

double hermiticity_error(const Operator& op) {
    if (op.size() == 0) return 0.0;
    return (op - op.adjoint()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Operator& hermitian) {
    Operator sym = 0.5 * (hermitian + hermitian.adjoint());
    Eigen::SelfAdjointEigenSolver<Operator> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

StateVector::StateVector(Vector amplitudes, double tail_tol, double raw_tail_mass)
    : amps_(std::move(amplitudes)), raw_tail_mass_(raw_tail_mass) {
    if (amps_.size() < 1) throw InvalidDimension("state vector must have dim >= 1");
    if (!amps_.allFinite()) throw InvalidArgument("state vector has non-finite amplitudes");
    const double norm = amps_.norm();
    if (std::abs(norm - 1.0) > tail_tol) {
        throw NormalizationError("state vector norm " + std::to_string(norm) + " differs from 1");
    }
}

DensityOperator::DensityOperator(Operator op, const Tolerances& tol) : op_(std::move(op)) {
    if (op_.rows() < 1 || op_.rows() != op_.cols()) {
        throw InvalidDimension("density operator must be square with dim >= 1");
    }
    if (!op_.allFinite()) throw InvalidState("density operator has non-finite entries");
    const double herm = hermiticity_error(op_);
    if (herm > tol.herm_tol) {
        throw InvalidState("density operator not Hermitian (error " + std::to_string(herm) + ")");
    }
    const double tr = op_.trace().real();
    if (std::abs(tr - 1.0) > tol.trace_tol) {
        throw InvalidState("density operator trace " + std::to_string(tr) + " differs from 1");
    }
    const double lmin = min_eigenvalue(op_);
    if (lmin < -tol.psd_tol) {
        throw InvalidState("density operator has negative eigenvalue " + std::to_string(lmin));
    }
}

Operator identity_op(int dim) {
    if (dim < 1) throw InvalidDimension("dim must be >= 1");
    return Operator::Identity(dim, dim);
}

Operator annihilation_op(int dim) {
    if (dim < 2) throw InvalidDimension("annihilation operator needs dim >= 2");
    Operator a = Operator::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

Operator creation_op(int dim) { return annihilation_op(dim).adjoint(); }

Operator number_op(int dim) {
    if (dim < 1) throw InvalidDimension("number operator needs dim >= 1");
    Operator n = Operator::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
    return n;
}

StateVector fock_state(int n, int dim) {
    if (dim < 1) throw InvalidDimension("dim must be >= 1");
    if (n < 0 || n >= dim) {
        throw TruncationTooSmall("Fock level " + std::to_string(n) + " needs dim >= " +
                                     std::to_string(n + 1),
                                 n + 1);
    }
    Vector v = Vector::Zero(dim);
    v(n) = 1.0;
    return StateVector(std::move(v));
}

namespace {

// Unnormalized Poisson weights e^{-x} x^n / n! for n < dim, via recurrence.
double poisson_partial_sum(double x, int dim) {
    double term = std::exp(-x);
    double sum = term;
    for (int n = 1; n < dim; ++n) {
        term *= x / n;
        sum += term;
    }
    return sum;
}

Vector raw_coherent_amplitudes(cplx alpha, int dim) {
    Vector v(dim);
    v(0) = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n < dim; ++n) v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    return v;
}

}  // namespace

double coherent_tail_mass(cplx alpha, int dim) {
    if (dim < 1) throw InvalidDimension("dim must be >= 1");
    return std::max(0.0, 1.0 - poisson_partial_sum(std::norm(alpha), dim));
}

int required_coherent_dim(cplx alpha, double tail_tol) {
    int dim = 1;
    while (coherent_tail_mass(alpha, dim) > tail_tol) {
        ++dim;
        if (dim > 100000) throw InvalidArgument("coherent amplitude too large");
    }
    return dim;
}

StateVector coherent_state(cplx alpha, int dim, double tail_tol) {
    if (dim < 1) throw InvalidDimension("dim must be >= 1");
    const double tail = coherent_tail_mass(alpha, dim);
    if (tail > tail_tol) {
        const int need = required_coherent_dim(alpha, tail_tol);
        throw TruncationTooSmall("coherent state tail mass " + std::to_string(tail) +
                                     " exceeds tolerance; dim >= " + std::to_string(need) +
                                     " required",
                                 need);
    }
    Vector v = raw_coherent_amplitudes(alpha, dim);
    v /= v.norm();
    return StateVector(std::move(v), tail_tol, tail);
}

CatPair cat_basis(cplx alpha, int dim, double tail_tol) {
    if (alpha == cplx(0.0, 0.0)) {
        throw DegenerateInput("cat basis is degenerate at alpha = 0 (odd cat vanishes)");
    }
    const StateVector plus = coherent_state(alpha, dim, tail_tol);
    const StateVector minus = coherent_state(-alpha, dim, tail_tol);
    Vector even = plus.amplitudes() + minus.amplitudes();
    Vector odd = plus.amplitudes() - minus.amplitudes();
    const double ne = even.norm();
    const double no = odd.norm();
    if (no < 1e-300 || ne < 1e-300) throw DegenerateInput("cat vector vanishes");
    even /= ne;
    odd /= no;
    return {StateVector(std::move(even), tail_tol, plus.raw_tail_mass()),
            StateVector(std::move(odd), tail_tol, plus.raw_tail_mass())};
}

DensityOperator pure_density(const StateVector& psi) {
    const Vector& v = psi.amplitudes();
    Operator rho = v * v.adjoint();
    return DensityOperator(std::move(rho));
}

double trace_norm(const Operator& x) {
    if (x.size() == 0) return 0.0;
    if (x.rows() == x.cols() && hermiticity_error(x) <= 1e-14 * (1.0 + x.cwiseAbs().maxCoeff())) {
        Operator sym = 0.5 * (x + x.adjoint());
        Eigen::SelfAdjointEigenSolver<Operator> es(sym, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().sum();
    }
    Eigen::BDCSVD<Operator> svd(x);
    return svd.singularValues().sum();
}

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
    if (a.dim() != b.dim()) {
        throw ShapeMismatch("trace_distance: dims " + std::to_string(a.dim()) + " and " +
                            std::to_string(b.dim()));
    }
    return trace_norm(a.op() - b.op());
}

cplx expectation(const Operator& x, const Operator& rho) {
    if (x.rows() != rho.rows() || x.cols() != rho.cols()) {
        throw ShapeMismatch("expectation: operator and state dims differ");
    }
    // tr(X rho) = sum_ij X_ij rho_ji
    return (x.transpose().cwiseProduct(rho)).sum();
}

cplx expectation(const Operator& x, const DensityOperator& rho) { return expectation(x, rho.op()); }

DensityOperator random_density(int dim, int rank, std::uint64_t seed) {
    if (dim < 1) throw InvalidDimension("dim must be >= 1");
    if (rank < 1 || rank > dim) {
        throw InvalidArgument("rank " + std::to_string(rank) + " outside [1, " +
                              std::to_string(dim) + "]");
    }
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    Operator g(dim, rank);
    for (int j = 0; j < rank; ++j) {
        for (int i = 0; i < dim; ++i) g(i, j) = cplx(normal(gen), normal(gen));
    }
    Operator rho = g * g.adjoint();
    rho /= rho.trace().real();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityOperator(std::move(rho));
}

Vector vectorize(const Operator& x) {
    return Eigen::Map<const Vector>(x.data(), x.size());
}

Operator devectorize(const Vector& v, int dim) {
    if (v.size() != static_cast<Eigen::Index>(dim) * dim) {
        throw ShapeMismatch("devectorize: length " + std::to_string(v.size()) +
                            " is not dim^2 for dim " + std::to_string(dim));
    }
    return Eigen::Map<const Operator>(v.data(), dim, dim);
}

}  // namespace qstab
