#pragma once
// Truncated Fock-space operators, state vectors and density operators.
//
// All matrices are dense and expressed in the number basis |0>, ..., |dim-1>.

#include <complex>
#include <cstdint>
#include <utility>

#include <Eigen/Dense>

#include "qstab/config.hpp"

namespace qstab {

using cplx = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Throws InvalidDimension / InvalidArgument when `op` is not square with the
// given dimension or has non-finite entries.
void require_operator(const Operator& op, int dim, const char* what);

double hermiticity_error(const Operator& op);
double min_eigenvalue(const Operator& hermitian);

class StateVector {
public:
    // Validates that |amplitudes| is within tail_tol of 1.
    explicit StateVector(Vector amplitudes, double tail_tol = kDefaultTolerances.tail_tol,
                         double raw_tail_mass = 0.0);

    int dim() const noexcept { return static_cast<int>(amps_.size()); }
    const Vector& amplitudes() const noexcept { return amps_; }
    cplx operator[](int n) const { return amps_(n); }

    // Probability mass that was dropped by truncation before renormalizing.
    double raw_tail_mass() const noexcept { return raw_tail_mass_; }

private:
    Vector amps_;
    double raw_tail_mass_ = 0.0;
};

class DensityOperator {
public:
    // Checks Hermiticity, unit trace and positivity against `tol`.
    explicit DensityOperator(Operator op, const Tolerances& tol = kDefaultTolerances);

    int dim() const noexcept { return static_cast<int>(op_.rows()); }
    const Operator& op() const noexcept { return op_; }

private:
    Operator op_;
};

Operator identity_op(int dim);
Operator annihilation_op(int dim);
Operator creation_op(int dim);
Operator number_op(int dim);

StateVector fock_state(int n, int dim);

// Tail mass e^{-|alpha|^2} sum_{n>=dim} |alpha|^{2n}/n!.
double coherent_tail_mass(cplx alpha, int dim);
// Smallest truncation with tail mass <= tail_tol.
int required_coherent_dim(cplx alpha, double tail_tol);

StateVector coherent_state(cplx alpha, int dim, double tail_tol = kDefaultTolerances.tail_tol);

struct CatPair {
    StateVector even;
    StateVector odd;
};
// Normalized |alpha> + |-alpha> and |alpha> - |-alpha>.
CatPair cat_basis(cplx alpha, int dim, double tail_tol = kDefaultTolerances.tail_tol);

DensityOperator pure_density(const StateVector& psi);

double trace_norm(const Operator& x);
double trace_distance(const DensityOperator& a, const DensityOperator& b);
cplx expectation(const Operator& x, const DensityOperator& rho);
cplx expectation(const Operator& x, const Operator& rho);

// G G^dagger / tr(G G^dagger) for a dim x rank standard complex Gaussian G.
DensityOperator random_density(int dim, int rank, std::uint64_t seed);

// Column-stacking vectorization: vec(X)[i + j*dim] = X(i, j).
Vector vectorize(const Operator& x);
Operator devectorize(const Vector& v, int dim);

}  // namespace qstab
