#pragma once
// OpenMP-parallel hot loops. Every kernel here has a serial reference in
// qstab/reference.hpp that the tests compare against.

#include <cstddef>
#include <vector>

#include <Eigen/SparseCore>

#include "qstab/hilbert.hpp"
#include "qstab/lindblad.hpp"

namespace qstab::kernels {

using SparseOperator = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;

// Drops exact zeros.
SparseOperator to_sparse(const Operator& x);

// Dense vectorized generator, assembled as a sum of Kronecker products with
// block columns distributed over threads.
Operator assemble_liouvillian(const SystemModel& model, Picture picture);

// Same matrix in sparse form, built from the sparse factors directly.
SparseOperator sparse_liouvillian(const SystemModel& model, Picture picture);

// Applies L* or G through a non-Hermitian effective Hamiltonian
// H_eff = H - i/2 sum L^dag L stored sparse:
//   L*(rho) = -i (H_eff rho - rho H_eff^dag) + sum L rho L^dag
//   G(X)    =  i (H_eff^dag X - X H_eff)     + sum L^dag X L
// Holds scratch buffers: use one instance per thread.
class GeneratorKernel {
public:
    explicit GeneratorKernel(const SystemModel& model);

    int dim() const noexcept { return dim_; }

    void apply_schrodinger(const Operator& rho, Operator& out) const;
    void apply_heisenberg(const Operator& x, Operator& out) const;

    Operator schrodinger(const Operator& rho) const;
    Operator heisenberg(const Operator& x) const;

private:
    // out = a * b, parallel over the columns of b when the matrix is large.
    void left_multiply(const SparseOperator& a, const Operator& b, Operator& out) const;

    int dim_;
    SparseOperator heff_;
    SparseOperator heff_adj_;
    std::vector<SparseOperator> couplings_;
    std::vector<SparseOperator> couplings_adj_;
    mutable Operator scratch_a_;
    mutable Operator scratch_b_;
};

// Dimension from which per-column parallelism in GeneratorKernel kicks in.
inline constexpr int kParallelDim = 96;

// Calls f(i) for i in [0, n) across threads. f must be safe to run
// concurrently for distinct i.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 4)
    for (long long i = 0; i < count; ++i) f(static_cast<std::size_t>(i));
}

int max_threads();

}  // namespace qstab::kernels
