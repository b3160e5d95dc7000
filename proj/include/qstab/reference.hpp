#pragma once
// Serial reference implementations of the kernels in qstab/kernels.hpp.
// Slow and simple; used by the tests and the benchmark only.

#include <cstddef>

#include "qstab/hilbert.hpp"
#include "qstab/lindblad.hpp"

namespace qstab::reference {

// Column j of the matrix is vec(generator(E_j)) for the j-th column-stacked
// matrix unit E_j.
Operator liouvillian_by_columns(const SystemModel& model, Picture picture);

// Triple-loop evaluation of L*(rho), no BLAS, no sparsity.
Operator schrodinger_generator_loops(const SystemModel& model, const Operator& rho);

// Trace norm through a full Jacobi SVD.
double trace_norm_svd(const Operator& x);

template <class F>
void serial_for(std::size_t n, F&& f) {
    for (std::size_t i = 0; i < n; ++i) f(i);
}

}  // namespace qstab::reference
