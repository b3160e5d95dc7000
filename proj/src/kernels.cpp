#include "qstab/kernels.hpp"

#include <omp.h>

#include <algorithm>

#include "qstab/error.hpp"

namespace qstab::kernels {

namespace {

// One Kronecker term coef * (A kron B) of the vectorized generator.
struct KronTerm {
    Operator a;
    Operator b;
    cplx coef;
};

std::vector<KronTerm> kron_terms(const SystemModel& model, Picture picture) {
    const int d = model.dim();
    const Operator id = Operator::Identity(d, d);
    const Operator& h = model.hamiltonian();
    std::vector<KronTerm> terms;
    // vec(A X B) = (B^T kron A) vec(X)
    const cplx sign = picture == Picture::schrodinger ? cplx(0.0, -1.0) : cplx(0.0, 1.0);
    terms.push_back({id, h, sign});
    terms.push_back({h.transpose(), id, -sign});
    for (const Operator& l : model.couplings()) {
        const Operator ldl = l.adjoint() * l;
        if (picture == Picture::schrodinger) {
            terms.push_back({l.conjugate(), l, 1.0});
        } else {
            terms.push_back({l.transpose(), l.adjoint(), 1.0});
        }
        terms.push_back({id, ldl, -0.5});
        terms.push_back({ldl.transpose(), id, -0.5});
    }
    return terms;
}

}  // namespace

SparseOperator to_sparse(const Operator& x) {
    SparseOperator s = x.sparseView(cplx(0.0, 0.0), 0.0);
    s.makeCompressed();
    return s;
}

Operator assemble_liouvillian(const SystemModel& model, Picture picture) {
    const int d = model.dim();
    const std::vector<KronTerm> terms = kron_terms(model, picture);
    Operator m = Operator::Zero(static_cast<Eigen::Index>(d) * d, static_cast<Eigen::Index>(d) * d);

    // Block column j of (A kron B) is A(:, j) kron B; block columns are disjoint.
#pragma omp parallel for schedule(static)
    for (int j = 0; j < d; ++j) {
        for (const KronTerm& t : terms) {
            for (int i = 0; i < d; ++i) {
                const cplx f = t.coef * t.a(i, j);
                if (f == cplx(0.0, 0.0)) continue;
                m.block(static_cast<Eigen::Index>(i) * d, static_cast<Eigen::Index>(j) * d, d, d) +=
                    f * t.b;
            }
        }
    }
    return m;
}

SparseOperator sparse_liouvillian(const SystemModel& model, Picture picture) {
    const int d = model.dim();
    const std::vector<KronTerm> terms = kron_terms(model, picture);
    std::vector<Eigen::Triplet<cplx>> triplets;
    for (const KronTerm& t : terms) {
        const SparseOperator a = to_sparse(t.a);
        const SparseOperator b = to_sparse(t.b);
        for (int ja = 0; ja < a.outerSize(); ++ja) {
            for (SparseOperator::InnerIterator ia(a, ja); ia; ++ia) {
                for (int jb = 0; jb < b.outerSize(); ++jb) {
                    for (SparseOperator::InnerIterator ib(b, jb); ib; ++ib) {
                        triplets.emplace_back(static_cast<int>(ia.row()) * d + static_cast<int>(ib.row()),
                                              ja * d + jb, t.coef * ia.value() * ib.value());
                    }
                }
            }
        }
    }
    SparseOperator m(d * d, d * d);
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.prune(cplx(0.0, 0.0), 0.0);
    m.makeCompressed();
    return m;
}

GeneratorKernel::GeneratorKernel(const SystemModel& model) : dim_(model.dim()) {
    Operator heff = model.hamiltonian();
    for (const Operator& l : model.couplings()) {
        heff -= cplx(0.0, 0.5) * (l.adjoint() * l);
        couplings_.push_back(to_sparse(l));
        couplings_adj_.push_back(to_sparse(l.adjoint()));
    }
    heff_ = to_sparse(heff);
    heff_adj_ = to_sparse(heff.adjoint());
    scratch_a_.resize(dim_, dim_);
    scratch_b_.resize(dim_, dim_);
}

namespace {

// out(:, j) = A b(:, j) for j in [j0, j1), A in compressed column storage.
// Complex products are spelled out in real arithmetic.
void csc_times_dense(const SparseOperator& a, const Operator& b, Operator& out, Eigen::Index j0, Eigen::Index j1) {
    const Eigen::Index n = a.outerSize();
    const auto* outer = a.outerIndexPtr();
    const auto* inner = a.innerIndexPtr();
    const cplx* val = a.valuePtr();
    for (Eigen::Index j = j0; j < j1; ++j) {
        double* o = reinterpret_cast<double*>(out.col(j).data());
        const cplx* bc = b.col(j).data();
        std::fill(o, o + 2 * out.rows(), 0.0);
        for (Eigen::Index k = 0; k < n; ++k) {
            const double br = bc[k].real();
            const double bi = bc[k].imag();
            if (br == 0.0 && bi == 0.0) continue;
            for (auto p = outer[k]; p < outer[k + 1]; ++p) {
                const double ar = val[p].real();
                const double ai = val[p].imag();
                double* t = o + 2 * inner[p];
                t[0] += ar * br - ai * bi;
                t[1] += ar * bi + ai * br;
            }
        }
    }
}

}  // namespace

void GeneratorKernel::left_multiply(const SparseOperator& a, const Operator& b, Operator& out) const {
    out.resize(dim_, dim_);
    if (dim_ < kParallelDim) {
        csc_times_dense(a, b, out, 0, dim_);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int j = 0; j < dim_; ++j) csc_times_dense(a, b, out, j, j + 1);
}

void GeneratorKernel::apply_schrodinger(const Operator& rho, Operator& out) const {
    require_operator(rho, dim_, "state");
    out.resize(dim_, dim_);
    const Operator rho_adj = rho.adjoint();
    // -i H_eff rho
    left_multiply(heff_, rho, scratch_a_);
    out = cplx(0.0, -1.0) * scratch_a_;
    // + i rho H_eff^dag = + i (H_eff rho^dag)^dag
    left_multiply(heff_, rho_adj, scratch_a_);
    out += cplx(0.0, 1.0) * scratch_a_.adjoint();
    for (std::size_t k = 0; k < couplings_.size(); ++k) {
        // L rho L^dag = L (L rho^dag)^dag
        left_multiply(couplings_[k], rho_adj, scratch_a_);
        scratch_b_ = scratch_a_.adjoint();
        left_multiply(couplings_[k], scratch_b_, scratch_a_);
        out += scratch_a_;
    }
}

void GeneratorKernel::apply_heisenberg(const Operator& x, Operator& out) const {
    require_operator(x, dim_, "observable");
    out.resize(dim_, dim_);
    const Operator x_adj = x.adjoint();
    // i H_eff^dag X
    left_multiply(heff_adj_, x, scratch_a_);
    out = cplx(0.0, 1.0) * scratch_a_;
    // - i X H_eff = - i (H_eff^dag X^dag)^dag
    left_multiply(heff_adj_, x_adj, scratch_a_);
    out += cplx(0.0, -1.0) * scratch_a_.adjoint();
    for (std::size_t k = 0; k < couplings_.size(); ++k) {
        // L^dag X L = L^dag (L^dag X^dag)^dag
        left_multiply(couplings_adj_[k], x_adj, scratch_a_);
        scratch_b_ = scratch_a_.adjoint();
        left_multiply(couplings_adj_[k], scratch_b_, scratch_a_);
        out += scratch_a_;
    }
}

Operator GeneratorKernel::schrodinger(const Operator& rho) const {
    Operator out;
    apply_schrodinger(rho, out);
    return out;
}

Operator GeneratorKernel::heisenberg(const Operator& x) const {
    Operator out;
    apply_heisenberg(x, out);
    return out;
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace qstab::kernels
