#include "qstab/reference.hpp"

#include <Eigen/SVD>

namespace qstab::reference {

Operator liouvillian_by_columns(const SystemModel& model, Picture picture) {
    const int d = model.dim();
    const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
    Operator m(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        Operator unit = Operator::Zero(d, d);
        unit(c % d, c / d) = 1.0;
        const Operator img = picture == Picture::schrodinger ? schrodinger_generator(model, unit)
                                                             : heisenberg_generator(model, unit);
        m.col(c) = vectorize(img);
    }
    return m;
}

namespace {

Operator matmul(const Operator& a, const Operator& b) {
    const Eigen::Index d = a.rows();
    Operator c = Operator::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index k = 0; k < d; ++k) {
            const cplx aik = a(i, k);
            for (Eigen::Index j = 0; j < d; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

}  // namespace

Operator schrodinger_generator_loops(const SystemModel& model, const Operator& rho) {
    const Operator& h = model.hamiltonian();
    Operator out = cplx(0.0, -1.0) * (matmul(h, rho) - matmul(rho, h));
    for (const Operator& l : model.couplings()) {
        const Operator ld = l.adjoint();
        const Operator ldl = matmul(ld, l);
        out += matmul(matmul(l, rho), ld) - 0.5 * (matmul(ldl, rho) + matmul(rho, ldl));
    }
    return out;
}

double trace_norm_svd(const Operator& x) {
    Eigen::JacobiSVD<Operator> svd(x);
    return svd.singularValues().sum();
}

}  // namespace qstab::reference
