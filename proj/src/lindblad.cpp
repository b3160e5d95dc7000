#include "qstab/lindblad.hpp"

#include <string>

#include "qstab/error.hpp"
#include "qstab/kernels.hpp"

namespace qstab {

SystemModel::SystemModel(Operator hamiltonian, std::vector<Operator> couplings, std::string label,
                         int ladder_degree, const Tolerances& tol)
    : hamiltonian_(std::move(hamiltonian)),
      couplings_(std::move(couplings)),
      label_(std::move(label)),
      ladder_degree_(ladder_degree) {
    const int d = static_cast<int>(hamiltonian_.rows());
    if (d < 1) throw InvalidDimension("model dimension must be >= 1");
    require_operator(hamiltonian_, d, "hamiltonian");
    const double herm = hermiticity_error(hamiltonian_);
    if (herm > tol.herm_tol * std::max(1.0, hamiltonian_.cwiseAbs().maxCoeff())) {
        throw InvalidArgument("hamiltonian is not Hermitian (error " + std::to_string(herm) + ")");
    }
    for (std::size_t k = 0; k < couplings_.size(); ++k) {
        require_operator(couplings_[k], d, ("coupling " + std::to_string(k)).c_str());
    }
    if (ladder_degree_ < 0) throw InvalidArgument("ladder degree must be >= 0");
}

const char* to_string(Picture p) {
    return p == Picture::schrodinger ? "schrodinger" : "heisenberg";
}

Operator Superoperator::apply(const Operator& x) const {
    require_operator(x, dim, "superoperator argument");
    return devectorize(matrix * vectorize(x), dim);
}

Operator schrodinger_generator(const SystemModel& model, const Operator& rho) {
    require_operator(rho, model.dim(), "state");
    const Operator& h = model.hamiltonian();
    Operator out = cplx(0.0, -1.0) * (h * rho - rho * h);
    for (const Operator& l : model.couplings()) {
        const Operator ldl = l.adjoint() * l;
        out += l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
    }
    return out;
}

Operator schrodinger_generator(const SystemModel& model, const DensityOperator& rho) {
    return schrodinger_generator(model, rho.op());
}

Operator heisenberg_generator(const SystemModel& model, const Operator& x) {
    require_operator(x, model.dim(), "observable");
    const Operator& h = model.hamiltonian();
    Operator out = cplx(0.0, -1.0) * (x * h - h * x);
    for (const Operator& l : model.couplings()) {
        const Operator ld = l.adjoint();
        out += 0.5 * (ld * (x * l - l * x)) + 0.5 * ((ld * x - x * ld) * l);
    }
    return out;
}

Superoperator liouvillian_matrix(const SystemModel& model, Picture picture) {
    Superoperator s;
    s.dim = model.dim();
    s.picture = picture;
    s.matrix = kernels::assemble_liouvillian(model, picture);

    // Construction-time spot check on one random state.
    const Operator probe = random_density(s.dim, s.dim, 0x5eedULL).op();
    const Operator direct = picture == Picture::schrodinger ? schrodinger_generator(model, probe)
                                                            : heisenberg_generator(model, probe);
    const Operator via_matrix = s.apply(probe);
    const double scale = 1.0 + direct.cwiseAbs().maxCoeff();
    const double err = (direct - via_matrix).cwiseAbs().maxCoeff();
    if (err > 1e-12 * scale) {
        throw NumericalContractError("vectorized generator disagrees with direct formula by " +
                                     std::to_string(err));
    }
    return s;
}

Operator interior_block(const Operator& x, int margin) {
    const Eigen::Index n = x.rows() - margin;
    if (margin < 0 || n < 1) throw InvalidArgument("interior margin leaves no levels");
    return x.topLeftCorner(n, n);
}

}  // namespace qstab
