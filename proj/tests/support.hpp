#pragma once
// Helpers shared by the test binaries: random models and observables, and a
// brute-force distance oracle for two-dimensional invariant sets.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "qstab/hilbert.hpp"
#include "qstab/lindblad.hpp"

namespace qstab::testing {

inline Operator random_matrix(int rows, int cols, std::mt19937_64& gen) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Operator m(rows, cols);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = cplx(nd(gen), nd(gen));
    return m;
}

inline Operator random_hermitian(int dim, std::mt19937_64& gen) {
    const Operator g = random_matrix(dim, dim, gen);
    return 0.5 * (g + g.adjoint());
}

// Random Hamiltonian and 1-3 random couplings.
inline SystemModel random_model(int dim, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    const int count = 1 + static_cast<int>(gen() % 3);
    std::vector<Operator> ls;
    for (int k = 0; k < count; ++k) ls.push_back(0.5 * random_matrix(dim, dim, gen));
    return SystemModel(random_hermitian(dim, gen), std::move(ls), "random");
}

inline double max_abs(const Operator& x) { return x.size() ? x.cwiseAbs().maxCoeff() : 0.0; }

// min over the Bloch ball of ||rho - W tau(r) W^dag||_1, tau(r) = (1 + r.sigma)/2,
// by nested grid search: step 0.25 over the whole ball, then windows of
// +-5 steps around the incumbent with the step shrunk 5x each level, down
// to 4e-4. The objective is evaluated in an orthonormal basis of
// range(rho) + range(W), which leaves every singular value unchanged.
inline double bloch_grid_distance(const Operator& rho, const Operator& w) {
    const Eigen::Index d = rho.rows();
    Operator span(d, d + 2);
    span << rho, w;
    Eigen::ColPivHouseholderQR<Operator> qr(span);
    qr.setThreshold(1e-13);
    const Eigen::Index r = qr.rank();
    const Operator q = (qr.householderQ() * Operator::Identity(d, d)).leftCols(r);
    const Operator rr = q.adjoint() * rho * q;
    const Operator ww = q.adjoint() * w;

    auto f = [&](double x, double y, double z) {
        Operator tau(2, 2);
        tau << cplx(1 + z, 0), cplx(x, -y), cplx(x, y), cplx(1 - z, 0);
        tau *= 0.5;
        const Operator diff = rr - ww * tau * ww.adjoint();
        Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().sum();
    };
    double best = INFINITY, bx = 0, by = 0, bz = 0;
    double step = 0.25;
    int half = 4;
    double cx = 0, cy = 0, cz = 0;
    while (step > 3e-4) {
        for (int i = -half; i <= half; ++i)
            for (int j = -half; j <= half; ++j)
                for (int k = -half; k <= half; ++k) {
                    const double x = cx + i * step, y = cy + j * step, z = cz + k * step;
                    if (x * x + y * y + z * z > 1.0 + 1e-12) continue;
                    const double v = f(x, y, z);
                    if (v < best) best = v, bx = x, by = y, bz = z;
                }
        cx = bx, cy = by, cz = bz;
        step /= 5.0;
        half = 5;
    }
    return best;
}

}  // namespace qstab::testing
