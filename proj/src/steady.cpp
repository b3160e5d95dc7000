#include "qstab/steady.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include <Eigen/SVD>

#include "qstab/error.hpp"

namespace qstab {

namespace {

// Orthonormal basis of the Hermitian d x d matrices (Hilbert-Schmidt inner
// product): E_jj, (E_jk + E_kj)/sqrt2 and i(E_kj - E_jk)/sqrt2 for j < k.
// Element c has one or two nonzero entries in column-stacked position.
struct HermitianBasis {
    struct Entry {
        Eigen::Index index = 0;
        cplx value{};
    };
    std::vector<std::array<Entry, 2>> entries;
    std::vector<int> counts;

    explicit HermitianBasis(int d) {
        const double r = std::sqrt(0.5);
        for (Eigen::Index j = 0; j < d; ++j) {
            entries.push_back({{{j + j * d, 1.0}, {}}});
            counts.push_back(1);
        }
        for (Eigen::Index j = 0; j < d; ++j) {
            for (Eigen::Index k = j + 1; k < d; ++k) {
                entries.push_back({{{j + k * d, r}, {k + j * d, r}}});
                counts.push_back(2);
                entries.push_back({{{j + k * d, cplx(0.0, -r)}, {k + j * d, cplx(0.0, r)}}});
                counts.push_back(2);
            }
        }
    }

    Eigen::Index size() const { return static_cast<Eigen::Index>(entries.size()); }

    Operator element(const Eigen::VectorXd& coords, int d) const {
        Vector v = Vector::Zero(static_cast<Eigen::Index>(d) * d);
        for (Eigen::Index c = 0; c < size(); ++c) {
            for (int t = 0; t < counts[c]; ++t) v(entries[c][t].index) += coords(c) * entries[c][t].value;
        }
        return devectorize(v, d);
    }
};

// The generator maps Hermitian matrices to Hermitian matrices, so in a
// Hermitian basis it is a real matrix R with M = R (x) C: same singular
// values, and the kernel of M is the complexification of the kernel of R.
Eigen::MatrixXd real_form(const Operator& m, const HermitianBasis& basis) {
    const Eigen::Index n = basis.size();
    Operator mb = Operator::Zero(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        for (int t = 0; t < basis.counts[c]; ++t) mb.col(c) += basis.entries[c][t].value * m.col(basis.entries[c][t].index);
    }
    Eigen::MatrixXd r(n, n);
    for (Eigen::Index row = 0; row < n; ++row) {
        Eigen::RowVectorXcd acc = Eigen::RowVectorXcd::Zero(n);
        for (int t = 0; t < basis.counts[row]; ++t) {
            acc += std::conj(basis.entries[row][t].value) * mb.row(basis.entries[row][t].index);
        }
        r.row(row) = acc.real();
    }
    return r;
}

struct SvdBlock {
    std::vector<Eigen::Index> cols;  // columns of the full matrix, in block order
    Eigen::VectorXd sv;              // decreasing
    Eigen::MatrixXd v;               // right singular vectors, one column per entry of `cols`
};

struct BlockSvd {
    std::vector<SvdBlock> blocks;
    double largest() const {
        double m = 0.0;
        for (const auto& b : blocks) {
            if (b.sv.size()) m = std::max(m, b.sv(0));
        }
        return m;
    }
};

// SVD of a matrix that may decouple into independent blocks. Rows and
// columns are grouped by connected components of the nonzero pattern; the
// singular values of the matrix are the union of those of the blocks.
BlockSvd block_svd(const Eigen::MatrixXd& m) {
    const Eigen::Index rows = m.rows();
    const Eigen::Index cols = m.cols();
    std::vector<Eigen::Index> parent(static_cast<std::size_t>(rows + cols));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](Eigen::Index x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            if (m(r, c) != 0.0) {
                const Eigen::Index a = find(r), b = find(rows + c);
                if (a != b) parent[a] = b;
            }
        }
    }
    std::map<Eigen::Index, std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>>> groups;
    for (Eigen::Index r = 0; r < rows; ++r) groups[find(r)].first.push_back(r);
    for (Eigen::Index c = 0; c < cols; ++c) groups[find(rows + c)].second.push_back(c);

    BlockSvd out;
    for (auto& [root, rc] : groups) {
        auto& [rs, cs] = rc;
        if (cs.empty()) continue;
        SvdBlock blk;
        blk.cols = cs;
        const Eigen::Index nc = static_cast<Eigen::Index>(cs.size());
        if (rs.empty()) {
            blk.sv.resize(0);
            blk.v = Eigen::MatrixXd::Identity(nc, nc);
        } else {
            Eigen::MatrixXd sub(static_cast<Eigen::Index>(rs.size()), nc);
            for (std::size_t j = 0; j < cs.size(); ++j) {
                for (std::size_t i = 0; i < rs.size(); ++i) {
                    sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rs[i], cs[j]);
                }
            }
            Eigen::BDCSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeFullV);
            blk.sv = svd.singularValues();
            blk.v = svd.matrixV();
        }
        out.blocks.push_back(std::move(blk));
    }
    return out;
}

}  // namespace

FixedPointBasis fixed_point_basis(const SystemModel& model, double relative_threshold, std::size_t cap) {
    const int d = model.dim();
    const std::size_t n = static_cast<std::size_t>(d) * static_cast<std::size_t>(d);
    if (n > cap) {
        throw CapacityError("dim^2 = " + std::to_string(n) + " exceeds kernel cap " + std::to_string(cap));
    }
    const HermitianBasis herm(d);
    const BlockSvd svd = block_svd(real_form(liouvillian_matrix(model, Picture::schrodinger).matrix, herm));

    FixedPointBasis out;
    out.dim = d;
    out.relative_threshold = relative_threshold;
    out.largest_singular_value = svd.largest();
    out.svd_threshold = relative_threshold * out.largest_singular_value;
    out.gap_estimate = 0.0;

    for (const auto& b : svd.blocks) {
        for (Eigen::Index i = 0; i < b.v.cols(); ++i) {
            const double s = i < b.sv.size() ? b.sv(i) : 0.0;
            if (s > out.svd_threshold) {
                if (out.gap_estimate == 0.0 || s < out.gap_estimate) out.gap_estimate = s;
                continue;
            }
            Eigen::VectorXd coords = Eigen::VectorXd::Zero(herm.size());
            for (std::size_t r = 0; r < b.cols.size(); ++r) coords(b.cols[r]) = b.v(static_cast<Eigen::Index>(r), i);
            Operator el = herm.element(coords, d);
            el = 0.5 * (el + el.adjoint()).eval();
            el /= el.norm();
            out.basis.push_back(std::move(el));
        }
    }
    if (out.basis.empty()) {
        throw NumericalContractError("generator has an empty kernel; a trace-preserving generator "
                                     "always has a fixed point");
    }
    return out;
}

namespace {

// Right singular vectors of `a` with singular value <= tol (a is r x c).
Operator null_space(const Operator& a, double tol) {
    const Eigen::Index c = a.cols();
    if (a.rows() == 0) return Operator::Identity(c, c);
    Eigen::BDCSVD<Operator> svd(a, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < c; ++i) {
        const double s = i < sv.size() ? sv(i) : 0.0;
        if (s <= tol) keep.push_back(i);
    }
    Operator out(c, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = svd.matrixV().col(keep[j]);
    return out;
}

}  // namespace

std::optional<Operator> dark_subspace(const SystemModel& model, double tol) {
    const int d = model.dim();
    const auto& couplings = model.couplings();
    Operator stacked(static_cast<Eigen::Index>(couplings.size()) * d, d);
    for (std::size_t k = 0; k < couplings.size(); ++k) {
        stacked.middleRows(static_cast<Eigen::Index>(k) * d, d) = couplings[k];
    }
    Operator q = null_space(stacked, tol);

    // Shrink to the largest subspace Q with (1 - QQ^dag) H Q = 0.
    const Operator& h = model.hamiltonian();
    while (q.cols() > 0) {
        const Operator hq = h * q;
        const Operator leak = hq - q * (q.adjoint() * hq);
        Eigen::BDCSVD<Operator> svd(leak);
        if (svd.singularValues().size() == 0 || svd.singularValues()(0) <= tol) break;
        const Operator coeffs = null_space(leak, tol);
        if (coeffs.cols() == q.cols()) break;
        q = q * coeffs;
    }
    if (q.cols() == 0) return std::nullopt;
    return q;
}

const Operator& InvariantSet::isometry() const {
    if (!dark_isometry) {
        throw UnsupportedStructure("invariant set has no dark-subspace structure");
    }
    return *dark_isometry;
}

Operator InvariantSet::projector() const {
    const Operator& w = isometry();
    return w * w.adjoint();
}

DensityOperator InvariantSet::embed(const Operator& tau) const {
    const Operator& w = isometry();
    if (tau.rows() != w.cols() || tau.cols() != w.cols()) {
        throw ShapeMismatch("tau must be k x k with k = " + std::to_string(w.cols()));
    }
    Operator rho = w * tau * w.adjoint();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityOperator(std::move(rho));
}

InvariantSet invariant_set(const SystemModel& model, const InvariantSetConfig& cfg) {
    InvariantSet set;
    set.fixed_points = fixed_point_basis(model, cfg.svd_relative_threshold, cfg.cap);
    std::optional<Operator> w = dark_subspace(model, cfg.dark_tol);
    if (!w) return set;
    const int k = static_cast<int>(w->cols());
    set.candidate_k = k;
    if (set.fixed_points.dimension() != k * k) return set;

    // H restricted to the subspace must act as a scalar, otherwise only the
    // states commuting with it are fixed.
    const Operator hw = w->adjoint() * model.hamiltonian() * (*w);
    const cplx mean = hw.trace() / static_cast<double>(k);
    const Operator spread = hw - mean * Operator::Identity(k, k);
    if (spread.cwiseAbs().maxCoeff() > cfg.dark_tol * std::max(1.0, hw.cwiseAbs().maxCoeff())) {
        return set;
    }
    // Every matrix unit on the subspace must be annihilated by L*.
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            const Operator unit = w->col(i) * w->col(j).adjoint();
            if (trace_norm(schrodinger_generator(model, unit)) > cfg.dark_tol) return set;
        }
    }
    set.dark_isometry = std::move(w);
    set.k = k;
    return set;
}

InvarianceCheck is_invariant(const SystemModel& model, const DensityOperator& rho, double tol) {
    InvarianceCheck out;
    out.residual = trace_norm(schrodinger_generator(model, rho));
    out.invariant = out.residual <= tol;
    return out;
}

bool in_dark_set(const InvariantSet& set, const Operator& rho, double tol) {
    const Operator& w = set.isometry();
    const double inside = (w.adjoint() * rho * w).trace().real();
    return rho.trace().real() - inside <= tol;
}

namespace {

// Projects a Hermitian k x k matrix onto the density matrices (eigenvalues
// onto the probability simplex).
Operator project_to_states(const Operator& x) {
    Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (x + x.adjoint()));
    Eigen::VectorXd lam = es.eigenvalues();
    std::vector<double> sorted(lam.data(), lam.data() + lam.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cum = 0.0;
    double shift = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        cum += sorted[i];
        const double candidate = (cum - 1.0) / static_cast<double>(i + 1);
        if (sorted[i] - candidate > 0.0) shift = candidate;
    }
    for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = std::max(lam(i) - shift, 0.0);
    Operator tau = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
    return 0.5 * (tau + tau.adjoint());
}

// Objective pieces for ||rho - W tau W^dag||_1 in a reduced basis.
class DistanceProblem {
public:
    DistanceProblem(const Operator& rho, const Operator& w) {
        const Eigen::Index d = rho.rows();
        const Eigen::Index k = w.cols();
        // Restrict to range(rho) + range(W) when that is smaller than d.
        Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (rho + rho.adjoint()));
        const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
        std::vector<Eigen::Index> support;
        for (Eigen::Index i = 0; i < d; ++i) {
            if (std::abs(es.eigenvalues()(i)) > 1e-14 * scale) support.push_back(i);
        }
        const Eigen::Index r = static_cast<Eigen::Index>(support.size());
        if (r + k < d) {
            Operator span(d, r + k);
            for (Eigen::Index i = 0; i < r; ++i) span.col(i) = es.eigenvectors().col(support[i]);
            span.rightCols(k) = w;
            Eigen::BDCSVD<Operator> svd(span, Eigen::ComputeThinU);
            Eigen::Index rank = 0;
            const double top = svd.singularValues()(0);
            while (rank < svd.singularValues().size() && svd.singularValues()(rank) > 1e-12 * top) ++rank;
            const Operator q = svd.matrixU().leftCols(rank);
            rho_ = q.adjoint() * rho * q;
            w_ = q.adjoint() * w;
        } else {
            rho_ = rho;
            w_ = w;
        }
        rho_ = 0.5 * (rho_ + rho_.adjoint()).eval();
    }

    Eigen::Index k() const { return w_.cols(); }

    double exact(const Operator& tau) const {
        Eigen::SelfAdjointEigenSolver<Operator> es(difference(tau), Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().sum();
    }

    // Smoothed value sum(sqrt(l^2 + mu^2) - mu) and its gradient in tau.
    double smoothed(const Operator& tau, double mu, Operator* grad) const {
        Eigen::SelfAdjointEigenSolver<Operator> es(difference(tau));
        const Eigen::VectorXd& lam = es.eigenvalues();
        double value = 0.0;
        Eigen::VectorXd slope(lam.size());
        for (Eigen::Index i = 0; i < lam.size(); ++i) {
            const double root = std::sqrt(lam(i) * lam(i) + mu * mu);
            value += root - mu;
            slope(i) = lam(i) / root;
        }
        if (grad) {
            const Operator uw = es.eigenvectors().adjoint() * w_;
            *grad = -(uw.adjoint() * slope.asDiagonal() * uw);
            *grad = 0.5 * (*grad + grad->adjoint()).eval();
        }
        return value;
    }

private:
    Operator difference(const Operator& tau) const {
        Operator diff = rho_ - w_ * tau * w_.adjoint();
        return 0.5 * (diff + diff.adjoint());
    }

    Operator rho_;
    Operator w_;
};

// Projected gradient with backtracking on the smoothed objective, with the
// smoothing parameter driven to zero.
Operator projected_descent(const DistanceProblem& prob, Operator tau, int max_iterations, double tol) {
    double step = 1.0;
    for (double mu = 1e-2; mu >= 1e-8; mu *= 1e-2) {
        Operator grad;
        double value = prob.smoothed(tau, mu, &grad);
        for (int it = 0; it < max_iterations; ++it) {
            bool accepted = false;
            Operator next;
            double next_value = 0.0;
            for (int bt = 0; bt < 60; ++bt) {
                next = project_to_states(tau - step * grad);
                const Operator delta = next - tau;
                next_value = prob.smoothed(next, mu, nullptr);
                const double model_value =
                    value + (grad.adjoint() * delta).trace().real() + delta.squaredNorm() / (2.0 * step);
                if (next_value <= model_value + 1e-15) {
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) break;
            const double moved = (next - tau).norm();
            const double decrease = value - next_value;
            tau = next;
            value = prob.smoothed(tau, mu, &grad);
            step *= 2.0;
            if (moved < 1e-12 || decrease < tol) break;
        }
    }
    return tau;
}

Operator tau_from_params(const Eigen::VectorXd& x, Eigen::Index k) {
    Operator t(k, k);
    for (Eigen::Index i = 0; i < k * k; ++i) t(i % k, i / k) = cplx(x(2 * i), x(2 * i + 1));
    Operator tau = t * t.adjoint();
    const double tr = tau.trace().real();
    if (!(tr > 0.0)) return Operator::Identity(k, k) / static_cast<double>(k);
    tau /= tr;
    return 0.5 * (tau + tau.adjoint());
}

Eigen::VectorXd params_from_tau(const Operator& tau) {
    const Eigen::Index k = tau.rows();
    Eigen::SelfAdjointEigenSolver<Operator> es(tau);
    Eigen::VectorXd sq = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Operator t = es.eigenvectors() * sq.asDiagonal() * es.eigenvectors().adjoint();
    Eigen::VectorXd x(2 * k * k);
    for (Eigen::Index i = 0; i < k * k; ++i) {
        x(2 * i) = t(i % k, i / k).real();
        x(2 * i + 1) = t(i % k, i / k).imag();
    }
    return x;
}

// Derivative-free Nelder-Mead on the factor parameterization tau = T T^dag / tr.
Operator nelder_mead_polish(const DistanceProblem& prob, const Operator& start, int max_iterations, double tol) {
    const Eigen::Index k = prob.k();
    auto f = [&](const Eigen::VectorXd& x) { return prob.exact(tau_from_params(x, k)); };
    Eigen::VectorXd best = params_from_tau(start);
    double best_value = f(best);
    const Eigen::Index n = best.size();

    for (int restart = 0; restart < 2; ++restart) {
        std::vector<Eigen::VectorXd> simplex(n + 1, best);
        std::vector<double> values(n + 1, best_value);
        const double size = restart == 0 ? 1e-2 : 1e-3;
        for (Eigen::Index i = 0; i < n; ++i) {
            simplex[i + 1](i) += size;
            values[i + 1] = f(simplex[i + 1]);
        }
        std::vector<std::size_t> order(n + 1);
        for (int it = 0; it < max_iterations * static_cast<int>(n); ++it) {
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
            const std::size_t lo = order.front();
            const std::size_t hi = order.back();
            const std::size_t second = order[n - 1];
            if (values[hi] - values[lo] < tol) break;
            Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
            for (std::size_t i = 0; i <= static_cast<std::size_t>(n); ++i)
                if (i != hi) centroid += simplex[i];
            centroid /= static_cast<double>(n);
            const Eigen::VectorXd reflected = centroid + (centroid - simplex[hi]);
            const double fr = f(reflected);
            if (fr < values[lo]) {
                const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[hi]);
                const double fe = f(expanded);
                if (fe < fr) {
                    simplex[hi] = expanded;
                    values[hi] = fe;
                } else {
                    simplex[hi] = reflected;
                    values[hi] = fr;
                }
            } else if (fr < values[second]) {
                simplex[hi] = reflected;
                values[hi] = fr;
            } else {
                const Eigen::VectorXd contracted = centroid + 0.5 * (simplex[hi] - centroid);
                const double fc = f(contracted);
                if (fc < values[hi]) {
                    simplex[hi] = contracted;
                    values[hi] = fc;
                } else {
                    for (std::size_t i = 0; i <= static_cast<std::size_t>(n); ++i) {
                        if (i == lo) continue;
                        simplex[i] = simplex[lo] + 0.5 * (simplex[i] - simplex[lo]);
                        values[i] = f(simplex[i]);
                    }
                }
            }
        }
        const auto it = std::min_element(values.begin(), values.end());
        const double improvement = best_value - *it;
        if (*it < best_value) {
            best_value = *it;
            best = simplex[static_cast<std::size_t>(it - values.begin())];
        }
        if (improvement < tol) break;
    }
    return tau_from_params(best, k);
}

}  // namespace

DistanceResult distance_to_set_detail(const Operator& rho, const InvariantSet& set, const DistanceConfig& cfg) {
    const Operator& w = set.isometry();
    if (rho.rows() != w.rows() || rho.cols() != w.rows()) {
        throw ShapeMismatch("state and invariant set dims differ");
    }
    const Eigen::Index k = w.cols();
    if (k == 1) {
        DistanceResult r;
        r.tau = Operator::Ones(1, 1);
        r.distance = trace_norm(rho - w * w.adjoint());
        return r;
    }

    const DistanceProblem prob(rho, w);
    std::vector<Operator> starts;
    {
        Operator compressed = w.adjoint() * rho * w;
        const double tr = compressed.trace().real();
        starts.push_back(tr > 1e-12 ? project_to_states(compressed / tr)
                                    : Operator(Operator::Identity(k, k) / static_cast<double>(k)));
    }
    starts.push_back(Operator::Identity(k, k) / static_cast<double>(k));
    std::mt19937_64 gen(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    while (static_cast<int>(starts.size()) < std::max(1, cfg.starts)) {
        Operator g(k, k);
        for (Eigen::Index i = 0; i < k * k; ++i) g(i % k, i / k) = cplx(normal(gen), normal(gen));
        Operator tau = g * g.adjoint();
        starts.push_back(tau / tau.trace().real());
    }
    starts.resize(static_cast<std::size_t>(std::max(1, cfg.starts)));

    DistanceResult best;
    best.distance = std::numeric_limits<double>::infinity();
    // The objective is convex: every start descends towards the same
    // minimum, and only the best end point is polished.
    const double tol = 1e-3 * cfg.opt_tol;
    for (const Operator& start : starts) {
        const Operator tau = projected_descent(prob, start, cfg.max_iterations, tol);
        const double value = prob.exact(tau);
        if (value < best.distance) {
            best.distance = value;
            best.tau = tau;
        }
    }
    const Operator polished = nelder_mead_polish(prob, best.tau, cfg.max_iterations, tol);
    if (const double value = prob.exact(polished); value < best.distance) {
        best.distance = value;
        best.tau = polished;
    }
    return best;
}

double distance_to_set(const DensityOperator& rho, const InvariantSet& set, const DistanceConfig& cfg) {
    return distance_to_set_detail(rho.op(), set, cfg).distance;
}

}  // namespace qstab
