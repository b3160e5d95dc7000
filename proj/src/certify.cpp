#include "qstab/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>

#include <Eigen/QR>

#include "qstab/error.hpp"
#include "qstab/kernels.hpp"

namespace qstab {

namespace {

constexpr double kEigTol = 1e-10;
constexpr double kBlockTol = 1e-8;
constexpr double kAngleTol = 1e-6;
constexpr std::size_t kMaxStoredFalsifiers = 20;

int resolve_margin(const SystemModel& model, int requested) {
    return requested >= 0 ? requested : model.truncation_margin();
}

double max_eigenvalue(const Operator& x) {
    Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (x + x.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

double real_trace_product(const Operator& a, const Operator& rho) { return expectation(a, rho).real(); }

void push_falsifier(std::vector<Falsifier>& list, std::size_t& count, Falsifier f) {
    ++count;
    if (list.size() < kMaxStoredFalsifiers) list.push_back(std::move(f));
}

// Orthonormal basis of the orthogonal complement of range(W).
Operator complement_basis(const Operator& w) {
    const Eigen::Index d = w.rows();
    const Eigen::Index k = w.cols();
    Eigen::HouseholderQR<Operator> qr(w);
    const Operator q = qr.householderQ() * Operator::Identity(d, d);
    return q.rightCols(d - k);
}

std::uint64_t mix_seed(std::uint64_t seed, std::size_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct SampleStats {
    bool in_set = false;
    double tr_v = 0.0;
    double tr_g = 0.0;
};

}  // namespace

LyapunovCandidate::LyapunovCandidate(Operator v, std::string provenance, const Tolerances& tol)
    : v_(std::move(v)), provenance_(std::move(provenance)) {
    if (v_.rows() < 1 || v_.rows() != v_.cols()) throw InvalidDimension("Lyapunov operator must be square");
    if (!v_.allFinite()) throw InvalidArgument("Lyapunov operator has non-finite entries");
    const double herm = hermiticity_error(v_);
    if (herm > tol.herm_tol * std::max(1.0, v_.cwiseAbs().maxCoeff())) {
        throw InvalidArgument("Lyapunov operator is not Hermitian (error " + std::to_string(herm) + ")");
    }
    v_ = 0.5 * (v_ + v_.adjoint()).eval();
}

Operator sample_state(const InvariantSet& set, int dim, int interior_dim, std::uint64_t seed, std::size_t index) {
    const std::uint64_t s = mix_seed(seed, index);
    std::mt19937_64 gen(s);
    const int n = interior_dim;
    const int ranks[] = {1, 2, 3, std::max(1, n / 2), n};
    const int rank = std::min(n, ranks[(index / 3) % 5]);
    Operator rho = Operator::Zero(dim, dim);
    rho.topLeftCorner(n, n) = random_density(n, rank, gen()).op();
    if (index % 3 == 2 && set.has_dark_structure()) {
        const Operator& w = set.isometry();
        const int k = static_cast<int>(w.cols());
        const Operator tau = random_density(k, k, gen()).op();
        std::uniform_real_distribution<double> u(-3.0, 0.0);
        const double eps = std::pow(10.0, u(gen));
        rho = (1.0 - eps) * (w * tau * w.adjoint()) + eps * rho;
        rho = 0.5 * (rho + rho.adjoint()).eval();
        rho /= rho.trace().real();
    }
    return rho;
}

FloorResult floor_check(const LyapunovCandidate& v, const InvariantSet& set, const SamplerConfig& cfg) {
    const Operator& w = set.isometry();
    const Operator& vop = v.op();
    if (vop.rows() != w.rows()) throw ShapeMismatch("Lyapunov operator and invariant set dims differ");
    const Eigen::Index d = w.rows();
    const Eigen::Index k = w.cols();

    FloorResult r;
    const Operator block = w.adjoint() * vop * w;
    r.v_star = max_eigenvalue(block);
    r.block_error = (block - r.v_star * Operator::Identity(k, k)).cwiseAbs().maxCoeff();
    const Operator vw = vop * w;
    r.cross_norm = (vw - w * (w.adjoint() * vw)).norm();
    if (k < d) {
        const Operator comp = complement_basis(w);
        Eigen::SelfAdjointEigenSolver<Operator> es(comp.adjoint() * vop * comp, Eigen::EigenvaluesOnly);
        r.margin = es.eigenvalues().minCoeff() - r.v_star;
    } else {
        r.margin = std::numeric_limits<double>::infinity();
    }
    r.ok = r.block_error <= kBlockTol && r.cross_norm <= kBlockTol && r.margin > kEigTol;

    const int interior = static_cast<int>(d);
    std::mutex m;
    kernels::parallel_for(cfg.samples, [&](std::size_t i) {
        const Operator rho = sample_state(set, static_cast<int>(d), interior, cfg.seed, i);
        if (in_dark_set(set, rho)) return;
        const double tv = real_trace_product(vop, rho);
        if (tv <= r.v_star + 1e-10) {
            std::lock_guard<std::mutex> lock(m);
            push_falsifier(r.falsifiers, r.falsifier_count, {"floor", i, tv, r.v_star + 1e-10});
        }
    });
    std::sort(r.falsifiers.begin(), r.falsifiers.end(),
              [](const Falsifier& a, const Falsifier& b) { return a.sample < b.sample; });
    return r;
}

LyapunovResult lyapunov_check(const SystemModel& model, const LyapunovCandidate& v, int interior_margin) {
    const int margin = resolve_margin(model, interior_margin);
    const Operator g = heisenberg_generator(model, v.op());
    LyapunovResult r;
    r.max_eig = max_eigenvalue(interior_block(g, margin));
    r.ok = r.max_eig <= kEigTol;
    return r;
}

AsymptoticResult asymptotic_check(const SystemModel& model, const LyapunovCandidate& v, const InvariantSet& set,
                                  const SamplerConfig& cfg) {
    AsymptoticResult r;
    const int margin = resolve_margin(model, cfg.interior_margin);
    const int d = model.dim();
    const int n = d - margin;
    const Operator g = heisenberg_generator(model, v.op());
    Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (interior_block(g, margin) + interior_block(g, margin).adjoint()));
    const Eigen::VectorXd& lam = es.eigenvalues();
    if (lam.maxCoeff() > kEigTol) {
        r.reason = "G(V) is not negative semidefinite";
        return r;
    }
    if (!set.has_dark_structure()) {
        r.reason = "invariant set has no dark-subspace structure";
        return r;
    }
    const Operator& w = set.isometry();
    if (w.cols() >= n) {
        r.reason = "every state is invariant; no state lies outside the set";
        return r;
    }
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i) < -kEigTol) continue;
        ++r.null_count;
        Vector full = Vector::Zero(d);
        full.head(n) = es.eigenvectors().col(i);
        const Vector outside = full - w * (w.adjoint() * full);
        r.max_null_angle = std::max(r.max_null_angle, outside.norm());
    }
    r.ok = r.max_null_angle <= kAngleTol;
    if (!r.ok) {
        r.reason = "a null direction of G(V) leaves the dark subspace";
        return r;
    }

    std::mutex m;
    kernels::parallel_for(cfg.samples, [&](std::size_t i) {
        const Operator rho = sample_state(set, d, n, cfg.seed, i);
        if (in_dark_set(set, rho)) return;
        const double tg = real_trace_product(g, rho);
        if (tg >= -1e-12) {
            std::lock_guard<std::mutex> lock(m);
            push_falsifier(r.falsifiers, r.falsifier_count, {"asymptotic", i, tg, -1e-12});
        }
    });
    std::sort(r.falsifiers.begin(), r.falsifiers.end(),
              [](const Falsifier& a, const Falsifier& b) { return a.sample < b.sample; });
    return r;
}

ExponentialResult exponential_check(const SystemModel& model, const LyapunovCandidate& v, double gamma, double zeta,
                                    int interior_margin) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be positive");
    const int margin = resolve_margin(model, interior_margin);
    const int d = model.dim();
    const Operator g = heisenberg_generator(model, v.op());
    const Operator m = g + gamma * v.op() - zeta * Operator::Identity(d, d);
    ExponentialResult r;
    r.gamma = gamma;
    r.zeta = zeta;
    r.margin = -max_eigenvalue(interior_block(m, margin));
    r.ok = r.margin >= -kEigTol;
    return r;
}

double lemma_ratio(const LyapunovCandidate& v, const InvariantSet& set, const Operator& rho, const DistanceConfig& dcfg) {
    const Operator& w = set.isometry();
    const double v_star = max_eigenvalue(w.adjoint() * v.op() * w);
    const double dist = distance_to_set_detail(rho, set, dcfg).distance;
    return (real_trace_product(v.op(), rho) - v_star) / (dist * dist);
}

KappaEstimate estimate_kappa(const LyapunovCandidate& v, const InvariantSet& set, const SamplerConfig& cfg,
                             const DistanceConfig& dcfg) {
    const FloorResult floor = floor_check(v, set, {.samples = 0, .seed = cfg.seed});
    if (!floor.ok) {
        throw PreconditionError("floor condition does not hold; kappa is undefined");
    }
    const int d = static_cast<int>(set.isometry().rows());
    const int n = d - std::max(0, cfg.interior_margin);

    std::vector<double> ratio(cfg.samples, std::numeric_limits<double>::infinity());
    std::vector<double> excess(cfg.samples, 0.0);
    std::vector<double> dist(cfg.samples, 0.0);
    std::vector<char> state(cfg.samples, 0);  // 0 in set, 1 skipped, 2 used
    kernels::parallel_for(cfg.samples, [&](std::size_t i) {
        const Operator rho = sample_state(set, d, n, cfg.seed, i);
        if (in_dark_set(set, rho)) return;
        const double di = distance_to_set_detail(rho, set, dcfg).distance;
        excess[i] = real_trace_product(v.op(), rho) - floor.v_star;
        dist[i] = di;
        if (di < 1e-8) {
            state[i] = 1;
            return;
        }
        state[i] = 2;
        ratio[i] = excess[i] / (di * di);
    });

    KappaEstimate k;
    k.kappa_hat = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cfg.samples; ++i) {
        if (state[i] == 1) ++k.skipped;
        if (state[i] != 2) continue;
        ++k.used;
        if (ratio[i] < k.kappa_hat) {
            k.kappa_hat = ratio[i];
            k.argmin_sample = i;
            k.argmin_excess = excess[i];
            k.argmin_distance = dist[i];
        }
    }
    if (k.used == 0) throw NumericalContractError("no usable samples outside the invariant set");
    return k;
}

const char* to_string(Classification c) {
    switch (c) {
        case Classification::lyapunov: return "lyapunov";
        case Classification::asymptotic: return "asymptotic";
        case Classification::exponential: return "exponential";
        default: return "inconclusive";
    }
}

namespace {

// Largest gamma on a geometric grid (refined by bisection) for which the
// exponential certificate holds with zeta = zeta_per_gamma * gamma.
std::optional<ExponentialResult> search_gamma(const SystemModel& model, const LyapunovCandidate& v, double center,
                                              double zeta_per_gamma, int margin, const CertifyConfig& cfg) {
    auto check = [&](double gamma) {
        return exponential_check(model, v, gamma, zeta_per_gamma * gamma, margin);
    };
    std::optional<ExponentialResult> best;
    int best_j = cfg.gamma_min_exponent - 1;
    for (int j = cfg.gamma_min_exponent; j <= cfg.gamma_max_exponent; ++j) {
        const ExponentialResult r = check(center * std::ldexp(1.0, j));
        if (r.ok) {
            best = r;
            best_j = j;
        }
    }
    if (!best || best_j == cfg.gamma_max_exponent) return best;
    double lo = center * std::ldexp(1.0, best_j);
    double hi = 2.0 * lo;
    while ((hi - lo) > 1e-12 * hi) {
        const double mid = 0.5 * (lo + hi);
        const ExponentialResult r = check(mid);
        if (r.ok) {
            lo = mid;
            best = r;
        } else {
            hi = mid;
        }
    }
    return best;
}

}  // namespace

StabilityReport classify(const SystemModel& model, const LyapunovCandidate& v, const InvariantSet& set,
                         const CertifyConfig& cfg) {
    if (v.op().rows() != model.dim()) throw ShapeMismatch("Lyapunov operator and model dims differ");
    StabilityReport rep;
    rep.provenance = v.provenance();
    rep.interior_margin = resolve_margin(model, cfg.sampler.interior_margin);
    rep.structure_supported = set.has_dark_structure();
    SamplerConfig sampler = cfg.sampler;
    sampler.interior_margin = rep.interior_margin;

    rep.lyapunov = lyapunov_check(model, v, rep.interior_margin);
    if (!rep.structure_supported) {
        rep.notes.push_back("invariant set is not of dark-subspace form; floor condition not checkable");
        rep.asymptotic.reason = "invariant set has no dark-subspace structure";
        return rep;
    }

    rep.floor = floor_check(v, set, {.samples = 0, .seed = sampler.seed});
    if (rep.lyapunov.ok) {
        rep.asymptotic = asymptotic_check(model, v, set, {.samples = 0, .seed = sampler.seed,
                                                            .interior_margin = rep.interior_margin});
    } else {
        rep.asymptotic.reason = "Lyapunov condition fails";
    }

    if (rep.floor->ok && rep.asymptotic.ok) {
        const double center = set.fixed_points.gap_estimate > 0.0 ? set.fixed_points.gap_estimate : 1.0;
        const double v_star = rep.floor->v_star;
        std::optional<ExponentialResult> zero_zeta;
        if (v_star >= 0.0) zero_zeta = search_gamma(model, v, center, 0.0, rep.interior_margin, cfg);
        std::optional<ExponentialResult> shifted = search_gamma(model, v, center, v_star, rep.interior_margin, cfg);
        if (zero_zeta && (!shifted || zero_zeta->gamma >= shifted->gamma * (1.0 - 1e-12))) {
            rep.exponential = zero_zeta;
        } else {
            rep.exponential = shifted;
        }
    }

    // One shared sample set for every certified condition.
    const int d = model.dim();
    const int n = d - rep.interior_margin;
    const Operator g = heisenberg_generator(model, v.op());
    rep.samples = sampler.samples;
    std::vector<SampleStats> stats(sampler.samples);
    kernels::parallel_for(sampler.samples, [&](std::size_t i) {
        const Operator rho = sample_state(set, d, n, sampler.seed, i);
        stats[i].in_set = in_dark_set(set, rho);
        stats[i].tr_v = real_trace_product(v.op(), rho);
        stats[i].tr_g = real_trace_product(g, rho);
    });
    for (std::size_t i = 0; i < stats.size(); ++i) {
        const SampleStats& s = stats[i];
        if (s.in_set) continue;
        if (rep.floor->ok && s.tr_v <= rep.floor->v_star + 1e-10) {
            push_falsifier(rep.falsifiers, rep.falsifier_count, {"floor", i, s.tr_v, rep.floor->v_star + 1e-10});
        }
        if (rep.lyapunov.ok && s.tr_g > 1e-12) {
            push_falsifier(rep.falsifiers, rep.falsifier_count, {"lyapunov", i, s.tr_g, 1e-12});
        }
        if (rep.asymptotic.ok && s.tr_g >= -1e-12) {
            push_falsifier(rep.falsifiers, rep.falsifier_count, {"asymptotic", i, s.tr_g, -1e-12});
        }
        if (rep.exponential) {
            const double bound = -rep.exponential->gamma * s.tr_v + rep.exponential->zeta + 1e-10;
            if (s.tr_g > bound) push_falsifier(rep.falsifiers, rep.falsifier_count, {"exponential", i, s.tr_g, bound});
        }
    }

    if (rep.floor->ok && cfg.compute_kappa && cfg.kappa_samples > 0) {
        SamplerConfig ks = sampler;
        ks.samples = cfg.kappa_samples;
        ks.seed = sampler.seed ^ 0x6b617070614b4150ULL;
        rep.kappa = estimate_kappa(v, set, ks, cfg.distance);
    }

    if (!rep.floor->ok) {
        rep.notes.push_back("floor condition not certified");
    } else if (rep.lyapunov.ok) {
        rep.classification = Classification::lyapunov;
        if (rep.asymptotic.ok) {
            rep.classification = Classification::asymptotic;
            if (rep.exponential) rep.classification = Classification::exponential;
        }
    }
    if (rep.falsifier_count > 0) {
        rep.notes.push_back("sampler found states violating a certified condition");
        rep.classification = Classification::inconclusive;
    }
    return rep;
}

}  // namespace qstab
