#include "qstab/dynamics.hpp"

#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>

#include <Eigen/SVD>

#include "qstab/error.hpp"

namespace qstab {

void IntegratorConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
    if (!(t_final > 0.0) || !std::isfinite(t_final)) throw ConfigError("t_final must be positive");
    if (!(dt < t_final)) throw ConfigError("dt must be smaller than t_final");
    if (max_stored_states < 2) throw ConfigError("max_stored_states must be >= 2");
}

const std::vector<cplx>& Trajectory::observable(const std::string& label) const {
    auto it = observables.find(label);
    if (it == observables.end()) throw InvalidArgument("no observable labelled '" + label + "'");
    return it->second;
}

namespace {

double operator_norm(const Operator& x) {
    if (x.size() == 0) return 0.0;
    Eigen::BDCSVD<Operator> svd(x);
    return svd.singularValues()(0);
}

void check_cap(int dim, std::size_t cap) {
    const std::size_t n = static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim);
    if (n > cap) {
        throw CapacityError("dim^2 = " + std::to_string(n) + " exceeds exponential cap " +
                            std::to_string(cap));
    }
}

Tolerances trajectory_tolerances(double psd_tol) {
    Tolerances tol;
    tol.psd_tol = psd_tol;
    tol.trace_tol = 1e-8;
    return tol;
}

// One classical RK4 step of d rho / dt = L*(rho).
class Rk4Stepper {
public:
    explicit Rk4Stepper(const SystemModel& model) : kernel_(model) {}

    void step(Operator& rho, double h) {
        kernel_.apply_schrodinger(rho, k1_);
        tmp_ = rho + (0.5 * h) * k1_;
        kernel_.apply_schrodinger(tmp_, k2_);
        tmp_ = rho + (0.5 * h) * k2_;
        kernel_.apply_schrodinger(tmp_, k3_);
        tmp_ = rho + h * k3_;
        kernel_.apply_schrodinger(tmp_, k4_);
        rho += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    }

private:
    kernels::GeneratorKernel kernel_;
    Operator k1_, k2_, k3_, k4_, tmp_;
};

class ExponentialStepper {
public:
    explicit ExponentialStepper(const SystemModel& model)
        : dim_(model.dim()), prop_(kernels::sparse_liouvillian(model, Picture::schrodinger)) {}

    void step(Operator& rho, double h) { rho = devectorize(prop_.apply(vectorize(rho), h), dim_); }

private:
    int dim_;
    ExponentialPropagator prop_;
};

template <class Stepper>
Trajectory integrate(Stepper& stepper, const SystemModel& model, const DensityOperator& rho0,
                     const IntegratorConfig& cfg, const std::vector<ObservableSpec>& observables) {
    const long long nsteps = static_cast<long long>(std::ceil(cfg.t_final / cfg.dt - 1e-9));
    const double h = cfg.t_final / static_cast<double>(nsteps);
    const long long max_stored = static_cast<long long>(cfg.max_stored_states);
    const long long stride = std::max<long long>(1, (nsteps + max_stored - 2) / (max_stored - 1));
    const Tolerances tol = trajectory_tolerances(cfg.psd_tol);

    Trajectory traj;
    traj.times.reserve(nsteps + 1);
    traj.trace.reserve(nsteps + 1);
    traj.min_eig.reserve(nsteps + 1);
    for (const ObservableSpec& o : observables) {
        require_operator(o.op, model.dim(), ("observable " + o.label).c_str());
        if (traj.observables.count(o.label)) throw InvalidArgument("duplicate observable label " + o.label);
        traj.labels.push_back(o.label);
        traj.observables[o.label].reserve(nsteps + 1);
    }

    const double radius = spectral_radius_bound(model);
    if (h * radius > 0.1) {
        std::ostringstream os;
        os << "step-stability: dt * spectral radius bound = " << h * radius << " > 0.1";
        traj.warnings.push_back(os.str());
    }

    Operator rho = rho0.op();
    bool drift_warned = false;
    auto record = [&](long long step, double tr) {
        const double t = static_cast<double>(step) * h;
        traj.times.push_back(t);
        traj.trace.push_back(tr);
        const double lmin = min_eigenvalue(rho);
        traj.min_eig.push_back(lmin);
        if (lmin < -cfg.psd_tol) {
            std::ostringstream os;
            os << "positivity violated at t = " << t << ": min eigenvalue " << lmin;
            throw NumericalContractError(os.str());
        }
        for (const ObservableSpec& o : observables) {
            traj.observables[o.label].push_back(expectation(o.op, rho));
        }
        if (step % stride == 0 || step == nsteps) {
            traj.stored_times.push_back(t);
            traj.states.emplace_back(rho, tol);
        }
    };

    record(0, rho.trace().real());
    for (long long step = 1; step <= nsteps; ++step) {
        stepper.step(rho, h);
        const double tr = rho.trace().real();
        const double drift = std::abs(tr - 1.0);
        if (!std::isfinite(tr) || drift > cfg.drift_error) {
            std::ostringstream os;
            os << "trace drift " << drift << " at t = " << static_cast<double>(step) * h
               << " exceeds " << cfg.drift_error;
            throw NumericalContractError(os.str());
        }
        if (drift > cfg.drift_warn && !drift_warned) {
            std::ostringstream os;
            os << "trace drift " << drift << " above " << cfg.drift_warn << " at t = "
               << static_cast<double>(step) * h;
            traj.warnings.push_back(os.str());
            drift_warned = true;
        }
        if (cfg.renormalize) rho /= tr;
        record(step, tr);
    }
    return traj;
}

}  // namespace

double spectral_radius_bound(const SystemModel& model) {
    double r = 2.0 * operator_norm(model.hamiltonian());
    for (const Operator& l : model.couplings()) {
        const double n = operator_norm(l);
        r += 2.0 * n * n;
    }
    return r;
}

Trajectory evolve_density(const SystemModel& model, const DensityOperator& rho0,
                          const IntegratorConfig& cfg, const std::vector<ObservableSpec>& observables) {
    cfg.validate();
    if (rho0.dim() != model.dim()) throw ShapeMismatch("initial state and model dims differ");
    if (cfg.method == IntegrationMethod::rk4) {
        Rk4Stepper stepper(model);
        return integrate(stepper, model, rho0, cfg, observables);
    }
    check_cap(model.dim(), cfg.exponential_cap);
    ExponentialStepper stepper(model);
    return integrate(stepper, model, rho0, cfg, observables);
}

std::vector<Trajectory> evolve_batch(const SystemModel& model,
                                     const std::vector<DensityOperator>& initial_states,
                                     const IntegratorConfig& cfg,
                                     const std::vector<ObservableSpec>& observables) {
    std::vector<Trajectory> out(initial_states.size());
    std::exception_ptr failure;
    std::mutex failure_mutex;
    kernels::parallel_for(initial_states.size(), [&](std::size_t i) {
        try {
            out[i] = evolve_density(model, initial_states[i], cfg, observables);
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    });
    if (failure) std::rethrow_exception(failure);
    return out;
}

ExponentialPropagator::ExponentialPropagator(kernels::SparseOperator generator) : m_(std::move(generator)) {
    for (int j = 0; j < m_.outerSize(); ++j) {
        double col = 0.0;
        for (kernels::SparseOperator::InnerIterator it(m_, j); it; ++it) col += std::abs(it.value());
        norm1_ = std::max(norm1_, col);
    }
}

Vector ExponentialPropagator::apply(const Vector& v, double t) const {
    if (v.size() != m_.cols()) throw ShapeMismatch("propagator argument has wrong length");
    if (t == 0.0 || norm1_ == 0.0) return v;
    // Substeps keep ||t M / s||_1 <= 4 so the Taylor terms decay quickly.
    constexpr double kTheta = 4.0;
    constexpr int kMaxTerms = 120;
    const long long substeps = std::max<long long>(1, static_cast<long long>(std::ceil(std::abs(t) * norm1_ / kTheta)));
    const double h = t / static_cast<double>(substeps);

    Vector x = v;
    Vector term(v.size());
    Vector next(v.size());
    for (long long s = 0; s < substeps; ++s) {
        term = x;
        Vector acc = x;
        double prev_norm = term.lpNorm<1>();
        for (int k = 1; k <= kMaxTerms; ++k) {
            next.noalias() = m_ * term;
            term = (h / static_cast<double>(k)) * next;
            acc += term;
            const double tn = term.lpNorm<1>();
            if (tn + prev_norm <= 1e-17 * acc.lpNorm<1>()) break;
            prev_norm = tn;
        }
        x = acc;
    }
    return x;
}

DensityOperator evolve_exponential(const SystemModel& model, const DensityOperator& rho0, double t,
                                   std::size_t cap) {
    check_cap(model.dim(), cap);
    if (rho0.dim() != model.dim()) throw ShapeMismatch("initial state and model dims differ");
    if (t < 0.0) throw InvalidArgument("evolution time must be >= 0");
    if (t == 0.0) return rho0;
    const ExponentialPropagator prop(kernels::sparse_liouvillian(model, Picture::schrodinger));
    Operator rho = devectorize(prop.apply(vectorize(rho0.op()), t), model.dim());
    Tolerances tol;
    tol.psd_tol = 1e-8;
    return DensityOperator(std::move(rho), tol);
}

Operator evolve_observable(const SystemModel& model, const Operator& x, double t, std::size_t cap) {
    check_cap(model.dim(), cap);
    require_operator(x, model.dim(), "observable");
    if (t < 0.0) throw InvalidArgument("evolution time must be >= 0");
    if (t == 0.0) return x;
    const ExponentialPropagator prop(kernels::sparse_liouvillian(model, Picture::heisenberg));
    return devectorize(prop.apply(vectorize(x), t), model.dim());
}

}  // namespace qstab
