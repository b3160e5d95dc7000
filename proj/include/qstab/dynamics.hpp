#pragma once
// Time evolution rho_t = S_t(rho) and T_t(X) for a SystemModel.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "qstab/hilbert.hpp"
#include "qstab/kernels.hpp"
#include "qstab/lindblad.hpp"

namespace qstab {

enum class IntegrationMethod { rk4, exponential };

struct IntegratorConfig {
    double dt = 1e-3;
    double t_final = 1.0;
    IntegrationMethod method = IntegrationMethod::rk4;
    bool renormalize = true;
    std::size_t max_stored_states = 500;
    double drift_warn = 1e-8;   // per-step |tr - 1| above this is recorded
    double drift_error = 1e-5;  // ... and above this aborts
    double psd_tol = 1e-6;      // positivity check on every step
    std::size_t exponential_cap = 4096;

    void validate() const;
};

struct ObservableSpec {
    std::string label;
    Operator op;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<double> trace;       // tr(rho_t) before renormalization
    std::vector<double> min_eig;     // smallest eigenvalue of rho_t
    std::vector<std::string> labels; // observable order
    std::map<std::string, std::vector<cplx>> observables;
    std::vector<double> stored_times;
    std::vector<DensityOperator> states;
    std::vector<std::string> warnings;

    const std::vector<cplx>& observable(const std::string& label) const;
};

// Bound on the spectral radius of L*: 2||H|| + 2 sum ||L_k||^2.
double spectral_radius_bound(const SystemModel& model);

Trajectory evolve_density(const SystemModel& model, const DensityOperator& rho0,
                          const IntegratorConfig& cfg,
                          const std::vector<ObservableSpec>& observables = {});

// Runs independent trajectories concurrently, one per initial state.
std::vector<Trajectory> evolve_batch(const SystemModel& model,
                                     const std::vector<DensityOperator>& initial_states,
                                     const IntegratorConfig& cfg,
                                     const std::vector<ObservableSpec>& observables = {});

// exp(t M) v by a scaled truncated Taylor series on a sparse matrix.
class ExponentialPropagator {
public:
    explicit ExponentialPropagator(kernels::SparseOperator generator);

    Vector apply(const Vector& v, double t) const;
    double norm1() const noexcept { return norm1_; }

private:
    kernels::SparseOperator m_;
    double norm1_ = 0.0;
};

inline constexpr std::size_t kDefaultExponentialCap = 4096;

// vec(rho_t) = exp(t M_s) vec(rho_0).
DensityOperator evolve_exponential(const SystemModel& model, const DensityOperator& rho0, double t,
                                   std::size_t cap = kDefaultExponentialCap);

// vec(T_t(X)) = exp(t M_h) vec(X).
Operator evolve_observable(const SystemModel& model, const Operator& x, double t,
                           std::size_t cap = kDefaultExponentialCap);

}  // namespace qstab
