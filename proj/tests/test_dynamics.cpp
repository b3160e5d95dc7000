#include <cmath>

#include <gtest/gtest.h>

#include "qstab/dynamics.hpp"
#include "qstab/error.hpp"
#include "qstab/presets.hpp"
#include "support.hpp"

using namespace qstab;
using qstab::testing::max_abs;

TEST(IntegratorConfig, Validation) {
    IntegratorConfig c;
    EXPECT_NO_THROW(c.validate());
    c.dt = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.t_final = -1.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.dt = 2.0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Evolve, DisplacedOscillatorClosedForms) {
    const presets::DisplacedOscillator p;
    const SystemModel m = presets::displaced_oscillator(p);
    const cplx beta(-1.0, 0.0);
    IntegratorConfig cfg;
    cfg.t_final = 2.0;
    cfg.dt = 1e-3;
    const Operator v = presets::displaced_oscillator_lyapunov(p);
    const Trajectory t = evolve_density(m, pure_density(coherent_state(beta, p.dim)), cfg,
                                        {{"a", annihilation_op(p.dim)}, {"V", v}});
    ASSERT_EQ(t.times.size(), 2001u);
    const double v0 = std::norm(beta - p.alpha);
    for (std::size_t i = 0; i < t.times.size(); i += 100) {
        const double s = t.times[i];
        const cplx closed = p.alpha + (beta - p.alpha) * std::exp(-(cplx(0.0, 1.0) + 0.5 * p.kappa) * s);
        EXPECT_LT(std::abs(t.observable("a")[i] - closed), 1e-9) << s;
        EXPECT_NEAR(t.observable("V")[i].real(), v0 * std::exp(-p.kappa * s), 1e-9) << s;
    }
    EXPECT_NEAR(t.trace.back(), 1.0, 1e-12);
}

// Reference values from scipy.linalg.expm on the dense vectorized generator
// (tests/oracle/generate.py).
TEST(Evolve, TwoPhotonLossMatchesDenseExpm) {
    const presets::TwoPhotonLoss p;
    const SystemModel m = presets::two_photon_loss(p);
    const Operator v = presets::two_photon_loss_lyapunov(p);
    const DensityOperator rho0 = pure_density(fock_state(0, p.dim));
    const struct {
        double t, v, n;
    } ref[] = {{0.5, 0.35451161023312516, 0.15407628610811597},
               {1.0, 0.12104652318616116, 0.38007241797407526},
               {2.0, 0.013991056247945437, 0.644677777643918}};
    IntegratorConfig cfg;
    cfg.t_final = 2.0;
    cfg.dt = 5e-4;
    const Trajectory t = evolve_density(m, rho0, cfg, {{"V", v}, {"n", number_op(p.dim)}});
    for (const auto& r : ref) {
        const std::size_t i = static_cast<std::size_t>(std::lround(r.t / 5e-4));
        ASSERT_NEAR(t.times[i], r.t, 1e-12);
        EXPECT_NEAR(t.observable("V")[i].real(), r.v, 1e-9);
        EXPECT_NEAR(t.observable("n")[i].real(), r.n, 1e-9);
        const DensityOperator e = evolve_exponential(m, rho0, r.t);
        EXPECT_NEAR(expectation(v, e).real(), r.v, 1e-10);
        EXPECT_NEAR(expectation(number_op(p.dim), e).real(), r.n, 1e-10);
    }
}

TEST(Evolve, Rk4AgreesWithExponentialOnRandomModels) {
    for (int trial = 0; trial < 4; ++trial) {
        const int d = 3 + 2 * trial;
        const SystemModel m = qstab::testing::random_model(d, 900 + trial);
        const DensityOperator rho0 = random_density(d, 2, trial);
        IntegratorConfig cfg;
        cfg.t_final = 0.5;
        cfg.dt = 1e-3;
        const Trajectory t = evolve_density(m, rho0, cfg);
        const DensityOperator e = evolve_exponential(m, rho0, 0.5);
        EXPECT_LT(trace_norm(t.states.back().op() - e.op()), 1e-8);
        EXPECT_NEAR(t.stored_times.back(), 0.5, 1e-12);
    }
}

TEST(Evolve, ExponentialMethodMatchesRk4) {
    const SystemModel m = qstab::testing::random_model(4, 42);
    const DensityOperator rho0 = random_density(4, 4, 1);
    IntegratorConfig cfg;
    cfg.t_final = 0.3;
    cfg.dt = 0.01;
    cfg.method = IntegrationMethod::exponential;
    const Trajectory ex = evolve_density(m, rho0, cfg);
    cfg.method = IntegrationMethod::rk4;
    cfg.dt = 1e-3;
    const Trajectory rk = evolve_density(m, rho0, cfg);
    EXPECT_LT(trace_norm(ex.states.back().op() - rk.states.back().op()), 1e-9);
}

TEST(Evolve, StoredStatesAreThinned) {
    const SystemModel m = qstab::testing::random_model(3, 1);
    IntegratorConfig cfg;
    cfg.t_final = 1.0;
    cfg.dt = 1e-3;
    cfg.max_stored_states = 50;
    const Trajectory t = evolve_density(m, random_density(3, 1, 2), cfg, {{"x", number_op(3)}});
    EXPECT_EQ(t.times.size(), 1001u);
    EXPECT_EQ(t.min_eig.size(), 1001u);
    EXPECT_LE(t.states.size(), 50u);
    EXPECT_GE(t.states.size(), 2u);
    EXPECT_DOUBLE_EQ(t.stored_times.front(), 0.0);
    EXPECT_NEAR(t.stored_times.back(), 1.0, 1e-12);
    EXPECT_THROW(t.observable("missing"), InvalidArgument);
}

TEST(Evolve, UnstableStepIsANumericalContractViolation) {
    const SystemModel m = presets::two_photon_loss();
    IntegratorConfig cfg;
    cfg.t_final = 1.0;
    cfg.dt = 0.05;
    const DensityOperator rho0 = random_density(30, 30, 3);
    EXPECT_THROW(evolve_density(m, rho0, cfg), NumericalContractError);
}

TEST(Evolve, BatchMatchesSequential) {
    const SystemModel m = presets::displaced_oscillator({1.0, cplx(0.3, 0.1), 12});
    IntegratorConfig cfg;
    cfg.t_final = 0.2;
    cfg.dt = 1e-3;
    std::vector<DensityOperator> inits{random_density(12, 1, 1), random_density(12, 3, 2), random_density(12, 12, 3)};
    const auto batch = evolve_batch(m, inits, cfg, {{"a", annihilation_op(12)}});
    for (std::size_t i = 0; i < inits.size(); ++i) {
        const Trajectory t = evolve_density(m, inits[i], cfg, {{"a", annihilation_op(12)}});
        EXPECT_EQ(max_abs(t.states.back().op() - batch[i].states.back().op()), 0.0);
    }
}

TEST(Semigroup, CompositionAndDuality) {
    for (int trial = 0; trial < 5; ++trial) {
        const int d = 3 + trial;
        const SystemModel m = qstab::testing::random_model(d, 1200 + trial);
        std::mt19937_64 gen(trial);
        const Operator x = qstab::testing::random_matrix(d, d, gen);
        const double s = 0.3, t = 0.45;
        const Operator lhs = evolve_observable(m, x, s + t);
        const Operator rhs = evolve_observable(m, evolve_observable(m, x, t), s);
        EXPECT_LT(max_abs(lhs - rhs), 1e-9 * (1.0 + max_abs(x)));
        const DensityOperator rho = random_density(d, 2, trial);
        const cplx a = (evolve_observable(m, x, t) * rho.op()).trace();
        const cplx b = (x * evolve_exponential(m, rho, t).op()).trace();
        EXPECT_LT(std::abs(a - b), 1e-9 * (1.0 + max_abs(x)));
        // identity is fixed by the Heisenberg semigroup
        EXPECT_LT(max_abs(evolve_observable(m, identity_op(d), t) - identity_op(d)), 1e-12);
    }
}

TEST(Semigroup, ExponentialCapIsEnforced) {
    const SystemModel m = presets::displaced_oscillator();
    EXPECT_THROW(evolve_exponential(m, pure_density(fock_state(0, 40)), 1.0, 100), CapacityError);
}

TEST(Semigroup, FixedPointIsStationary) {
    const presets::DisplacedOscillator p;
    const SystemModel m = presets::displaced_oscillator(p);
    const DensityOperator star = pure_density(coherent_state(p.alpha, p.dim));
    for (double t : {0.5, 5.0}) EXPECT_LT(trace_norm(evolve_exponential(m, star, t).op() - star.op()), 1e-6);
    EXPECT_EQ(max_abs(evolve_exponential(m, star, 0.0).op() - star.op()), 0.0);
}
