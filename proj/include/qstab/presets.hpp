#pragma once
// The two reference systems: a damped displaced oscillator and a two-photon
// loss channel with a cat-state dark subspace.

#include "qstab/hilbert.hpp"
#include "qstab/lindblad.hpp"

namespace qstab::presets {

struct DisplacedOscillator {
    double kappa = 1.0;
    cplx alpha{0.8, 0.4};
    int dim = 40;
};

// H = (a - alpha)^dag (a - alpha), L = sqrt(kappa) (a - alpha).
SystemModel displaced_oscillator(const DisplacedOscillator& p = {});
// V = (a - alpha)^dag (a - alpha)
Operator displaced_oscillator_lyapunov(const DisplacedOscillator& p = {});

struct TwoPhotonLoss {
    cplx alpha{1.0, 0.0};
    int dim = 30;
};

// H = 0, L = a^2 - alpha^2.
SystemModel two_photon_loss(const TwoPhotonLoss& p = {});
// V = L^dag L
Operator two_photon_loss_lyapunov(const TwoPhotonLoss& p = {});

}  // namespace qstab::presets
