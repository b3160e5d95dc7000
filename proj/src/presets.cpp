#include "qstab/presets.hpp"

#include <cmath>

namespace qstab::presets {

namespace {

Operator displaced_mode(const DisplacedOscillator& p) {
    return annihilation_op(p.dim) - p.alpha * identity_op(p.dim);
}

Operator two_photon_coupling(const TwoPhotonLoss& p) {
    const Operator a = annihilation_op(p.dim);
    return a * a - (p.alpha * p.alpha) * identity_op(p.dim);
}

}  // namespace

SystemModel displaced_oscillator(const DisplacedOscillator& p) {
    const Operator b = displaced_mode(p);
    Operator h = b.adjoint() * b;
    h = 0.5 * (h + h.adjoint()).eval();
    return SystemModel(std::move(h), {std::sqrt(p.kappa) * b}, "displaced-oscillator", 1);
}

Operator displaced_oscillator_lyapunov(const DisplacedOscillator& p) {
    const Operator b = displaced_mode(p);
    Operator v = b.adjoint() * b;
    return 0.5 * (v + v.adjoint());
}

SystemModel two_photon_loss(const TwoPhotonLoss& p) {
    return SystemModel(Operator::Zero(p.dim, p.dim), {two_photon_coupling(p)}, "two-photon-loss", 2);
}

Operator two_photon_loss_lyapunov(const TwoPhotonLoss& p) {
    const Operator l = two_photon_coupling(p);
    Operator v = l.adjoint() * l;
    return 0.5 * (v + v.adjoint());
}

}  // namespace qstab::presets
