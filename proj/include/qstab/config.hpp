#pragma once

namespace qstab {

// Default numerical tolerances shared by every module. All of them can be
// overridden per call.
struct Tolerances {
    double herm_tol = 1e-10;   // max |X - X^dagger| entry
    double trace_tol = 1e-9;   // |tr(rho) - 1|
    double psd_tol = 1e-9;     // min eigenvalue >= -psd_tol
    double tail_tol = 1e-9;    // truncated Poisson tail / vector norm defect
};

inline constexpr Tolerances kDefaultTolerances{};

}  // namespace qstab
