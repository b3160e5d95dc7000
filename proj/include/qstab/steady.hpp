#pragma once
// The set C* of invariant density operators: fixed points of L*, the dark
// subspace, membership and trace-norm distance to the set.

#include <cstdint>
#include <optional>
#include <vector>

#include "qstab/hilbert.hpp"
#include "qstab/lindblad.hpp"

namespace qstab {

struct FixedPointBasis {
    int dim = 0;
    std::vector<Operator> basis;     // Hermitian, Hilbert-Schmidt orthonormal
    double svd_threshold = 0.0;      // absolute singular-value cutoff that was used
    double relative_threshold = 0.0;
    double largest_singular_value = 0.0;
    // Smallest singular value above the cutoff; a scale for the decay rate.
    double gap_estimate = 0.0;

    int dimension() const noexcept { return static_cast<int>(basis.size()); }
};

inline constexpr std::size_t kDefaultKernelCap = 4096;

FixedPointBasis fixed_point_basis(const SystemModel& model, double relative_threshold = 1e-9,
                                  std::size_t cap = kDefaultKernelCap);

// Largest H-invariant subspace of the common kernel of the couplings, as a
// dim x k isometry. Empty when that subspace is trivial.
std::optional<Operator> dark_subspace(const SystemModel& model, double tol = 1e-8);

struct InvariantSet {
    FixedPointBasis fixed_points;
    // Present only when the fixed points are exactly the states supported on
    // the dark subspace (kernel dimension k^2 and H scalar on the subspace).
    std::optional<Operator> dark_isometry;
    int k = 0;
    // Dimension of the detected dark subspace even when it does not explain
    // the fixed points.
    int candidate_k = 0;

    bool has_dark_structure() const noexcept { return dark_isometry.has_value(); }
    const Operator& isometry() const;
    // P = W W^dagger
    Operator projector() const;
    // Density operator W tau W^dagger.
    DensityOperator embed(const Operator& tau) const;
};

struct InvariantSetConfig {
    double svd_relative_threshold = 1e-9;
    double dark_tol = 1e-8;
    std::size_t cap = kDefaultKernelCap;
};

InvariantSet invariant_set(const SystemModel& model, const InvariantSetConfig& cfg = {});

struct InvarianceCheck {
    bool invariant = false;
    double residual = 0.0;   // ||L*(rho)||_1
    explicit operator bool() const noexcept { return invariant; }
};

InvarianceCheck is_invariant(const SystemModel& model, const DensityOperator& rho, double tol = 1e-8);

// True when rho is supported on the dark subspace: tr((1 - P) rho) <= tol.
bool in_dark_set(const InvariantSet& set, const Operator& rho, double tol = 1e-12);

struct DistanceConfig {
    double opt_tol = 1e-4;
    int starts = 8;
    std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
    int max_iterations = 400;
};

struct DistanceResult {
    double distance = 0.0;
    Operator tau;  // k x k minimizer
};

// inf over tau of ||rho - W tau W^dagger||_1.
DistanceResult distance_to_set_detail(const Operator& rho, const InvariantSet& set,
                                      const DistanceConfig& cfg = {});
double distance_to_set(const DensityOperator& rho, const InvariantSet& set,
                       const DistanceConfig& cfg = {});

}  // namespace qstab
