#pragma once
// Lyapunov certificates for the invariant set C*.
//
// Every generator condition is certified in matrix form over all states
// (e.g. G(V) <= 0 as an operator inequality), evaluated on the truncation
// interior: the leading (dim - margin) levels, where truncated ladder
// polynomials are exact. A seeded sampler independently searches for states
// that violate a certified condition.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qstab/hilbert.hpp"
#include "qstab/lindblad.hpp"
#include "qstab/steady.hpp"

namespace qstab {

class LyapunovCandidate {
public:
    LyapunovCandidate(Operator v, std::string provenance, const Tolerances& tol = kDefaultTolerances);

    const Operator& op() const noexcept { return v_; }
    const std::string& provenance() const noexcept { return provenance_; }

private:
    Operator v_;
    std::string provenance_;
};

struct SamplerConfig {
    std::size_t samples = 2000;
    std::uint64_t seed = 0x51ab1e5eedULL;
    // Levels excluded at the top of the Fock space; negative means "use the
    // model's truncation margin".
    int interior_margin = -1;
};

// Deterministic sample i: random mixed states of cycling rank supported on
// the interior levels, and (when the set has a dark subspace) mixtures
// (1 - eps) W tau W^dag + eps sigma hugging the set.
Operator sample_state(const InvariantSet& set, int dim, int interior_dim, std::uint64_t seed, std::size_t index);

struct Falsifier {
    std::string condition;
    std::size_t sample = 0;
    double value = 0.0;
    double bound = 0.0;
};

struct FloorResult {
    double v_star = 0.0;
    bool ok = false;
    double margin = 0.0;        // min eig of the complement block minus v_star
    double block_error = 0.0;   // max |W^dag V W - v_star 1|
    double cross_norm = 0.0;    // ||(1 - W W^dag) V W||_F
    std::vector<Falsifier> falsifiers;
    std::size_t falsifier_count = 0;
};

FloorResult floor_check(const LyapunovCandidate& v, const InvariantSet& set, const SamplerConfig& cfg = {});

struct LyapunovResult {
    double max_eig = 0.0;
    bool ok = false;
};

LyapunovResult lyapunov_check(const SystemModel& model, const LyapunovCandidate& v, int interior_margin = -1);

struct AsymptoticResult {
    bool ok = false;
    int null_count = 0;         // eigenvalues of G(V) in [-1e-10, 1e-10]
    double max_null_angle = 0.0;  // largest ||(1 - P) v|| over null eigenvectors
    std::string reason;
    std::vector<Falsifier> falsifiers;
    std::size_t falsifier_count = 0;
};

AsymptoticResult asymptotic_check(const SystemModel& model, const LyapunovCandidate& v,
                                  const InvariantSet& set, const SamplerConfig& cfg = {});

struct ExponentialResult {
    bool ok = false;
    double margin = 0.0;  // -max eig of G(V) + gamma V - zeta 1
    double gamma = 0.0;
    double zeta = 0.0;
};

ExponentialResult exponential_check(const SystemModel& model, const LyapunovCandidate& v, double gamma,
                                    double zeta, int interior_margin = -1);

struct KappaEstimate {
    double kappa_hat = 0.0;
    std::size_t used = 0;
    std::size_t skipped = 0;   // samples with d(rho, C*) ~ 0
    std::size_t argmin_sample = 0;
    double argmin_excess = 0.0;    // tr(V rho) - v_star
    double argmin_distance = 0.0;  // d(rho, C*)
};

// (tr(V rho) - v_star) / d(rho, C*)^2
double lemma_ratio(const LyapunovCandidate& v, const InvariantSet& set, const Operator& rho,
                   const DistanceConfig& dcfg = {});

KappaEstimate estimate_kappa(const LyapunovCandidate& v, const InvariantSet& set,
                             const SamplerConfig& cfg = {.samples = 1000}, const DistanceConfig& dcfg = {.starts = 2});

enum class Classification { inconclusive, lyapunov, asymptotic, exponential };

const char* to_string(Classification c);

struct CertifyConfig {
    SamplerConfig sampler{};
    std::size_t kappa_samples = 1000;
    bool compute_kappa = true;
    DistanceConfig distance{.starts = 2};
    int gamma_min_exponent = -6;
    int gamma_max_exponent = 6;
};

struct StabilityReport {
    std::string provenance;
    int interior_margin = 0;
    bool structure_supported = false;
    std::optional<FloorResult> floor;
    LyapunovResult lyapunov;
    AsymptoticResult asymptotic;
    std::optional<ExponentialResult> exponential;
    std::optional<KappaEstimate> kappa;
    std::vector<Falsifier> falsifiers;
    std::size_t falsifier_count = 0;
    std::size_t samples = 0;
    Classification classification = Classification::inconclusive;
    std::vector<std::string> notes;

    bool floor_ok() const noexcept { return floor && floor->ok; }
};

StabilityReport classify(const SystemModel& model, const LyapunovCandidate& v, const InvariantSet& set,
                         const CertifyConfig& cfg = {});

}  // namespace qstab
