#pragma once
// Command-line front end.
//
//   qstab simulate --model F --t-final T --dt D --init SPEC --observe EXPR... --out traj.csv [--states]
//   qstab steady   --model F --out steady.json
//   qstab certify  --model F --lyapunov EXPR|auto --out report.json
//   qstab distance --model F --state SPEC
//   qstab example  --name ex1|ex2 --outdir DIR
//
// F is a JSON model file or `preset:ex1` / `preset:ex2`. Exit status is 0 on
// success, 1 for parse and configuration errors and 2 when a numerical
// contract is violated; errors go to stderr as one line of JSON
// {"code": ..., "message": ...}. QSTAB_SEED overrides preset seeds.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qstab/certify.hpp"
#include "qstab/lindblad.hpp"
#include "qstab/modelfile.hpp"

namespace qstab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

// `args` excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::optional<std::uint64_t> seed_override();

struct ExamplePreset {
    std::string name;
    std::vector<std::string> initial_states;  // init specs; `mixed:` entries use `seed`
    double t_final = 1.0;
    double dt = 1e-3;
    std::uint64_t seed = 0;
};

// Seeds already reflect QSTAB_SEED.
ExamplePreset example_preset(const std::string& name);

struct CandidateChoice {
    LyapunovCandidate candidate;
    StabilityReport report;
};

// `auto` tries V = sum L^dag L, then V = H, keeping the stronger classification.
CandidateChoice certify_model(const SystemModel& model, const ModelFile& file, const std::string& lyapunov,
                              const InvariantSet& set, const CertifyConfig& cfg);

}  // namespace qstab::cli
