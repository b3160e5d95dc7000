#pragma once
// JSON model files and initial-state specs.
//
//   {
//     "label": "two-photon-loss",
//     "dim": 30,
//     "params": {"alpha2": 1, "beta": "0.8+0.4i", "g": [0.5, -1]},
//     "hamiltonian": "0*id",
//     "couplings": ["a^2 - alpha2*id"]
//   }

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qstab/expr.hpp"
#include "qstab/hilbert.hpp"
#include "qstab/lindblad.hpp"

namespace qstab {

struct ModelFile {
    int dim = 0;
    std::string hamiltonian;
    std::vector<std::string> couplings;
    ParamMap params;
    std::string label;
};

ModelFile parse_model_json(std::string_view json_text);
ModelFile load_model_file(const std::string& path);
std::string model_to_json(const ModelFile& m);

SystemModel build_model(const ModelFile& m);

// "ex1" and "ex2".
ModelFile preset_model_file(std::string_view name);

// `--model` argument: `preset:ex1`, `preset:ex2` or a path.
ModelFile resolve_model(const std::string& arg);

// coherent:RE+IMi | fock:n | mixed:SEED:RANK
struct InitSpec {
    enum class Kind { coherent, fock, mixed } kind = Kind::fock;
    cplx alpha{};
    int n = 0;
    std::uint64_t seed = 0;
    int rank = 1;
    std::string text;
};

InitSpec parse_init_spec(std::string_view text);
DensityOperator make_initial_state(const InitSpec& spec, int dim);

}  // namespace qstab
