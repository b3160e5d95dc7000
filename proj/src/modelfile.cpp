#include "qstab/modelfile.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qstab/error.hpp"

namespace qstab {

namespace {

using nlohmann::json;

cplx param_value(const std::string& name, const json& v) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_string()) return parse_complex(v.get<std::string>());
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
        return {v[0].get<double>(), v[1].get<double>()};
    }
    throw ConfigError("param '" + name + "' must be a number, an \"RE+IMi\" string or [re, im]");
}

template <typename Int>
Int parse_int(std::string_view text, const char* what) {
    Int value{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw ParseError(std::string("malformed ") + what + " '" + std::string(text) + "'", 0, {"integer"});
    }
    return value;
}

}  // namespace

ModelFile parse_model_json(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("model file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("model file must be a JSON object");
    ModelFile m;
    try {
        if (!j.contains("dim") || !j["dim"].is_number_integer()) throw ConfigError("model file needs integer 'dim'");
        m.dim = j["dim"].get<int>();
        if (m.dim < 2) throw ConfigError("'dim' must be at least 2");
        if (!j.contains("hamiltonian") || !j["hamiltonian"].is_string()) {
            throw ConfigError("model file needs string 'hamiltonian'");
        }
        m.hamiltonian = j["hamiltonian"].get<std::string>();
        if (j.contains("couplings")) {
            if (!j["couplings"].is_array()) throw ConfigError("'couplings' must be an array of strings");
            for (const auto& c : j["couplings"]) {
                if (!c.is_string()) throw ConfigError("'couplings' must be an array of strings");
                m.couplings.push_back(c.get<std::string>());
            }
        }
        if (j.contains("params")) {
            if (!j["params"].is_object()) throw ConfigError("'params' must be an object");
            for (const auto& [name, v] : j["params"].items()) m.params[name] = param_value(name, v);
        }
        m.label = j.value("label", std::string{});
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model file: ") + e.what());
    }
    return m;
}

ModelFile load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model_json(ss.str());
}

std::string model_to_json(const ModelFile& m) {
    json j;
    j["label"] = m.label;
    j["dim"] = m.dim;
    json params = json::object();
    for (const auto& [k, v] : m.params) params[k] = format_complex(v);
    j["params"] = params;
    j["hamiltonian"] = m.hamiltonian;
    j["couplings"] = m.couplings;
    return j.dump(2);
}

SystemModel build_model(const ModelFile& m) {
    if (m.dim < 2) throw ConfigError("'dim' must be at least 2");
    const Operator h = evaluate(parse_expr(m.hamiltonian, &m.params), m.dim, m.params);
    std::vector<Operator> ls;
    int degree = 0;
    for (const auto& text : m.couplings) {
        const Expr e = parse_expr(text, &m.params);
        degree = std::max(degree, ladder_degree(e));
        ls.push_back(evaluate(e, m.dim, m.params));
    }
    const double herm = hermiticity_error(h);
    if (herm > kDefaultTolerances.herm_tol * std::max(1.0, h.cwiseAbs().maxCoeff())) {
        throw ConfigError("hamiltonian is not Hermitian (error " + format_double(herm) + ")");
    }
    return SystemModel(0.5 * (h + h.adjoint()), std::move(ls), m.label, degree);
}

ModelFile preset_model_file(std::string_view name) {
    ModelFile m;
    if (name == "ex1") {
        m.label = "displaced-oscillator";
        m.dim = 40;
        m.params = {{"alpha", {0.8, 0.4}}, {"sqrt_kappa", {1.0, 0.0}}};
        m.hamiltonian = "dag(a - alpha*id)*(a - alpha*id)";
        m.couplings = {"sqrt_kappa*(a - alpha*id)"};
    } else if (name == "ex2") {
        m.label = "two-photon-loss";
        m.dim = 30;
        m.params = {{"alpha2", {1.0, 0.0}}};
        m.hamiltonian = "0*id";
        m.couplings = {"a^2 - alpha2*id"};
    } else {
        throw ConfigError("unknown preset '" + std::string(name) + "' (expected ex1 or ex2)");
    }
    return m;
}

ModelFile resolve_model(const std::string& arg) {
    constexpr std::string_view prefix = "preset:";
    if (arg.rfind(prefix, 0) == 0) return preset_model_file(std::string_view(arg).substr(prefix.size()));
    return load_model_file(arg);
}

InitSpec parse_init_spec(std::string_view text) {
    InitSpec s;
    s.text = std::string(text);
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw ParseError("init spec needs a kind prefix", text.size(), {"coherent:", "fock:", "mixed:"});
    }
    const std::string_view kind = text.substr(0, colon);
    const std::string_view rest = text.substr(colon + 1);
    if (kind == "coherent") {
        s.kind = InitSpec::Kind::coherent;
        s.alpha = parse_complex(rest);
    } else if (kind == "fock") {
        s.kind = InitSpec::Kind::fock;
        s.n = parse_int<int>(rest, "Fock level");
    } else if (kind == "mixed") {
        s.kind = InitSpec::Kind::mixed;
        const auto c2 = rest.find(':');
        if (c2 == std::string_view::npos) throw ParseError("mixed spec is mixed:SEED:RANK", text.size(), {":"});
        s.seed = parse_int<std::uint64_t>(rest.substr(0, c2), "seed");
        s.rank = parse_int<int>(rest.substr(c2 + 1), "rank");
    } else {
        throw ParseError("unknown init kind '" + std::string(kind) + "'", 0, {"coherent", "fock", "mixed"});
    }
    return s;
}

DensityOperator make_initial_state(const InitSpec& spec, int dim) {
    switch (spec.kind) {
        case InitSpec::Kind::coherent: return pure_density(coherent_state(spec.alpha, dim));
        case InitSpec::Kind::fock: return pure_density(fock_state(spec.n, dim));
        case InitSpec::Kind::mixed: return random_density(dim, spec.rank, spec.seed);
    }
    throw InvalidArgument("corrupt init spec");
}

}  // namespace qstab
