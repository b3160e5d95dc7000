#include "qstab/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qstab/dynamics.hpp"
#include "qstab/error.hpp"
#include "qstab/expr.hpp"
#include "qstab/io.hpp"
#include "qstab/steady.hpp"

namespace qstab::cli {

namespace {

namespace fs = std::filesystem;

void report_error(std::ostream& err, const std::string& code, const std::string& message) {
    err << nlohmann::json{{"code", code}, {"message", message}}.dump() << '\n';
}

Operator sum_ldag_l(const SystemModel& model) {
    Operator v = Operator::Zero(model.dim(), model.dim());
    for (const auto& l : model.couplings()) v += l.adjoint() * l;
    return 0.5 * (v + v.adjoint());
}

int rank_of(Classification c) { return static_cast<int>(c); }

struct SimulateArgs {
    std::string model;
    double t_final = 1.0;
    double dt = 1e-3;
    std::string init = "fock:0";
    std::vector<std::string> observe;
    std::string out;
    bool states = false;
    std::string method = "rk4";
    std::size_t max_states = 500;
};

int do_simulate(const SimulateArgs& a, std::ostream& out) {
    const ModelFile file = resolve_model(a.model);
    const SystemModel model = build_model(file);
    IntegratorConfig cfg;
    cfg.t_final = a.t_final;
    cfg.dt = a.dt;
    cfg.max_stored_states = a.max_states;
    if (a.method == "rk4") cfg.method = IntegrationMethod::rk4;
    else if (a.method == "exponential") cfg.method = IntegrationMethod::exponential;
    else throw ConfigError("unknown method '" + a.method + "' (expected rk4 or exponential)");

    std::vector<ObservableSpec> obs;
    const std::vector<std::string> labels = a.observe.empty() ? std::vector<std::string>{"a"} : a.observe;
    for (const auto& text : labels) {
        obs.push_back({text, evaluate(parse_expr(text, &file.params), model.dim(), file.params)});
    }
    const DensityOperator rho0 = make_initial_state(parse_init_spec(a.init), model.dim());
    const Trajectory traj = evolve_density(model, rho0, cfg, obs);
    io::write_trajectory_csv(a.out, traj);
    if (a.states) io::write_text(a.out + ".states.json", io::states_json(traj));
    for (const auto& w : traj.warnings) out << "warning: " << w << '\n';
    out << "wrote " << a.out << " (" << traj.times.size() << " rows)\n";
    return kExitOk;
}

int do_steady(const std::string& model_arg, const std::string& out_path, std::ostream& out) {
    const SystemModel model = build_model(resolve_model(model_arg));
    const InvariantSet set = invariant_set(model);
    io::write_text(out_path, io::steady_json(set));
    out << "kernel dimension " << set.fixed_points.dimension() << ", dark subspace dimension " << set.k << '\n';
    return kExitOk;
}

CertifyConfig certify_config(std::uint64_t seed, std::size_t samples, std::size_t kappa_samples) {
    CertifyConfig cfg;
    cfg.sampler.seed = seed;
    cfg.sampler.samples = samples;
    cfg.kappa_samples = kappa_samples;
    cfg.compute_kappa = kappa_samples > 0;
    return cfg;
}

void print_report_summary(const StabilityReport& rep, std::ostream& out) {
    out << "classification " << to_string(rep.classification);
    if (rep.exponential) out << " (gamma " << format_double(rep.exponential->gamma) << ")";
    out << ", V: " << rep.provenance << ", falsifiers " << rep.falsifier_count << '\n';
}

struct CertifyArgs {
    std::string model;
    std::string lyapunov = "auto";
    std::string out;
    std::size_t samples = 2000;
    std::size_t kappa_samples = 1000;
    std::optional<std::uint64_t> seed;
};

int do_certify(const CertifyArgs& a, std::ostream& out) {
    const ModelFile file = resolve_model(a.model);
    const SystemModel model = build_model(file);
    const InvariantSet set = invariant_set(model);
    const std::uint64_t seed = a.seed.value_or(seed_override().value_or(CertifyConfig{}.sampler.seed));
    const CandidateChoice choice =
        certify_model(model, file, a.lyapunov, set, certify_config(seed, a.samples, a.kappa_samples));
    io::write_text(a.out, io::report_json(choice.report, model.label()));
    print_report_summary(choice.report, out);
    return kExitOk;
}

int do_distance(const std::string& model_arg, const std::string& state, std::ostream& out) {
    const SystemModel model = build_model(resolve_model(model_arg));
    const InvariantSet set = invariant_set(model);
    const DensityOperator rho = make_initial_state(parse_init_spec(state), model.dim());
    const double d = distance_to_set(rho, set);
    std::ostringstream s;
    s << std::fixed << std::setprecision(12) << d;
    out << s.str() << '\n';
    return kExitOk;
}

std::string init_for(const ExamplePreset& p, const std::string& spec) {
    if (spec.rfind("mixed:", 0) != 0) return spec;
    // mixed:RANK in the preset table; the seed comes from the preset.
    return "mixed:" + std::to_string(p.seed) + ":" + spec.substr(6);
}

int do_example(const std::string& name, const std::string& outdir, std::ostream& out) {
    const ExamplePreset preset = example_preset(name);
    const ModelFile file = preset_model_file(name);
    const SystemModel model = build_model(file);
    fs::create_directories(outdir);
    const fs::path dir(outdir);
    io::write_text((dir / "model.json").string(), model_to_json(file));

    const InvariantSet set = invariant_set(model);
    io::write_text((dir / "steady.json").string(), io::steady_json(set));

    const CandidateChoice choice = certify_model(model, file, "auto", set, certify_config(preset.seed, 2000, 1000));
    io::write_text((dir / "report.json").string(), io::report_json(choice.report, model.label()));

    std::vector<DensityOperator> inits;
    std::vector<std::string> init_texts;
    for (const auto& spec : preset.initial_states) {
        init_texts.push_back(init_for(preset, spec));
        inits.push_back(make_initial_state(parse_init_spec(init_texts.back()), model.dim()));
    }
    IntegratorConfig cfg;
    cfg.t_final = preset.t_final;
    cfg.dt = preset.dt;
    const std::vector<ObservableSpec> obs{{"a", annihilation_op(model.dim())}, {"V", choice.candidate.op()}};
    const std::vector<Trajectory> trajs = evolve_batch(model, inits, cfg, obs);

    std::vector<io::Series> phase, decay;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        const Trajectory& t = trajs[i];
        io::write_trajectory_csv((dir / ("traj_" + std::to_string(i + 1) + ".csv")).string(), t);
        io::Series p{init_texts[i], {}, {}};
        io::Series v{init_texts[i], t.times, {}};
        for (const cplx z : t.observable("a")) {
            p.x.push_back(z.real());
            p.y.push_back(z.imag());
        }
        for (const cplx z : t.observable("V")) v.y.push_back(z.real());
        phase.push_back(std::move(p));
        decay.push_back(std::move(v));
    }
    io::write_text((dir / "phase.svg").string(),
                   io::svg_line_plot({model.label() + ": <a> in phase space", "Re <a>", "Im <a>", false, true}, phase));
    io::write_text((dir / "lyapunov.svg").string(),
                   io::svg_line_plot({model.label() + ": Lyapunov decay", "t", "tr(V rho_t)", true, false}, decay));

    out << "kernel dimension " << set.fixed_points.dimension() << ", dark subspace dimension " << set.k << '\n';
    print_report_summary(choice.report, out);
    out << "wrote " << trajs.size() << " trajectories to " << outdir << '\n';
    return kExitOk;
}

}  // namespace

std::optional<std::uint64_t> seed_override() {
    const char* env = std::getenv("QSTAB_SEED");
    if (!env || !*env) return std::nullopt;
    std::uint64_t seed = 0;
    const std::string_view s(env);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError("QSTAB_SEED must be a non-negative integer");
    }
    return seed;
}

ExamplePreset example_preset(const std::string& name) {
    ExamplePreset p;
    p.name = name;
    if (name == "ex1") {
        p.initial_states = {"coherent:-1+0i", "coherent:0+1.5i", "fock:3", "mixed:40"};
        p.t_final = 6.0;
        p.dt = 2e-3;
        p.seed = 1001;
    } else if (name == "ex2") {
        p.initial_states = {"fock:0", "coherent:0.5+0i", "fock:4", "coherent:0+1i"};
        p.t_final = 10.0;
        p.dt = 2e-3;
        p.seed = 2002;
    } else {
        throw ConfigError("unknown example '" + name + "' (expected ex1 or ex2)");
    }
    if (const auto s = seed_override()) p.seed = *s;
    return p;
}

CandidateChoice certify_model(const SystemModel& model, const ModelFile& file, const std::string& lyapunov,
                              const InvariantSet& set, const CertifyConfig& cfg) {
    if (lyapunov != "auto") {
        LyapunovCandidate v(evaluate(parse_expr(lyapunov, &file.params), model.dim(), file.params), "user-supplied");
        StabilityReport rep = classify(model, v, set, cfg);
        return {std::move(v), std::move(rep)};
    }
    std::optional<CandidateChoice> best;
    const std::pair<Operator, const char*> candidates[] = {{sum_ldag_l(model), "default L^dag L"},
                                                           {model.hamiltonian(), "default H"}};
    for (const auto& [op, provenance] : candidates) {
        LyapunovCandidate v(op, provenance);
        StabilityReport rep = classify(model, v, set, cfg);
        if (!best || rank_of(rep.classification) > rank_of(best->report.classification)) {
            best = CandidateChoice{std::move(v), std::move(rep)};
        }
        if (best->report.classification != Classification::inconclusive) break;
    }
    return std::move(*best);
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stability analysis of invariant sets of Lindblad dynamics", "qstab"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Integrate the master equation and write a CSV trajectory");
    simulate->add_option("--model", sim.model, "Model JSON file or preset:ex1|preset:ex2")->required();
    simulate->add_option("--t-final", sim.t_final, "Final time")->required();
    simulate->add_option("--dt", sim.dt, "Step size")->required();
    simulate->add_option("--init", sim.init, "coherent:RE+IMi | fock:n | mixed:SEED:RANK")->required();
    simulate->add_option("--observe", sim.observe, "Operator expressions to record")->expected(1, -1);
    simulate->add_option("--out", sim.out, "Output CSV")->required();
    simulate->add_flag("--states", sim.states, "Also write stored density matrices to OUT.states.json");
    simulate->add_option("--method", sim.method, "rk4 or exponential");
    simulate->add_option("--max-states", sim.max_states, "Maximum number of stored states");

    std::string steady_model, steady_out;
    auto* steady = app.add_subcommand("steady", "Fixed points and dark subspace");
    steady->add_option("--model", steady_model, "Model JSON file or preset")->required();
    steady->add_option("--out", steady_out, "Output JSON")->required();

    CertifyArgs cert;
    std::uint64_t cert_seed = 0;
    auto* certify = app.add_subcommand("certify", "Check a Lyapunov candidate and classify stability");
    certify->add_option("--model", cert.model, "Model JSON file or preset")->required();
    certify->add_option("--lyapunov", cert.lyapunov, "Operator expression or auto");
    certify->add_option("--out", cert.out, "Output JSON report")->required();
    certify->add_option("--samples", cert.samples, "Sampler size");
    certify->add_option("--kappa-samples", cert.kappa_samples, "Samples for the quadratic-growth constant (0 skips)");
    auto* seed_opt = certify->add_option("--seed", cert_seed, "Sampler seed");

    std::string dist_model, dist_state;
    auto* distance = app.add_subcommand("distance", "Trace distance from a state to the invariant set");
    distance->add_option("--model", dist_model, "Model JSON file or preset")->required();
    distance->add_option("--state", dist_state, "coherent:RE+IMi | fock:n | mixed:SEED:RANK")->required();

    std::string ex_name, ex_outdir;
    auto* example = app.add_subcommand("example", "Run a preset end to end");
    example->add_option("--name", ex_name, "ex1 or ex2")->required()->check(CLI::IsMember({"ex1", "ex2"}));
    example->add_option("--outdir", ex_outdir, "Output directory")->required();

    std::vector<std::string> storage{"qstab"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        report_error(err, "usage_error", e.what());
        return kExitUsage;
    }

    try {
        if (*simulate) return do_simulate(sim, out);
        if (*steady) return do_steady(steady_model, steady_out, out);
        if (*certify) {
            if (*seed_opt) cert.seed = cert_seed;
            return do_certify(cert, out);
        }
        if (*distance) return do_distance(dist_model, dist_state, out);
        if (*example) return do_example(ex_name, ex_outdir, out);
    } catch (const NumericalContractError& e) {
        report_error(err, e.kind(), e.what());
        return kExitNumerical;
    } catch (const Error& e) {
        report_error(err, e.kind(), e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        report_error(err, "error", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace qstab::cli
