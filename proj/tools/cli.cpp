#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "hubopt/analysis.hpp"
#include "hubopt/lp_format.hpp"
#include "hubopt/policy.hpp"
#include "hubopt/report.hpp"
#include "hubopt/robust.hpp"

namespace hubopt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    std::string instance_path;
    std::string policy;
    double gamma = 1.0;
    std::vector<double> gammas{0, 1, 2, 4, 8, 16};
    std::optional<double> dev_fraction;
    std::string out_dir = ".";
    double mip_gap = 1e-6;
    unsigned seed = 0;
    std::vector<double> weights;
    std::string equality_mode = "cover";
    // sensitivity and stress
    std::vector<std::string> params;
    std::vector<double> levels;
    std::string mode = "scale";
    bool tornado = false;
    bool robust_column = false;
    int threads = 1;
    double step = 0.1;
    double max_level = 3.0;
};

struct Context {
    const RunConfig& cfg;
    std::ostream& out;
    std::ostream& err;
    HubInstance instance;
    PolicyMode policy = PolicyMode::kNone;
    milp::SolveOptions solve;

    SweepOptions sweep() const {
        SweepOptions s;
        s.dev_fraction = cfg.dev_fraction.value_or(instance.robust.dev_fraction);
        s.equality_mode = cfg.equality_mode == "split" ? EqualityMode::kSplit : EqualityMode::kCover;
        s.solve = solve;
        return s;
    }

    fs::path artifact(const std::string& name) const { return fs::path(cfg.out_dir) / name; }

    void write(const std::string& name, const std::string& text) const {
        const fs::path p = artifact(name);
        std::ofstream f(p, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + p.string());
        f << text;
        out << "wrote " << p.string() << '\n';
    }

    void write_json(const std::string& name, const json& doc) const { write(name, doc.dump(2) + "\n"); }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string resolve_instance(const std::string& given) {
    if (given.empty()) return bundled_instance_path();
    if (fs::exists(given)) return given;
    const fs::path p(given);
    if (!p.has_parent_path() && fs::exists(bundled_instance_path(given))) return bundled_instance_path(given);
    return given;
}

PolicyMode parse_policy(const std::string& s, const HubInstance& inst) {
    if (s.empty()) return inst.policy.mode;
    const auto m = policy_mode_from_string(s);
    if (!m) throw ConfigError("unknown policy '" + s + "' (carbon-tax, net-zero or none)");
    return *m;
}

PerturbMode parse_mode(const std::string& s) {
    if (s == "scale") return PerturbMode::kScale;
    if (s == "shift") return PerturbMode::kShift;
    throw ConfigError("unknown perturbation mode '" + s + "' (scale or shift)");
}

std::string solution_csv(const MilpModel& model, const milp::Solution& sol) {
    std::ostringstream s;
    s << "variable,value\n";
    for (size_t j = 0; j < model.num_variables(); ++j) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "%.12g", sol.values[j] == 0.0 ? 0.0 : sol.values[j]);
        s << model.variable(static_cast<VarId>(j)).name << ',' << buf << '\n';
    }
    return s.str();
}

json solver_json(const milp::Solution& sol) {
    json j = {{"backend", milp::make_solver()->name()},
              {"status", milp::to_string(sol.status)},
              {"nodes", sol.stats.nodes},
              {"lp_iterations", sol.stats.lp_iterations},
              {"lp_solves", sol.stats.lp_solves}};
    j["gap"] = std::isfinite(sol.gap) ? json(sol.gap) : json(nullptr);
    return j;
}

json config_json(const Context& c) {
    return {{"instance", c.instance.name},
            {"policy", to_string(c.policy)},
            {"mip_gap", c.solve.mip_gap},
            {"seed", c.cfg.seed},
            {"dev_fraction", c.sweep().dev_fraction}};
}

void log_solution(const Context& c, const milp::Solution& sol) {
    c.out << "status: " << milp::to_string(sol.status) << '\n';
    if (sol.has_values()) c.out << "objective_usd: " << fmt(sol.objective) << '\n';
    c.out << "nodes: " << sol.stats.nodes << ", lp iterations: " << sol.stats.lp_iterations << '\n';
}

int finish_solve(const Context& c, const MilpModel& model, const VarCatalog& vars, const HubInstance& inst,
                 const milp::Solution& sol, json report) {
    log_solution(c, sol);
    report["solver"] = solver_json(sol);
    report["objective_usd"] = sol.has_values() ? json(sol.objective) : json(nullptr);
    if (sol.has_values()) {
        report["metrics"] = to_json(metrics(inst, vars, sol.values, {c.policy}));
        c.write("solution.csv", solution_csv(model, sol));
    }
    c.write_json("report.json", report);
    if (sol.status != milp::SolveStatus::kOptimal) {
        c.err << "error: model is " << milp::to_string(sol.status) << '\n';
        return kInfeasible;
    }
    return kOk;
}

int cmd_solve(Context& c) {
    const HubInstance inst = with_reference_emissions(c.instance, c.policy, c.solve);
    HubModel hub;
    json report = {{"command", "solve"}, {"config", config_json(c)}};
    if (!c.cfg.weights.empty()) {
        if (c.cfg.weights.size() != 2) throw ConfigError("--weights expects w_cost,w_emis");
        hub = build_weighted(inst, c.cfg.weights[0], c.cfg.weights[1]);
        // The carbon price is a cost, so it carries the cost weight.
        if (c.policy == PolicyMode::kCarbonTax) {
            CarbonSchedule sched = carbon_schedule(inst);
            for (double& r : sched.rate_per_t) r *= c.cfg.weights[0];
            apply_carbon_tax(hub, inst, sched);
        } else {
            apply_policy(hub, inst, c.policy, c.solve);
        }
        report["config"]["weights"] = c.cfg.weights;
    } else {
        hub = build_deterministic(inst);
        apply_policy(hub, inst, c.policy, c.solve);
    }
    const milp::Solution sol = milp::solve(hub.model, c.solve);
    return finish_solve(c, hub.model, hub.vars, inst, sol, report);
}

int cmd_robust(Context& c) {
    const SweepOptions opts = c.sweep();
    const RobustSetup setup = prepare_robust(c.instance, c.policy, opts, c.cfg.gamma);
    const MilpModel model = robustify(setup.hub.model, setup.spec);
    const milp::Solution sol = milp::solve(model, c.solve);
    json report = {{"command", "robust"}, {"config", config_json(c)}, {"gamma", c.cfg.gamma},
                   {"equality_mode", c.cfg.equality_mode}};
    if (setup.instance.policy.nz_base_emissions_t && c.policy == PolicyMode::kNetZero)
        report["nz_reference_emissions_t"] = *setup.instance.policy.nz_base_emissions_t;
    if (sol.has_values() && setup.spec.max_group_size() <= 20) {
        const AuditResult a = worst_case_audit(setup.hub.model, setup.spec, sol.values);
        report["audit"] = {{"max_violation", a.max_violation},
                           {"worst_tag", a.worst_tag},
                           {"rows_checked", a.rows_checked},
                           {"scenarios", a.scenarios}};
        c.out << "worst-case violation: " << fmt(a.max_violation) << '\n';
    }
    return finish_solve(c, model, setup.hub.vars, setup.instance, sol, report);
}

int cmd_sweep_gamma(Context& c) {
    std::vector<double> gammas = c.cfg.gammas;
    for (double g : gammas)
        if (!(g >= 0.0) || !std::isfinite(g)) throw ConfigError("budgets must be finite and >= 0");
    std::sort(gammas.begin(), gammas.end());
    const auto points = gamma_sweep(c.instance, c.policy, gammas, c.sweep());
    std::ostringstream csv;
    write_gamma_csv(points, csv);
    for (const auto& p : points)
        c.out << "gamma " << fmt(p.gamma) << ": " << milp::to_string(p.solution.status)
              << (p.solution.has_values() ? ", objective_usd " + fmt(p.solution.objective) : std::string()) << '\n';
    c.write("gamma_sweep.csv", csv.str());
    return kOk;
}

AnalysisOptions analysis_options(const Context& c) {
    AnalysisOptions o;
    o.policy = c.policy;
    o.robust = c.sweep();
    o.threads = c.cfg.threads;
    if (c.cfg.robust_column) o.robust_gamma = c.cfg.gamma;
    return o;
}

int cmd_sensitivity(Context& c) {
    const PerturbMode mode = parse_mode(c.cfg.mode);
    const AnalysisOptions opts = analysis_options(c);
    if (c.cfg.tornado || c.cfg.params.size() != 1) {
        std::vector<PerturbationSpec> specs;
        const std::vector<double> levels =
            c.cfg.levels.empty() ? std::vector<double>{mode == PerturbMode::kScale ? 0.7 : -1.0,
                                                       mode == PerturbMode::kScale ? 1.3 : 1.0}
                                 : c.cfg.levels;
        if (c.cfg.params.empty()) {
            specs = default_tornado_specs();
            if (!c.cfg.levels.empty())
                for (auto& s : specs) s.levels = levels;
        } else {
            for (const auto& p : c.cfg.params) specs.push_back({p, mode, levels});
        }
        const TornadoResult t = tornado(c.instance, specs, opts);
        std::ostringstream csv;
        write_tornado_csv(t, csv);
        c.out << "baseline objective_usd: " << fmt(t.baseline_objective) << '\n';
        for (const auto& r : t.rows) c.out << "  " << r.parameter << ": swing " << fmt(r.swing()) << '\n';
        c.write("tornado.csv", csv.str());
        return kOk;
    }
    PerturbationSpec spec{c.cfg.params.front(), mode, c.cfg.levels};
    if (spec.levels.empty()) {
        if (mode == PerturbMode::kShift) throw ConfigError("--levels is required with --mode shift");
        spec.levels = {0.7, 0.85, 1.0, 1.15, 1.3};
    }
    const auto rows = oat_sweep(c.instance, spec, opts);
    std::ostringstream csv;
    write_oat_csv(rows, csv);
    for (const auto& r : rows)
        c.out << "level " << fmt(r.level) << ": " << milp::to_string(r.status) << '\n';
    c.write("oat.csv", csv.str());
    return kOk;
}

int cmd_stress(Context& c) {
    if (c.cfg.params.size() != 1) throw ConfigError("stress needs exactly one --param");
    const PerturbMode mode = parse_mode(c.cfg.mode);
    const StressResult s =
        stress_to_infeasibility(c.instance, c.cfg.params.front(), mode, c.cfg.step, c.cfg.max_level, analysis_options(c));
    json doc = to_json(s);
    doc["parameter"] = c.cfg.params.front();
    doc["mode"] = to_string(mode);
    doc["step"] = c.cfg.step;
    doc["max_level"] = c.cfg.max_level;
    doc["config"] = config_json(c);
    if (s.infeasible) {
        c.out << "infeasible at level " << fmt(s.level) << "; relaxed rows:";
        for (const auto& t : s.violated_tags) c.out << ' ' << t;
        c.out << '\n';
    } else {
        c.out << "feasible up to level " << fmt(s.level) << '\n';
    }
    c.write_json("stress.json", doc);
    return kOk;
}

int cmd_compare(Context& c) {
    const Comparison cmp = compare_det_rob(c.instance, c.policy, c.cfg.gamma, c.sweep());
    json doc = to_json(cmp);
    doc["config"] = config_json(c);
    std::ostringstream csv;
    write_compare_csv(cmp, csv);
    c.out << "deterministic: " << milp::to_string(cmp.det_status) << ", robust: " << milp::to_string(cmp.rob_status)
          << '\n';
    if (std::isfinite(cmp.premium)) c.out << "premium: " << fmt(100.0 * cmp.premium) << "%\n";
    c.write_json("compare.json", doc);
    c.write("compare.csv", csv.str());
    if (cmp.det_status != milp::SolveStatus::kOptimal || cmp.rob_status != milp::SolveStatus::kOptimal) {
        c.err << "error: a comparison solve is not optimal\n";
        return kInfeasible;
    }
    return kOk;
}

int cmd_export_lp(Context& c) {
    MilpModel model;
    if (c.cfg.robust_column) {
        const RobustSetup setup = prepare_robust(c.instance, c.policy, c.sweep(), c.cfg.gamma);
        model = robustify(setup.hub.model, setup.spec);
    } else {
        HubModel hub = build_deterministic(c.instance);
        apply_policy(hub, c.instance, c.policy, c.solve);
        model = std::move(hub.model);
    }
    c.write("model.lp", milp::to_lp_string(model));
    return kOk;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
    const std::string path = resolve_instance(cfg.instance_path);
    std::ifstream in(path);
    if (!in) throw InstanceError("cannot open instance file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const json doc = [&] {
        try {
            return json::parse(ss.str());
        } catch (const json::parse_error& e) {
            throw InstanceError(std::string("parse error: ") + e.what());
        }
    }();
    const HubInstance inst = from_json(doc);
    const auto v = validate(inst);
    out << v.size() << " violations\n";
    for (const auto& x : v) out << "  " << x.code << ": " << x.message << '\n';
    return v.empty() ? kOk : kConfigError;
}

void add_common(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--instance", cfg.instance_path, "Instance JSON (default: bundled synthetic_on.json)");
    sub->add_option("--policy", cfg.policy, "carbon-tax, net-zero or none (default: the instance's mode)");
    sub->add_option("--dev-fraction", cfg.dev_fraction, "Relative deviation of uncertain data (default 0.30)");
    sub->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--mip-gap", cfg.mip_gap, "Relative MIP gap")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "Seed recorded with the artifacts")->capture_default_str();
    sub->add_option("--equality-mode", cfg.equality_mode, "Protected equalities: cover or split")
        ->check(CLI::IsMember({"cover", "split"}))
        ->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Multi-energy hub planning with carbon policy and budgeted robustness", "hubopt"};
    app.require_subcommand(1);

    auto* solve = app.add_subcommand("solve", "Deterministic solve");
    auto* robust = app.add_subcommand("robust", "Robust solve at one budget");
    auto* sweep = app.add_subcommand("sweep-gamma", "Robust solves over a list of budgets");
    auto* sens = app.add_subcommand("sensitivity", "One-at-a-time sweep or tornado");
    auto* stress = app.add_subcommand("stress", "Escalate a perturbation until the model turns infeasible");
    auto* compare = app.add_subcommand("compare", "Deterministic against robust under one policy");
    auto* valid = app.add_subcommand("validate", "Check an instance file");
    auto* lp = app.add_subcommand("export-lp", "Write the model in LP format");
    for (auto* s : {solve, robust, sweep, sens, stress, compare, valid, lp}) add_common(s, cfg);

    solve->add_option("--weights", cfg.weights, "w_cost,w_emis")->delimiter(',')->expected(2);
    for (auto* s : {robust, compare})
        s->add_option("--gamma", cfg.gamma, "Uncertainty budget")->capture_default_str();
    for (auto* s : {sens, stress, lp}) {
        s->add_option("--gamma", cfg.gamma, "Uncertainty budget for the robust model")
            ->each([&](const std::string&) { cfg.robust_column = true; });
    }
    sweep->add_option("--gammas", cfg.gammas, "Comma-separated budgets")->delimiter(',');
    sens->add_option("--param", cfg.params, "Parameter path (repeat for a tornado)");
    sens->add_option("--levels", cfg.levels, "Comma-separated levels")->delimiter(',');
    sens->add_option("--mode", cfg.mode, "scale or shift")->capture_default_str();
    sens->add_flag("--tornado", cfg.tornado, "Rank parameters by objective swing");
    sens->add_option("--threads", cfg.threads, "Worker threads")->capture_default_str();
    stress->add_option("--param", cfg.params, "Parameter path")->required();
    stress->add_option("--mode", cfg.mode, "scale or shift")->capture_default_str();
    stress->add_option("--step", cfg.step, "Escalation step")->capture_default_str();
    stress->add_option("--max-level", cfg.max_level, "Last level tried")->capture_default_str();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
    cfg.command = app.get_subcommands().front()->get_name();

    try {
        if (cfg.command == "validate") return cmd_validate(cfg, out);
        if (cfg.gamma < 0.0 || !std::isfinite(cfg.gamma)) throw ConfigError("--gamma must be finite and >= 0");
        if (cfg.mip_gap < 0.0) throw ConfigError("--mip-gap must be >= 0");
        std::error_code ec;
        fs::create_directories(cfg.out_dir, ec);
        if (ec || !fs::is_directory(cfg.out_dir)) throw ConfigError("cannot create output directory " + cfg.out_dir);

        Context c{cfg, out, err, load_instance(resolve_instance(cfg.instance_path)), PolicyMode::kNone, {}};
        c.policy = parse_policy(cfg.policy, c.instance);
        c.solve.mip_gap = cfg.mip_gap;
        if (cfg.dev_fraction && !(*cfg.dev_fraction >= 0.0 && *cfg.dev_fraction <= 1.0))
            throw ConfigError("--dev-fraction must lie in [0,1]");
        milp::make_solver();  // rejects an unknown HUBOPT_SOLVER before any work

        if (cfg.command == "solve") return cmd_solve(c);
        if (cfg.command == "robust") return cmd_robust(c);
        if (cfg.command == "sweep-gamma") return cmd_sweep_gamma(c);
        if (cfg.command == "sensitivity") return cmd_sensitivity(c);
        if (cfg.command == "stress") return cmd_stress(c);
        if (cfg.command == "compare") return cmd_compare(c);
        if (cfg.command == "export-lp") return cmd_export_lp(c);
        throw ConfigError("unknown command " + cfg.command);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const InstanceError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        // AnalysisError, RobustError, PolicyError and bad solver names.
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
}

}  // namespace hubopt::cli
