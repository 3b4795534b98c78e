#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <sstream>

#include "hubopt/analysis.hpp"
#include "hubopt/lp_format.hpp"
#include "hubopt/policy.hpp"
#include "hubopt/robust.hpp"

namespace py = pybind11;
using namespace hubopt;

namespace {

PolicyMode parse_policy(const std::string& s) {
    if (auto m = policy_mode_from_string(s)) return *m;
    throw std::invalid_argument("unknown policy '" + s + "'");
}

PerturbMode parse_mode(const std::string& s) {
    if (s == "scale") return PerturbMode::kScale;
    if (s == "shift") return PerturbMode::kShift;
    throw std::invalid_argument("unknown perturbation mode '" + s + "' (scale or shift)");
}

SweepOptions sweep_options(double dev_fraction, const std::string& equality_mode, double mip_gap) {
    SweepOptions s;
    s.dev_fraction = dev_fraction;
    if (equality_mode == "split") s.equality_mode = EqualityMode::kSplit;
    else if (equality_mode != "cover") throw std::invalid_argument("equality_mode must be cover or split");
    s.solve.mip_gap = mip_gap;
    return s;
}

// Python sees plain dicts; the conversion goes through a JSON string so
// the module needs no json caster.
py::object to_py(const nlohmann::json& j) {
    py::object loads = py::module_::import("json").attr("loads");
    return loads(j.dump());
}

nlohmann::json from_py(const py::object& o) {
    py::object dumps = py::module_::import("json").attr("dumps");
    return nlohmann::json::parse(dumps(o).cast<std::string>());
}

py::object maybe_objective(const milp::Solution& s) {
    if (s.status != milp::SolveStatus::kOptimal) return py::none();
    return py::float_(s.objective);
}

py::dict solution_dict(const milp::Solution& s) {
    py::dict d;
    d["status"] = milp::to_string(s.status);
    d["objective"] = maybe_objective(s);
    d["gap"] = s.gap;
    d["nodes"] = s.stats.nodes;
    d["lp_iterations"] = s.stats.lp_iterations;
    return d;
}

py::dict scenario_result(const HubInstance& inst, PolicyMode mode, const HubModel& hub, const milp::Solution& s) {
    py::dict d = solution_dict(s);
    d["metrics"] = s.has_values() ? to_py(to_json(metrics(inst, hub.vars, s.values, {mode}))) : py::none();
    return d;
}

py::dict solve_instance(const HubInstance& instance, const std::string& policy, std::optional<double> gamma,
                        double dev_fraction, const std::string& equality_mode, double mip_gap) {
    const PolicyMode mode = parse_policy(policy);
    const SweepOptions opts = sweep_options(dev_fraction, equality_mode, mip_gap);
    if (gamma && !(*gamma >= 0.0)) throw std::invalid_argument("gamma must be nonnegative");
    HubInstance inst;
    HubModel hub;
    milp::Solution sol;
    std::optional<AuditResult> audit;
    {
        py::gil_scoped_release release;
        if (!gamma) {
            inst = with_reference_emissions(instance, mode, opts.solve);
            hub = build_deterministic(inst);
            apply_policy(hub, inst, mode, opts.solve);
            sol = milp::solve(hub.model, opts.solve);
        } else {
            RobustSetup setup = prepare_robust(instance, mode, opts, *gamma);
            sol = milp::solve(robustify(setup.hub.model, setup.spec), opts.solve);
            if (sol.has_values()) audit = worst_case_audit(setup.hub.model, setup.spec, sol.values);
            inst = std::move(setup.instance);
            hub = std::move(setup.hub);
        }
    }
    py::dict d = scenario_result(inst, mode, hub, sol);
    if (!gamma) return d;
    d["gamma"] = *gamma;
    d["audit"] = py::none();
    if (audit) {
        py::dict a;
        a["max_violation"] = audit->max_violation;
        a["worst_tag"] = audit->worst_tag;
        a["rows_checked"] = audit->rows_checked;
        a["scenarios"] = audit->scenarios;
        d["audit"] = a;
    }
    return d;
}

py::list sweep(const HubInstance& instance, const std::string& policy, std::vector<double> gammas,
               double dev_fraction, const std::string& equality_mode, double mip_gap) {
    std::sort(gammas.begin(), gammas.end());
    const PolicyMode mode = parse_policy(policy);
    const SweepOptions opts = sweep_options(dev_fraction, equality_mode, mip_gap);
    std::vector<GammaPoint> points;
    {
        py::gil_scoped_release release;
        points = gamma_sweep(instance, mode, gammas, opts);
    }
    py::list out;
    for (const auto& p : points) {
        py::dict d = solution_dict(p.solution);
        d["gamma"] = p.gamma;
        d["metrics"] = p.solution.has_values() ? to_py(to_json(p.report)) : py::none();
        out.append(d);
    }
    return out;
}

AnalysisOptions analysis_options(const std::string& policy, std::optional<double> gamma, int threads) {
    AnalysisOptions o;
    o.policy = parse_policy(policy);
    o.robust_gamma = gamma;
    o.threads = threads;
    return o;
}

py::list oat(const HubInstance& instance, const std::string& path, const std::vector<double>& levels,
             const std::string& mode, const std::string& policy, std::optional<double> gamma, int threads) {
    const PerturbationSpec spec{path, parse_mode(mode), levels};
    const AnalysisOptions opts = analysis_options(policy, gamma, threads);
    check_spec(instance, spec);
    std::vector<OatRow> rows;
    {
        py::gil_scoped_release release;
        rows = oat_sweep(instance, spec, opts);
    }
    py::list out;
    for (const auto& r : rows) {
        py::dict d;
        d["level"] = r.level;
        d["status"] = milp::to_string(r.status);
        d["objective"] = r.status == milp::SolveStatus::kOptimal ? py::object(py::float_(r.objective)) : py::none();
        d["metrics"] = r.status == milp::SolveStatus::kOptimal ? to_py(to_json(r.report)) : py::none();
        if (r.robust_status) {
            d["robust_status"] = milp::to_string(*r.robust_status);
            d["robust_objective"] = *r.robust_status == milp::SolveStatus::kOptimal
                                        ? py::object(py::float_(r.robust_objective))
                                        : py::none();
        }
        out.append(d);
    }
    return out;
}

py::dict run_tornado(const HubInstance& instance, const std::vector<std::string>& params, double low, double high,
                     const std::string& mode, const std::string& policy, int threads) {
    std::vector<PerturbationSpec> specs;
    if (params.empty()) {
        specs = default_tornado_specs();
    } else {
        for (const auto& p : params) specs.push_back({p, parse_mode(mode), {low, high}});
    }
    for (const auto& s : specs) check_spec(instance, s);
    const AnalysisOptions opts = analysis_options(policy, std::nullopt, threads);
    TornadoResult result;
    {
        py::gil_scoped_release release;
        result = tornado(instance, specs, opts);
    }
    py::list rows;
    for (const auto& r : result.rows) {
        py::dict d;
        d["parameter"] = r.parameter;
        d["mode"] = to_string(r.mode);
        d["low_level"] = r.low_level;
        d["high_level"] = r.high_level;
        d["low_delta"] = r.low_delta;
        d["high_delta"] = r.high_delta;
        d["low_status"] = milp::to_string(r.low_status);
        d["high_status"] = milp::to_string(r.high_status);
        d["swing"] = r.swing();
        rows.append(d);
    }
    py::dict out;
    out["baseline_objective"] = result.baseline_objective;
    out["rows"] = rows;
    return out;
}

py::object stress(const HubInstance& instance, const std::string& path, const std::string& mode, double step,
                  double max_level, const std::string& policy) {
    const AnalysisOptions opts = analysis_options(policy, std::nullopt, 1);
    check_spec(instance, {path, parse_mode(mode), {1.0}});
    StressResult r;
    {
        py::gil_scoped_release release;
        r = stress_to_infeasibility(instance, path, parse_mode(mode), step, max_level, opts);
    }
    return to_py(to_json(r));
}

py::object compare(const HubInstance& instance, const std::string& policy, double gamma, double dev_fraction,
                   const std::string& equality_mode, double mip_gap) {
    const PolicyMode mode = parse_policy(policy);
    const SweepOptions opts = sweep_options(dev_fraction, equality_mode, mip_gap);
    Comparison c;
    {
        py::gil_scoped_release release;
        c = compare_det_rob(instance, mode, gamma, opts);
    }
    return to_py(to_json(c));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multi-energy hub planning under carbon policy with budgeted robust counterparts";

    py::register_exception<InstanceError>(m, "InstanceError", PyExc_ValueError);
    py::register_exception<milp::StructureError>(m, "StructureError", PyExc_ValueError);

    py::class_<HubInstance>(m, "Instance")
        .def_static(
            "load", [](const std::string& path) { return load_instance(path); }, py::arg("path"),
            "Read and validate an instance file.")
        .def_static(
            "from_dict", [](const py::object& doc) { return from_json(from_py(doc)); }, py::arg("doc"),
            "Decode an instance document without validating it.")
        .def_static(
            "bundled", [](const std::string& file) { return load_instance(bundled_instance_path(file)); },
            py::arg("file") = "synthetic_on.json")
        .def("to_dict", [](const HubInstance& inst) { return to_py(to_json(inst)); })
        .def("save", [](const HubInstance& inst, const std::string& path) { save_instance(inst, path); },
             py::arg("path"))
        .def("validate",
             [](const HubInstance& inst) {
                 py::list out;
                 for (const auto& v : validate(inst)) out.append(py::make_tuple(v.code, v.message));
                 return out;
             },
             "List of (code, message) pairs; empty when the instance is valid.")
        .def("perturb",
             [](const HubInstance& inst, const std::string& path, double level, const std::string& mode) {
                 return perturb(inst, path, parse_mode(mode), level);
             },
             py::arg("path"), py::arg("level"), py::arg("mode") = "scale")
        .def_property_readonly("years", [](const HubInstance& inst) { return inst.time.years; })
        .def_property_readonly("periods_per_year", [](const HubInstance& inst) { return inst.time.periods_per_year; })
        .def_property_readonly("policy", [](const HubInstance& inst) { return std::string(to_string(inst.policy.mode)); })
        .def("__repr__", [](const HubInstance& inst) {
            std::ostringstream s;
            s << "<Instance years=" << inst.time.years.size() << " periods=" << inst.time.periods_per_year
              << " policy=" << to_string(inst.policy.mode) << ">";
            return s.str();
        });

    py::class_<milp::MilpModel>(m, "Model", "Minimization MILP for the reference solver.")
        .def(py::init<>())
        .def("add_variable",
             [](milp::MilpModel& model, const std::string& name, double lower, double upper) {
                 return model.add_variable(name, lower, upper);
             },
             py::arg("name"), py::arg("lower") = 0.0, py::arg("upper") = milp::kInf)
        .def("add_binary", [](milp::MilpModel& model, const std::string& name) { return model.add_binary(name); },
             py::arg("name"))
        .def("add_constraint",
             [](milp::MilpModel& model, const std::vector<std::pair<milp::VarId, double>>& terms,
                const std::string& sense, double rhs, const std::string& name) {
                 milp::Sense s;
                 if (sense == "<=") s = milp::Sense::kLe;
                 else if (sense == ">=") s = milp::Sense::kGe;
                 else if (sense == "=" || sense == "==") s = milp::Sense::kEq;
                 else throw std::invalid_argument("sense must be <=, >= or =");
                 std::vector<milp::Term> t;
                 for (const auto& [v, c] : terms) t.push_back({v, c});
                 return model.add_constraint(name, std::move(t), s, rhs);
             },
             py::arg("terms"), py::arg("sense"), py::arg("rhs"), py::arg("name") = "")
        .def("set_objective",
             [](milp::MilpModel& model, const std::vector<std::pair<milp::VarId, double>>& terms, double constant) {
                 milp::LinearExpr e;
                 for (const auto& [v, c] : terms) e.add(v, c);
                 e.constant = constant;
                 model.set_objective(std::move(e));
             },
             py::arg("terms"), py::arg("constant") = 0.0)
        .def_property_readonly("num_variables", &milp::MilpModel::num_variables)
        .def_property_readonly("num_constraints", &milp::MilpModel::num_constraints)
        .def("to_lp", [](const milp::MilpModel& model) {
            return to_lp_string(model);
        })
        .def("solve",
             [](const milp::MilpModel& model, double mip_gap) {
                 model.validate_structure();
                 milp::SolveOptions o;
                 o.mip_gap = mip_gap;
                 milp::Solution sol;
                 {
                     py::gil_scoped_release release;
                     sol = milp::solve(model, o);
                 }
                 py::dict d = solution_dict(sol);
                 d["values"] = sol.values;
                 return d;
             },
             py::arg("mip_gap") = 1e-6);

    m.def("data_dir", [] { return data_dir(); });
    m.def("bundled_instance_path", &bundled_instance_path, py::arg("file") = "synthetic_on.json");

    m.def("solve", &solve_instance, py::arg("instance"), py::arg("policy") = "carbon_tax",
          py::arg("gamma") = py::none(), py::arg("dev_fraction") = 0.30, py::arg("equality_mode") = "cover",
          py::arg("mip_gap") = 1e-6,
          "Deterministic solve, or the robust counterpart when gamma is given (with its worst-case audit).");
    m.def("gamma_sweep", &sweep, py::arg("instance"), py::arg("policy") = "carbon_tax",
          py::arg("gammas") = std::vector<double>{0, 1, 2, 4, 8, 16}, py::arg("dev_fraction") = 0.30,
          py::arg("equality_mode") = "cover", py::arg("mip_gap") = 1e-6);
    m.def("compare", &compare, py::arg("instance"), py::arg("policy") = "carbon_tax", py::arg("gamma") = 1.0,
          py::arg("dev_fraction") = 0.30, py::arg("equality_mode") = "cover", py::arg("mip_gap") = 1e-6);
    m.def("oat", &oat, py::arg("instance"), py::arg("path"), py::arg("levels"), py::arg("mode") = "scale",
          py::arg("policy") = "carbon_tax", py::arg("gamma") = py::none(), py::arg("threads") = 1);
    m.def("tornado", &run_tornado, py::arg("instance"), py::arg("params") = std::vector<std::string>{},
          py::arg("low") = 0.7, py::arg("high") = 1.3, py::arg("mode") = "scale", py::arg("policy") = "carbon_tax",
          py::arg("threads") = 1, "Ranked swings; an empty parameter list uses the default set.");
    m.def("stress", &stress, py::arg("instance"), py::arg("path"), py::arg("mode") = "scale", py::arg("step") = 0.1,
          py::arg("max_level") = 3.0, py::arg("policy") = "carbon_tax");
}
