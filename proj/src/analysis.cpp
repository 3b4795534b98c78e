#include "hubopt/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <thread>

#include "hubopt/policy.hpp"

namespace hubopt {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kSlackTol = 1e-6;

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    size_t start = 0;
    while (start <= path.size()) {
        const size_t dot = path.find('.', start);
        const size_t end = dot == std::string::npos ? path.size() : dot;
        parts.push_back(path.substr(start, end - start));
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return parts;
}

bool is_index(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

json* resolve(json& doc, const std::string& path) {
    if (path.empty()) throw AnalysisError("empty parameter path");
    json* node = &doc;
    for (const std::string& key : split_path(path)) {
        if (key.empty()) throw AnalysisError("malformed parameter path \"" + path + "\"");
        if (node->is_object()) {
            auto it = node->find(key);
            if (it == node->end()) throw AnalysisError("parameter path \"" + path + "\": no field \"" + key + "\"");
            node = &*it;
        } else if (node->is_array()) {
            json* hit = nullptr;
            if (is_index(key)) {
                const size_t i = std::stoul(key);
                if (i < node->size()) hit = &(*node)[i];
            } else {
                for (auto& el : *node)
                    for (const char* id : {"name", "kind", "carrier"})
                        if (!hit && el.is_object() && el.contains(id) && el[id] == key) hit = &el;
            }
            if (!hit) throw AnalysisError("parameter path \"" + path + "\": no element \"" + key + "\"");
            node = hit;
        } else {
            throw AnalysisError("parameter path \"" + path + "\": \"" + key + "\" is below a plain value");
        }
    }
    return node;
}

size_t apply(json& node, PerturbMode mode, double level) {
    if (node.is_number()) {
        const double v = node.get<double>();
        node = mode == PerturbMode::kScale ? v * level : v + level;
        return 1;
    }
    size_t n = 0;
    if (node.is_array() || node.is_object())
        for (auto& child : node) n += apply(child, mode, level);
    return n;
}

std::vector<std::string> expand_alias(const std::string& path, PerturbMode mode) {
    if (path == "demands.total")
        return {"demands.electricity_MWh", "demands.heat_MWh", "demands.cooling_MWh", "demands.ev_MWh",
                "demands.hv_MWh"};
    if (path == "policy.carbon_price") {
        if (mode == PerturbMode::kScale)
            return {"policy.tax_base_per_t", "policy.tax_escalation_per_t_per_year", "policy.tax_cap_per_t"};
        return {"policy.tax_base_per_t", "policy.tax_cap_per_t"};
    }
    return {path};
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index writes
// its own slot, so the result does not depend on scheduling. The first
// exception by index is rethrown.
template <class Fn>
void for_each_index(size_t n, int threads, Fn fn) {
    const size_t workers = std::min<size_t>(n, static_cast<size_t>(std::max(1, threads)));
    std::vector<std::exception_ptr> errors(n);
    auto run = [&](size_t i) {
        try {
            fn(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) run(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (size_t i = next++; i < n; i = next++) run(i);
            });
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct Solved {
    milp::Solution solution;
    ScenarioReport report;
};

Solved solve_deterministic(const HubInstance& inst, PolicyMode mode, const milp::SolveOptions& opts) {
    HubModel hub = build_deterministic(inst);
    apply_policy(hub, inst, mode, opts);
    Solved s;
    s.solution = milp::solve(hub.model, opts);
    if (s.solution.has_values()) s.report = metrics(inst, hub.vars, s.solution.values, {mode});
    return s;
}

Solved solve_robust(const HubInstance& inst, PolicyMode mode, double gamma, const SweepOptions& opts) {
    const RobustSetup setup = prepare_robust(inst, mode, opts, gamma);
    Solved s;
    s.solution = milp::solve(robustify(setup.hub.model, setup.spec), opts.solve);
    if (s.solution.has_values()) s.report = metrics(setup.instance, setup.hub.vars, s.solution.values, {mode});
    return s;
}

// Instance with the net-zero reference pinned for the deterministic model.
HubInstance deterministic_base(const HubInstance& inst, const AnalysisOptions& o) {
    return with_reference_emissions(inst, o.policy, o.robust.solve);
}

// Same for the robust model at the requested budget.
HubInstance robust_base(const HubInstance& inst, const AnalysisOptions& o) {
    HubInstance out = inst;
    if (o.policy == PolicyMode::kNetZero && !out.policy.nz_base_emissions_t) {
        out.policy.nz_base_emissions_t = o.robust.robust_reference
                                             ? robust_reference_emissions(inst, *o.robust_gamma, o.robust)
                                             : reference_emissions(inst, o.robust.solve);
    }
    return out;
}

bool optimal(milp::SolveStatus s) { return s == milp::SolveStatus::kOptimal; }

Direction direction(double det, double rob) {
    const double d = rob - det;
    if (std::abs(d) <= kDirectionTol * std::max(1.0, std::abs(det))) return Direction::kFlat;
    return d > 0.0 ? Direction::kUp : Direction::kDown;
}

std::string num(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

const char* to_string(PerturbMode mode) { return mode == PerturbMode::kScale ? "scale" : "shift"; }

const char* to_string(Direction d) {
    switch (d) {
        case Direction::kDown: return "down";
        case Direction::kFlat: return "flat";
        case Direction::kUp: return "up";
    }
    return "?";
}

HubInstance perturb(const HubInstance& instance, const std::string& path, PerturbMode mode, double level) {
    if (!std::isfinite(level)) throw AnalysisError("perturbation level must be finite");
    json doc = to_json(instance);
    for (const std::string& p : expand_alias(path, mode)) {
        json* node = resolve(doc, p);
        if (apply(*node, mode, level) == 0)
            throw AnalysisError("parameter path \"" + path + "\" holds no numeric value");
    }
    HubInstance out;
    try {
        out = from_json(doc);
    } catch (const InstanceError& e) {
        throw AnalysisError(path + " at " + num(level) + ": " + e.what());
    }
    const auto violations = validate(out);
    if (!violations.empty())
        throw AnalysisError(path + " at " + num(level) + " gives an invalid instance: " + violations.front().code +
                            ": " + violations.front().message);
    return out;
}

void check_spec(const HubInstance& instance, const PerturbationSpec& spec) {
    if (spec.levels.empty()) throw AnalysisError(spec.path + ": no levels");
    for (double l : spec.levels)
        if (!std::isfinite(l)) throw AnalysisError(spec.path + ": levels must be finite");
    for (double l : spec.levels) perturb(instance, spec.path, spec.mode, l);
}

std::vector<OatRow> oat_sweep(const HubInstance& instance, const PerturbationSpec& spec,
                              const AnalysisOptions& options) {
    check_spec(instance, spec);
    const HubInstance det_base = deterministic_base(instance, options);
    const HubInstance rob_base = options.robust_gamma ? robust_base(instance, options) : instance;

    std::vector<OatRow> rows(spec.levels.size());
    for_each_index(rows.size(), options.threads, [&](size_t i) {
        OatRow& r = rows[i];
        r.level = spec.levels[i];
        const Solved d = solve_deterministic(perturb(det_base, spec.path, spec.mode, r.level), options.policy,
                                             options.robust.solve);
        r.status = d.solution.status;
        r.objective = optimal(r.status) ? d.solution.objective : kNaN;
        r.report = d.report;
        if (options.robust_gamma) {
            const Solved rb = solve_robust(perturb(rob_base, spec.path, spec.mode, r.level), options.policy,
                                           *options.robust_gamma, options.robust);
            r.robust_status = rb.solution.status;
            r.robust_objective = optimal(rb.solution.status) ? rb.solution.objective : kNaN;
        }
    });
    return rows;
}

double TornadoRow::swing() const {
    if (!optimal(low_status) || !optimal(high_status)) return std::numeric_limits<double>::infinity();
    return std::max(std::abs(low_delta), std::abs(high_delta));
}

TornadoResult tornado(const HubInstance& instance, const std::vector<PerturbationSpec>& specs,
                      const AnalysisOptions& options) {
    for (const auto& s : specs) {
        if (s.levels.size() != 2) throw AnalysisError(s.path + ": a tornado needs exactly a low and a high level");
        check_spec(instance, s);
    }
    const HubInstance base = deterministic_base(instance, options);
    TornadoResult out;
    const Solved ref = solve_deterministic(base, options.policy, options.robust.solve);
    if (!optimal(ref.solution.status))
        throw AnalysisError(std::string("baseline solve failed: ") + milp::to_string(ref.solution.status));
    out.baseline_objective = ref.solution.objective;

    std::vector<milp::Solution> sols(2 * specs.size());
    for_each_index(sols.size(), options.threads, [&](size_t i) {
        const auto& s = specs[i / 2];
        sols[i] = solve_deterministic(perturb(base, s.path, s.mode, s.levels[i % 2]), options.policy,
                                      options.robust.solve)
                      .solution;
    });
    for (size_t k = 0; k < specs.size(); ++k) {
        TornadoRow r;
        r.parameter = specs[k].path;
        r.mode = specs[k].mode;
        r.low_level = specs[k].levels[0];
        r.high_level = specs[k].levels[1];
        r.low_status = sols[2 * k].status;
        r.high_status = sols[2 * k + 1].status;
        r.low_delta = optimal(r.low_status) ? sols[2 * k].objective - out.baseline_objective : kNaN;
        r.high_delta = optimal(r.high_status) ? sols[2 * k + 1].objective - out.baseline_objective : kNaN;
        out.rows.push_back(std::move(r));
    }
    std::stable_sort(out.rows.begin(), out.rows.end(),
                     [](const TornadoRow& a, const TornadoRow& b) { return a.swing() > b.swing(); });
    return out;
}

std::vector<PerturbationSpec> default_tornado_specs() {
    std::vector<PerturbationSpec> out;
    for (const char* path : {"policy.carbon_price", "fuels.gas_price_per_unit", "grid.segments.gas.price_per_MWh",
                             "demands.electricity_MWh", "demands.heat_MWh", "demands.hv_MWh",
                             "grid.buy_price_per_MWh", "renewables.pv_MW", "renewables.wind_MW",
                             "techs.electrolyzer.max_input_per_period"})
        out.push_back({path, PerturbMode::kScale, {0.7, 1.3}});
    return out;
}

MilpModel stress_model(const HubInstance& instance, const AnalysisOptions& options) {
    if (options.robust_gamma) {
        const RobustSetup setup = prepare_robust(instance, options.policy, options.robust, *options.robust_gamma);
        return robustify(setup.hub.model, setup.spec);
    }
    HubModel hub = build_deterministic(instance);
    apply_policy(hub, instance, options.policy, options.robust.solve);
    return std::move(hub.model);
}

ElasticResult elastic_relaxation(const MilpModel& model, const milp::SolveOptions& options) {
    MilpModel m = model;
    const size_t n = model.num_variables();
    const size_t rows = model.num_constraints();
    LinearExpr total;
    std::vector<std::pair<VarId, VarId>> slack(rows, {-1, -1});
    for (size_t i = 0; i < rows; ++i) {
        // Columns are appended without touching the row list, so `c` stays valid.
        auto& c = m.constraint(static_cast<RowId>(i));
        if (c.sense != milp::Sense::kLe) {
            slack[i].first = m.add_variable("elastic_up[" + c.tag + "]", 0.0, milp::kInf);
            c.terms.push_back({slack[i].first, 1.0});
            total.add(slack[i].first, 1.0);
        }
        if (c.sense != milp::Sense::kGe) {
            slack[i].second = m.add_variable("elastic_dn[" + c.tag + "]", 0.0, milp::kInf);
            c.terms.push_back({slack[i].second, -1.0});
            total.add(slack[i].second, 1.0);
        }
    }
    m.set_objective(total);

    ElasticResult out;
    const milp::Solution sol = milp::solve(m, options);
    out.status = sol.status;
    if (!sol.has_values()) return out;
    out.total_slack = sol.objective;
    out.values.assign(sol.values.begin(), sol.values.begin() + static_cast<std::ptrdiff_t>(n));
    for (size_t i = 0; i < rows; ++i) {
        double s = 0.0;
        if (slack[i].first >= 0) s += sol.values[static_cast<size_t>(slack[i].first)];
        if (slack[i].second >= 0) s += sol.values[static_cast<size_t>(slack[i].second)];
        if (s > kSlackTol) out.relaxed_tags.push_back(model.constraint(static_cast<RowId>(i)).tag);
    }
    return out;
}

StressResult stress_to_infeasibility(const HubInstance& instance, const std::string& path, PerturbMode mode,
                                     double step, double max_level, const AnalysisOptions& options) {
    if (!(step > 0.0) || !std::isfinite(step)) throw AnalysisError("stress step must be positive");
    if (!std::isfinite(max_level)) throw AnalysisError("stress max_level must be finite");
    const HubInstance base = options.robust_gamma ? robust_base(instance, options)
                                                  : deterministic_base(instance, options);
    const double origin = mode == PerturbMode::kScale ? 1.0 : 0.0;
    StressResult out;
    out.level = origin;
    for (size_t k = 1;; ++k) {
        const double level = origin + static_cast<double>(k) * step;
        if (level > max_level + 1e-12 * std::max(1.0, std::abs(max_level))) break;
        out.level = level;
        out.steps = k;
        const MilpModel m = stress_model(perturb(base, path, mode, level), options);
        const milp::Solution sol = milp::solve(m, options.robust.solve);
        if (sol.status != milp::SolveStatus::kInfeasible) continue;
        out.infeasible = true;
        ElasticResult e = elastic_relaxation(m, options.robust.solve);
        out.violated_tags = std::move(e.relaxed_tags);
        out.elastic_values = std::move(e.values);
        break;
    }
    return out;
}

Comparison compare_det_rob(const HubInstance& instance, PolicyMode policy, double gamma, const SweepOptions& options) {
    if (!std::isfinite(gamma) || gamma < 0.0) throw AnalysisError("gamma must be a finite value >= 0");
    Comparison c;
    c.gamma = gamma;
    c.policy = policy;
    const Solved d = solve_deterministic(with_reference_emissions(instance, policy, options.solve), policy, options.solve);
    const Solved r = solve_robust(instance, policy, gamma, options);
    c.det_status = d.solution.status;
    c.rob_status = r.solution.status;
    c.det = d.report;
    c.rob = r.report;
    c.det_objective = optimal(c.det_status) ? d.solution.objective : kNaN;
    c.rob_objective = optimal(c.rob_status) ? r.solution.objective : kNaN;
    if (!optimal(c.det_status) || !optimal(c.rob_status)) {
        c.premium = kNaN;
        return c;
    }
    c.premium = c.det_objective != 0.0 ? (c.rob_objective - c.det_objective) / std::abs(c.det_objective) : 0.0;
    c.cost = direction(c.det_objective, c.rob_objective);
    c.emissions = direction(c.det.total_emissions_t, c.rob.total_emissions_t);
    c.fossil = direction(c.det.fossil_use_MWh, c.rob.fossil_use_MWh);
    c.h2 = direction(c.det.h2_production_MWh, c.rob.h2_production_MWh);
    c.renewable_share = direction(c.det.renewable_share_frac, c.rob.renewable_share_frac);
    c.utilization = direction(c.det.electrolyzer_utilization_frac, c.rob.electrolyzer_utilization_frac);
    return c;
}

void write_oat_csv(const std::vector<OatRow>& rows, std::ostream& out) {
    out << "level,status,objective_usd,emissions_t,h2_production_MWh,fossil_use_MWh,renewable_share_frac,"
           "electrolyzer_utilization_frac,robust_status,robust_objective_usd\n";
    for (const auto& r : rows) {
        const bool ok = optimal(r.status);
        out << num(r.level) << ',' << milp::to_string(r.status) << ',' << num(r.objective) << ','
            << (ok ? num(r.report.total_emissions_t) : "") << ',' << (ok ? num(r.report.h2_production_MWh) : "")
            << ',' << (ok ? num(r.report.fossil_use_MWh) : "") << ','
            << (ok ? num(r.report.renewable_share_frac) : "") << ','
            << (ok ? num(r.report.electrolyzer_utilization_frac) : "") << ','
            << (r.robust_status ? milp::to_string(*r.robust_status) : "") << ','
            << (r.robust_status ? num(r.robust_objective) : "") << '\n';
    }
}

void write_tornado_csv(const TornadoResult& result, std::ostream& out) {
    out << "rank,parameter,mode,low_level,high_level,low_delta_usd,high_delta_usd,swing_usd,baseline_objective_usd\n";
    size_t rank = 1;
    for (const auto& r : result.rows) {
        const double swing = r.swing();
        out << rank++ << ',' << r.parameter << ',' << to_string(r.mode) << ',' << num(r.low_level) << ','
            << num(r.high_level) << ',' << num(r.low_delta) << ',' << num(r.high_delta) << ','
            << (std::isinf(swing) ? "inf" : num(swing)) << ',' << num(result.baseline_objective) << '\n';
    }
}

void write_compare_csv(const Comparison& c, std::ostream& out) {
    out << "metric,deterministic,robust,delta,direction\n";
    auto line = [&](const char* name, double d, double r, Direction dir) {
        out << name << ',' << num(d) << ',' << num(r) << ',' << num(r - d) << ',' << to_string(dir) << '\n';
    };
    line("objective_usd", c.det_objective, c.rob_objective, c.cost);
    line("emissions_t", c.det.total_emissions_t, c.rob.total_emissions_t, c.emissions);
    line("fossil_use_MWh", c.det.fossil_use_MWh, c.rob.fossil_use_MWh, c.fossil);
    line("h2_production_MWh", c.det.h2_production_MWh, c.rob.h2_production_MWh, c.h2);
    line("renewable_share_frac", c.det.renewable_share_frac, c.rob.renewable_share_frac, c.renewable_share);
    line("electrolyzer_utilization_frac", c.det.electrolyzer_utilization_frac, c.rob.electrolyzer_utilization_frac,
         c.utilization);
    out << "premium_frac,,," << num(c.premium) << ",\n";
}

json to_json(const Comparison& c) {
    auto side = [](milp::SolveStatus s, double obj, const ScenarioReport& r) {
        json j = to_json(r);
        j["status"] = milp::to_string(s);
        j["objective_usd"] = optimal(s) ? json(obj) : json(nullptr);
        return j;
    };
    return {{"gamma", c.gamma},
            {"policy", to_string(c.policy)},
            {"premium_frac", std::isnan(c.premium) ? json(nullptr) : json(c.premium)},
            {"deterministic", side(c.det_status, c.det_objective, c.det)},
            {"robust", side(c.rob_status, c.rob_objective, c.rob)},
            {"direction",
             {{"cost", to_string(c.cost)},
              {"emissions", to_string(c.emissions)},
              {"fossil_use", to_string(c.fossil)},
              {"h2_production", to_string(c.h2)},
              {"renewable_share", to_string(c.renewable_share)},
              {"electrolyzer_utilization", to_string(c.utilization)}}}};
}

json to_json(const StressResult& s) {
    return {{"infeasible", s.infeasible}, {"level", s.level}, {"steps", s.steps}, {"violated_tags", s.violated_tags}};
}

}  // namespace hubopt
