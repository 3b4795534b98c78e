#include "hubopt/robust.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <unordered_map>

#include "hubopt/policy.hpp"

namespace hubopt {

using milp::Sense;
using milp::Term;

double UncertaintySpec::gamma_for(const std::string& tag) const {
    const auto it = row_gamma.find(tag);
    return it == row_gamma.end() ? gamma : it->second;
}

std::vector<std::pair<std::string, std::vector<size_t>>> UncertaintySpec::groups() const {
    std::vector<std::pair<std::string, std::vector<size_t>>> out;
    std::unordered_map<std::string, size_t> where;
    for (size_t k = 0; k < entries.size(); ++k) {
        const auto [it, fresh] = where.emplace(entries[k].tag, out.size());
        if (fresh) out.push_back({entries[k].tag, {}});
        out[it->second].second.push_back(k);
    }
    return out;
}

size_t UncertaintySpec::max_group_size() const {
    size_t m = 0;
    for (const auto& g : groups()) m = std::max(m, g.second.size());
    return m;
}

UncertaintySpec derive_uncertainty(const HubInstance& inst, const HubModel& hub, double dev_fraction, double gamma) {
    if (!(dev_fraction >= 0.0 && dev_fraction <= 1.0))
        throw RobustError("deviation fraction must lie in [0, 1]");
    UncertaintySpec spec;
    spec.gamma = gamma;
    const double dt = inst.time.period_duration_h;
    const auto& d = inst.demands;
    auto entry = [&](const std::string& tag, VarId var, const char* label, double nominal) {
        spec.entries.push_back({tag, var, label, nominal, dev_fraction * std::abs(nominal)});
    };
    for (size_t y = 0; y < hub.vars.years(); ++y) {
        const int year = inst.time.years[y];
        for (size_t t = 0; t < hub.vars.periods(); ++t) {
            const PeriodVars& p = hub.vars.at(y, t);
            const std::string el = make_tag("el_balance", year, t);
            entry(el, p.pv, "pv", inst.renewables.pv_MW[y][t] * dt);
            entry(el, p.wind, "wind", inst.renewables.wind_MW[y][t] * dt);
            entry(el, -1, "electricity", d.electricity_MWh[y][t]);
            entry(el, -1, "ev", d.ev_MWh[y][t]);
            entry(make_tag("h2_meet", year, t, "hv"), -1, "hv", d.hv_MWh[y][t]);
        }
    }
    return spec;
}

namespace {

std::unordered_map<std::string, RowId> index_tags(const MilpModel& model) {
    std::unordered_map<std::string, RowId> out;
    for (size_t i = 0; i < model.constraints().size(); ++i) {
        const auto& tag = model.constraints()[i].tag;
        if (!tag.empty()) out.emplace(tag, static_cast<RowId>(i));
    }
    return out;
}

void check_spec(const UncertaintySpec& spec) {
    auto bad_gamma = [](double g) { return !std::isfinite(g) || g < 0.0; };
    if (bad_gamma(spec.gamma)) throw RobustError("budget must be a finite non-negative number");
    for (const auto& [tag, g] : spec.row_gamma)
        if (bad_gamma(g)) throw RobustError("budget for " + tag + " must be a finite non-negative number");
    for (const auto& e : spec.entries) {
        if (!std::isfinite(e.deviation) || e.deviation < 0.0)
            throw RobustError("deviation of " + e.label + " in " + e.tag + " must be finite and non-negative");
        if (!spec.protected_families.count(tag_family(e.tag)))
            throw RobustError("row " + e.tag + " is not in a protected family");
    }
}

RowId resolve(const std::unordered_map<std::string, RowId>& tags, const std::string& tag) {
    const auto it = tags.find(tag);
    if (it == tags.end()) throw RobustError("unresolved uncertainty locator " + tag);
    return it->second;
}

// Directions to protect, as signs applied to "activity - rhs <= 0":
// +1 protects the <= half, -1 the >= half.
std::vector<int> directions(Sense sense, EqualityMode mode) {
    switch (sense) {
        case Sense::kLe: return {1};
        case Sense::kGe: return {-1};
        case Sense::kEq: return mode == EqualityMode::kCover ? std::vector<int>{-1} : std::vector<int>{-1, 1};
    }
    return {};
}

}  // namespace

MilpModel robustify(const MilpModel& nominal, const UncertaintySpec& spec) {
    check_spec(spec);
    MilpModel m = nominal;
    const auto tags = index_tags(nominal);
    // Magnitude variable per uncertain column; x itself when sign-definite.
    std::unordered_map<VarId, std::pair<VarId, double>> magnitude;
    auto magnitude_of = [&](VarId x) -> std::pair<VarId, double> {
        if (const auto it = magnitude.find(x); it != magnitude.end()) return it->second;
        const auto& v = m.variable(x);
        std::pair<VarId, double> out{x, 1.0};
        if (v.upper <= 0.0) {
            out = {x, -1.0};
        } else if (v.lower < 0.0) {
            const VarId a = m.add_variable("robust_abs[" + v.name + "]", 0.0, milp::kInf);
            m.add_constraint("robust_abs_pos[" + v.name + "]", {{a, 1.0}, {x, -1.0}}, Sense::kGe, 0.0);
            m.add_constraint("robust_abs_neg[" + v.name + "]", {{a, 1.0}, {x, 1.0}}, Sense::kGe, 0.0);
            out = {a, 1.0};
        }
        magnitude.emplace(x, out);
        return out;
    };
    // Uncertain constants sit on a column pinned to 1.
    VarId one = -1;
    auto one_var = [&] {
        if (one < 0) one = m.add_variable("robust_one", 1.0, 1.0);
        return one;
    };

    for (const auto& [tag, members] : spec.groups()) {
        const RowId r = resolve(tags, tag);
        const milp::LinearConstraint original = nominal.constraint(r);
        const double gamma = spec.gamma_for(tag);
        const auto dirs = directions(original.sense, spec.equality_mode);
        for (size_t k = 0; k < dirs.size(); ++k) {
            const int s = dirs[k];
            const std::string suffix = s > 0 ? "le" : "ge";
            const std::string key = tag + "," + suffix;
            const VarId p = m.add_variable("robust_p[" + key + "]", 0.0, milp::kInf);
            std::vector<Term> terms;
            for (const auto& t : original.terms) terms.push_back({t.var, s * t.coef});
            terms.push_back({p, gamma});
            for (size_t j = 0; j < members.size(); ++j) {
                const auto& e = spec.entries[members[j]];
                const std::string jkey = key + "," + std::to_string(j + 1);
                const VarId q = m.add_variable("robust_q[" + jkey + "]", 0.0, milp::kInf);
                terms.push_back({q, 1.0});
                if (e.var < 0) {
                    m.add_constraint("robust_aux[" + jkey + "]", {{p, 1.0}, {q, 1.0}, {one_var(), -e.deviation}},
                                     Sense::kGe, 0.0);
                } else {
                    const auto [y, sign] = magnitude_of(e.var);
                    m.add_constraint("robust_aux[" + jkey + "]", {{p, 1.0}, {q, 1.0}, {y, -sign * e.deviation}},
                                     Sense::kGe, 0.0);
                }
            }
            if (k == 0) {
                auto& row = m.constraint(r);
                row = milp::LinearConstraint{original.name, std::move(terms), Sense::kLe, s * original.rhs,
                                             original.tag};
            } else {
                m.add_constraint(original.name + "_" + suffix, std::move(terms), Sense::kLe, s * original.rhs,
                                 original.tag);
            }
        }
    }
    return m;
}

MilpModel interval_counterpart(const MilpModel& nominal, const UncertaintySpec& spec) {
    check_spec(spec);
    MilpModel m = nominal;
    const auto tags = index_tags(nominal);
    for (const auto& [tag, members] : spec.groups()) {
        const RowId r = resolve(tags, tag);
        const auto& original = nominal.constraint(r);
        const auto dirs = directions(original.sense, spec.equality_mode);
        if (dirs.size() != 1) throw RobustError("interval counterpart needs one protected direction per row");
        const int s = dirs[0];
        std::unordered_map<VarId, double> coef;
        std::vector<VarId> order;
        for (const auto& t : original.terms) {
            if (!coef.count(t.var)) order.push_back(t.var);
            coef[t.var] += s * t.coef;
        }
        double rhs = s * original.rhs;
        for (size_t j : members) {
            const auto& e = spec.entries[j];
            if (e.var < 0) {
                rhs -= e.deviation;
                continue;
            }
            const auto& v = nominal.variable(e.var);
            if (v.lower < 0.0 && v.upper > 0.0)
                throw RobustError("interval counterpart needs sign-definite uncertain variables");
            if (!coef.count(e.var)) order.push_back(e.var);
            coef[e.var] += v.lower >= 0.0 ? e.deviation : -e.deviation;
        }
        auto& row = m.constraint(r);
        row.terms.clear();
        for (VarId v : order) row.terms.push_back({v, coef[v]});
        row.sense = Sense::kLe;
        row.rhs = rhs;
    }
    return m;
}

AuditResult worst_case_audit(const MilpModel& nominal, const UncertaintySpec& spec, std::span<const double> values) {
    check_spec(spec);
    constexpr size_t kMaxTerms = 20;
    constexpr size_t kMaxScenarios = 5'000'000;
    if (values.size() < nominal.num_variables()) throw RobustError("solution shorter than the nominal model");
    const auto tags = index_tags(nominal);
    AuditResult out;

    for (const auto& [tag, members] : spec.groups()) {
        if (members.size() > kMaxTerms)
            throw RobustError("row " + tag + " has " + std::to_string(members.size()) +
                              " uncertain terms; the audit enumerates at most 20");
        const auto& row = nominal.constraint(resolve(tags, tag));
        const double gamma = std::min(spec.gamma_for(tag), static_cast<double>(members.size()));
        const size_t whole = static_cast<size_t>(std::floor(gamma + 1e-12));
        const double frac = gamma - static_cast<double>(whole);
        const bool has_frac = frac > 1e-12 && whole < members.size();

        // Effect of z_j = +1 on (activity - rhs).
        std::vector<double> unit(members.size());
        for (size_t j = 0; j < members.size(); ++j) {
            const auto& e = spec.entries[members[j]];
            unit[j] = e.var < 0 ? -e.deviation : e.deviation * values[static_cast<size_t>(e.var)];
        }
        const double base = row.activity(values) - row.rhs;

        for (int s : directions(row.sense, spec.equality_mode)) {
            ++out.rows_checked;
            double worst = -milp::kInf;
            size_t count = 0;
            // Depth-first over z_j in {0, +1, -1, +frac, -frac}.
            auto dfs = [&](auto&& self, size_t j, size_t used_whole, bool used_frac, double shift) -> void {
                if (j == members.size()) {
                    if (++count > kMaxScenarios) throw RobustError("audit scenario limit exceeded at " + tag);
                    worst = std::max(worst, s * (base + shift));
                    return;
                }
                self(self, j + 1, used_whole, used_frac, shift);
                if (used_whole < whole) {
                    self(self, j + 1, used_whole + 1, used_frac, shift + unit[j]);
                    self(self, j + 1, used_whole + 1, used_frac, shift - unit[j]);
                }
                if (has_frac && !used_frac) {
                    self(self, j + 1, used_whole, true, shift + frac * unit[j]);
                    self(self, j + 1, used_whole, true, shift - frac * unit[j]);
                }
            };
            dfs(dfs, 0, 0, false, 0.0);
            out.scenarios += count;
            if (worst > out.max_violation) {
                out.max_violation = worst;
                out.worst_tag = tag;
            }
        }
    }
    return out;
}

HubInstance with_reference_emissions(const HubInstance& instance, PolicyMode mode,
                                     const milp::SolveOptions& options) {
    HubInstance out = instance;
    if (mode == PolicyMode::kNetZero && !out.policy.nz_base_emissions_t)
        out.policy.nz_base_emissions_t = reference_emissions(instance, options);
    return out;
}

double robust_reference_emissions(const HubInstance& instance, double gamma, const SweepOptions& options) {
    HubInstance plain = instance;
    plain.policy.mode = PolicyMode::kNone;
    const HubModel hub = build_deterministic(plain);
    UncertaintySpec spec = derive_uncertainty(plain, hub, options.dev_fraction, gamma);
    spec.equality_mode = options.equality_mode;
    const milp::Solution sol = milp::solve(robustify(hub.model, spec), options.solve);
    if (!sol.has_values())
        throw PolicyError("no-policy reference solve failed: " + std::string(milp::to_string(sol.status)));
    return emissions_expression(plain, hub.vars, 0).evaluate(sol.values);
}

namespace {

bool needs_robust_reference(const HubInstance& instance, PolicyMode mode, const SweepOptions& options) {
    return mode == PolicyMode::kNetZero && !instance.policy.nz_base_emissions_t && options.robust_reference;
}

}  // namespace

RobustSetup prepare_robust(const HubInstance& instance, PolicyMode mode, const SweepOptions& options, double gamma) {
    RobustSetup s{instance, {}, {}};
    if (needs_robust_reference(instance, mode, options))
        s.instance.policy.nz_base_emissions_t = robust_reference_emissions(instance, gamma, options);
    else
        s.instance = with_reference_emissions(instance, mode, options.solve);
    s.hub = build_deterministic(s.instance);
    apply_policy(s.hub, s.instance, mode, options.solve);
    s.spec = derive_uncertainty(s.instance, s.hub, options.dev_fraction, gamma);
    s.spec.equality_mode = options.equality_mode;
    return s;
}

std::vector<GammaPoint> gamma_sweep(const HubInstance& instance, PolicyMode mode, const std::vector<double>& gammas,
                                    const SweepOptions& options) {
    if (!std::is_sorted(gammas.begin(), gammas.end())) throw RobustError("budgets must be given in ascending order");
    // The cap moves with the budget only when the reference is re-derived.
    const bool rebuild = needs_robust_reference(instance, mode, options);
    std::optional<RobustSetup> setup;
    std::vector<GammaPoint> out;
    for (double g : gammas) {
        if (rebuild || !setup) setup = prepare_robust(instance, mode, options, g);
        setup->spec.gamma = g;
        GammaPoint pt;
        pt.gamma = g;
        pt.solution = milp::solve(robustify(setup->hub.model, setup->spec), options.solve);
        if (pt.solution.has_values())
            pt.report = metrics(setup->instance, setup->hub.vars, pt.solution.values, {mode});
        out.push_back(std::move(pt));
    }
    return out;
}

void write_gamma_csv(const std::vector<GammaPoint>& points, std::ostream& out) {
    out << "gamma,status,objective_usd,emissions_t,h2_production_MWh,fossil_use_MWh,renewable_share_frac,"
           "electrolyzer_utilization_frac\n";
    char buf[512];
    for (const auto& p : points) {
        const auto& r = p.report;
        if (p.solution.status == milp::SolveStatus::kOptimal) {
            std::snprintf(buf, sizeof buf, "%.10g,%s,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", p.gamma,
                          milp::to_string(p.solution.status), p.solution.objective, r.total_emissions_t,
                          r.h2_production_MWh, r.fossil_use_MWh, r.renewable_share_frac,
                          r.electrolyzer_utilization_frac);
        } else {
            std::snprintf(buf, sizeof buf, "%.10g,%s,,,,,,\n", p.gamma, milp::to_string(p.solution.status));
        }
        out << buf;
    }
}

}  // namespace hubopt
