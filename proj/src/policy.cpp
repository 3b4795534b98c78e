#include "hubopt/policy.hpp"

#include <algorithm>
#include <cmath>

namespace hubopt {

double carbon_rate(const PolicySpec& policy, int year) {
    if (policy.mode != PolicyMode::kCarbonTax) throw PolicyError("carbon_rate requires carbon_tax policy mode");
    const double raw = policy.tax_base_per_t + policy.tax_escalation_per_t_per_year * (year - policy.tax_base_year);
    return std::min(raw, policy.tax_cap_per_t);
}

CarbonSchedule carbon_schedule(const HubInstance& instance) {
    PolicySpec p = instance.policy;
    p.mode = PolicyMode::kCarbonTax;
    CarbonSchedule s;
    for (int year : instance.time.years) s.rate_per_t.push_back(carbon_rate(p, year));
    return s;
}

EmissionCap net_zero_cap(const HubInstance& instance, double base_emissions_t) {
    const auto& p = instance.policy;
    const int base_year = p.nz_base_year.value_or(instance.time.years.front());
    const double span = static_cast<double>(p.nz_target_year - base_year);
    EmissionCap cap;
    for (int year : instance.time.years) {
        const double remaining = std::max(0.0, static_cast<double>(p.nz_target_year - year));
        cap.cap_t.push_back(span > 0.0 ? base_emissions_t * std::min(1.0, remaining / span) : 0.0);
    }
    return cap;
}

void apply_carbon_tax(HubModel& hub, const HubInstance& instance, const CarbonSchedule& schedule) {
    LinearExpr obj = hub.model.objective();
    for (size_t y = 0; y < hub.vars.years(); ++y) {
        const double rate = schedule.rate_per_t.at(y);
        if (rate == 0.0) continue;
        obj.add(emissions_expression(instance, hub.vars, static_cast<int>(y)), rate);
    }
    hub.model.set_objective(std::move(obj));
}

void apply_net_zero(HubModel& hub, const HubInstance& instance, const EmissionCap& cap) {
    for (size_t y = 0; y < hub.vars.years(); ++y) {
        const double c = cap.cap_t.at(y);
        if (!std::isfinite(c)) continue;
        const LinearExpr e = emissions_expression(instance, hub.vars, static_cast<int>(y));
        const std::string tag = "nz_trajectory[" + std::to_string(instance.time.years[y]) + "]";
        const RowId r = hub.model.add_constraint(tag, e.terms, milp::Sense::kLe, c - e.constant, tag);
        hub.rows.add("nz_trajectory", tag, r);
    }
}

double reference_emissions(const HubInstance& instance, const milp::SolveOptions& options) {
    const HubModel hub = build_deterministic(instance);
    const milp::Solution sol = milp::solve(hub.model, options);
    if (sol.status != milp::SolveStatus::kOptimal && !sol.has_values())
        throw PolicyError("no-policy reference solve failed: " + std::string(milp::to_string(sol.status)));
    return emissions_expression(instance, hub.vars, 0).evaluate(sol.values);
}

void apply_policy(HubModel& hub, const HubInstance& instance, PolicyMode mode, const milp::SolveOptions& options) {
    switch (mode) {
        case PolicyMode::kNone: return;
        case PolicyMode::kCarbonTax: apply_carbon_tax(hub, instance, carbon_schedule(instance)); return;
        case PolicyMode::kNetZero: {
            const double e0 = instance.policy.nz_base_emissions_t ? *instance.policy.nz_base_emissions_t
                                                                   : reference_emissions(instance, options);
            apply_net_zero(hub, instance, net_zero_cap(instance, e0));
            return;
        }
    }
}

}  // namespace hubopt
