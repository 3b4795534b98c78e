#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "hubopt/hub_model.hpp"

namespace hubopt {

/// Carbon price per year of the horizon, aligned with TimeStructure::years.
struct CarbonSchedule {
    std::vector<double> rate_per_t;
};

/// Emission allowance per year of the horizon.
struct EmissionCap {
    std::vector<double> cap_t;
};

class PolicyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// min(base + escalation * (year - base_year), cap). Throws PolicyError
/// unless the policy mode is carbon_tax.
double carbon_rate(const PolicySpec& policy, int year);

CarbonSchedule carbon_schedule(const HubInstance& instance);

/// Linear path from `base_emissions_t` at the reference year down to zero at
/// the target year, clamped at zero afterwards. The reference year is
/// nz_base_year when given, otherwise the first horizon year.
EmissionCap net_zero_cap(const HubInstance& instance, double base_emissions_t);

/// Adds sum_y rate(y) * emissions(y) to the objective. No rows are added.
void apply_carbon_tax(HubModel& hub, const HubInstance& instance, const CarbonSchedule& schedule);

/// Adds nz_trajectory[year]: emissions(y) <= cap(y) for every finite cap.
void apply_net_zero(HubModel& hub, const HubInstance& instance, const EmissionCap& cap);

/// Emissions of the first horizon year in the optimal deterministic
/// no-policy solution; used as the net-zero reference when none is given.
double reference_emissions(const HubInstance& instance, const milp::SolveOptions& options = {});

/// Applies `mode` (carbon tax, net zero or none) to a freshly built model.
/// For net zero the reference emissions come from the instance or, when
/// unset, from reference_emissions().
void apply_policy(HubModel& hub, const HubInstance& instance, PolicyMode mode, const milp::SolveOptions& options = {});

}  // namespace hubopt
