#pragma once

#include <span>
#include <string>
#include <vector>

#include "hubopt/hub_model.hpp"
#include "json.hpp"

namespace hubopt {

/// Energy delivered by one source, split into the cold and warm
/// representative days and summed over all years.
struct SupplyRow {
    std::string source;
    double cold_MWh = 0.0;
    double warm_MWh = 0.0;
    double total_MWh() const { return cold_MWh + warm_MWh; }
};

struct ScenarioReport {
    double total_cost = 0.0;
    double carbon_cost = 0.0;
    double total_emissions_t = 0.0;
    double h2_production_MWh = 0.0;
    double fossil_use_MWh = 0.0;
    double renewable_share_frac = 0.0;
    double electrolyzer_utilization_frac = 0.0;
    std::vector<SupplyRow> supply;
};

struct MetricsOptions {
    PolicyMode policy = PolicyMode::kNone;
    /// Count hydro and biofuel grid purchases as renewable supply.
    bool broad_renewables = false;
};

/// Metrics recomputed from a raw solution vector (only the deterministic
/// model's variables are read, so robust solutions work unchanged).
ScenarioReport metrics(const HubInstance& instance, const VarCatalog& vars, std::span<const double> values,
                       const MetricsOptions& options = {});

nlohmann::json to_json(const ScenarioReport& report);

}  // namespace hubopt
