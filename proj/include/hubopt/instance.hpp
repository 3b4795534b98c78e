#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace hubopt {

/// Per-year by per-period series, indexed [year_index][period_index].
using Series = std::vector<std::vector<double>>;

inline constexpr const char* kSchemaVersion = "hubopt/1";

struct TimeStructure {
    std::vector<int> years;
    int periods_per_year = 48;
    double period_duration_h = 1.0;

    size_t num_years() const { return years.size(); }
    /// Index of `year` in `years`, or -1.
    int year_index(int year) const;
};

struct GridSegment {
    std::string name;  // nuclear, hydro, gas, biofuel
    double max_purchase_MW = 0.0;
    double min_share = 0.0;
    double price_per_MWh = 0.0;
    double emission_factor_t_per_MWh = 0.0;
    std::optional<double> ramp_limit_MW;
    // Electric output per unit of primary fuel energy; used for the fossil
    // fuel-equivalent of gas purchases.
    double generation_efficiency = 1.0;
};

enum class TechKind { kBoiler, kChp, kElectricChiller, kAbsorptionChiller, kElectrolyzer };

const char* to_string(TechKind kind);
std::optional<TechKind> tech_kind_from_string(const std::string& s);

struct ConversionTech {
    TechKind kind = TechKind::kBoiler;
    double efficiency = 1.0;  // boiler, electrolyzer
    double eta_e = 0.0;       // chp electric
    double eta_h = 0.0;       // chp heat
    double cop = 1.0;         // chillers
    double fuel_lhv = 1.0;    // MWh per fuel unit (boiler, chp)
    double max_input_per_period = 0.0;
    std::vector<double> max_input_by_year;  // overrides max_input_per_period when non-empty
    double om_cost_per_MWh = 0.0;
    std::vector<double> learning_multiplier_by_year;  // empty means 1 every year

    double max_input(size_t year_index) const;
    double learning_multiplier(size_t year_index) const;
};

enum class Carrier { kHeat, kHydrogen, kCold };

const char* to_string(Carrier carrier);
std::optional<Carrier> carrier_from_string(const std::string& s);

struct StorageTech {
    Carrier carrier = Carrier::kHeat;
    double e_min = 0.0;
    double e_max = 0.0;
    std::vector<double> e_min_by_year;
    std::vector<double> e_max_by_year;
    double p_ch_max = 0.0;
    double p_dch_max = 0.0;
    double eta_ch = 1.0;
    double eta_dch = 1.0;
    double e_init = 0.0;
    std::vector<double> e_init_by_year;
    double cycle_cost_per_MWh = 0.0;
    // Hydrogen only: price and emission intensity of externally supplied
    // hydrogen delivered through the charging path.
    double supply_price_per_MWh = 0.0;
    double supply_emission_t_per_MWh = 0.0;
    // Cold only: electricity drawn per MWh of cold charged (ice making).
    double aux_power_ratio = 0.0;

    double min_at(size_t year_index) const;
    double max_at(size_t year_index) const;
    double init_at(size_t year_index) const;
};

struct DemandSet {
    Series electricity_MWh;
    Series heat_MWh;
    Series cooling_MWh;
    Series ev_MWh;
    Series hv_MWh;
    double dr_up_ratio_el = 0.0;
    double dr_down_ratio_el = 0.0;
    double dr_up_ratio_h = 0.0;
    double dr_down_ratio_h = 0.0;
    double dr_penalty_per_MWh = 0.0;
};

struct RenewableProfile {
    Series pv_MW;
    Series wind_MW;
};

struct Prices {
    Series buy_per_MWh;
    Series sell_per_MWh;
};

struct FuelSupply {
    double gas_price_per_unit = 0.0;
    double bio_price_per_unit = 0.0;
    double gas_max_per_period = 1e9;
    double bio_max_per_period = 1e9;
    double energy_MWh_per_unit = 1.0;  // primary energy content of one fuel unit
};

enum class PolicyMode { kNone, kCarbonTax, kNetZero };

const char* to_string(PolicyMode mode);
/// Accepts both "carbon_tax" and "carbon-tax" spellings.
std::optional<PolicyMode> policy_mode_from_string(const std::string& s);

struct PolicySpec {
    PolicyMode mode = PolicyMode::kNone;
    double tax_base_per_t = 80.0;
    double tax_escalation_per_t_per_year = 15.0;
    double tax_cap_per_t = 170.0;
    int tax_base_year = 2025;
    std::optional<double> nz_base_emissions_t;
    int nz_target_year = 2050;
    std::optional<int> nz_base_year;
};

struct RobustSettings {
    double dev_fraction = 0.30;
};

struct HubInstance {
    std::string name;
    TimeStructure time;
    std::vector<GridSegment> segments;
    std::vector<ConversionTech> techs;
    std::vector<StorageTech> storages;
    DemandSet demands;
    RenewableProfile renewables;
    Prices prices;
    FuelSupply fuels;
    PolicySpec policy;
    RobustSettings robust;
    double export_limit_MW = 0.0;
    double fuel_emission_coeff = 0.0;  // P_f, tonnes per fuel unit

    const ConversionTech* find_tech(TechKind kind) const;
    const StorageTech* find_storage(Carrier carrier) const;
    const GridSegment* find_segment(const std::string& name) const;
    double import_cap_MW() const;
};

struct Violation {
    std::string code;
    std::string message;

    bool operator==(const Violation&) const = default;
};

/// Every broken invariant, in a fixed traversal order.
std::vector<Violation> validate(const HubInstance& instance);

class InstanceError : public std::runtime_error {
public:
    InstanceError(const std::string& what, std::vector<Violation> violations = {})
        : std::runtime_error(what), violations_(std::move(violations)) {}
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

nlohmann::json to_json(const HubInstance& instance);
/// Structural decoding only; throws InstanceError on malformed documents.
HubInstance from_json(const nlohmann::json& doc);

/// Parse and validate. Throws InstanceError naming the first violation.
HubInstance load_instance(const std::string& path);
HubInstance parse_instance(const std::string& text);
void save_instance(const HubInstance& instance, const std::string& path);

/// Directory holding the bundled data files (compile-time default,
/// overridable with HUBOPT_DATA_DIR).
std::string data_dir();
std::string bundled_instance_path(const std::string& file = "synthetic_on.json");

}  // namespace hubopt
