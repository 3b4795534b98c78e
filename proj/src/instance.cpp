#include "hubopt/instance.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#ifndef HUBOPT_DATA_DIR
#define HUBOPT_DATA_DIR "data"
#endif

namespace hubopt {

using nlohmann::json;

int TimeStructure::year_index(int year) const {
    for (size_t i = 0; i < years.size(); ++i)
        if (years[i] == year) return static_cast<int>(i);
    return -1;
}

namespace {

double by_year(const std::vector<double>& schedule, double fallback, size_t yi) {
    return schedule.empty() ? fallback : schedule.at(yi);
}

}  // namespace

double ConversionTech::max_input(size_t yi) const { return by_year(max_input_by_year, max_input_per_period, yi); }
double ConversionTech::learning_multiplier(size_t yi) const { return by_year(learning_multiplier_by_year, 1.0, yi); }
double StorageTech::min_at(size_t yi) const { return by_year(e_min_by_year, e_min, yi); }
double StorageTech::max_at(size_t yi) const { return by_year(e_max_by_year, e_max, yi); }
double StorageTech::init_at(size_t yi) const { return by_year(e_init_by_year, e_init, yi); }

const char* to_string(TechKind kind) {
    switch (kind) {
        case TechKind::kBoiler: return "boiler";
        case TechKind::kChp: return "chp";
        case TechKind::kElectricChiller: return "electric_chiller";
        case TechKind::kAbsorptionChiller: return "absorption_chiller";
        case TechKind::kElectrolyzer: return "electrolyzer";
    }
    return "?";
}

std::optional<TechKind> tech_kind_from_string(const std::string& s) {
    for (TechKind k : {TechKind::kBoiler, TechKind::kChp, TechKind::kElectricChiller, TechKind::kAbsorptionChiller,
                       TechKind::kElectrolyzer})
        if (s == to_string(k)) return k;
    return std::nullopt;
}

const char* to_string(Carrier carrier) {
    switch (carrier) {
        case Carrier::kHeat: return "heat";
        case Carrier::kHydrogen: return "hydrogen";
        case Carrier::kCold: return "cold";
    }
    return "?";
}

std::optional<Carrier> carrier_from_string(const std::string& s) {
    for (Carrier c : {Carrier::kHeat, Carrier::kHydrogen, Carrier::kCold})
        if (s == to_string(c)) return c;
    return std::nullopt;
}

const char* to_string(PolicyMode mode) {
    switch (mode) {
        case PolicyMode::kNone: return "none";
        case PolicyMode::kCarbonTax: return "carbon_tax";
        case PolicyMode::kNetZero: return "net_zero";
    }
    return "?";
}

std::optional<PolicyMode> policy_mode_from_string(const std::string& s) {
    if (s == "none") return PolicyMode::kNone;
    if (s == "carbon_tax" || s == "carbon-tax") return PolicyMode::kCarbonTax;
    if (s == "net_zero" || s == "net-zero") return PolicyMode::kNetZero;
    return std::nullopt;
}

const ConversionTech* HubInstance::find_tech(TechKind kind) const {
    for (const auto& t : techs)
        if (t.kind == kind) return &t;
    return nullptr;
}

const StorageTech* HubInstance::find_storage(Carrier carrier) const {
    for (const auto& s : storages)
        if (s.carrier == carrier) return &s;
    return nullptr;
}

const GridSegment* HubInstance::find_segment(const std::string& seg_name) const {
    for (const auto& s : segments)
        if (s.name == seg_name) return &s;
    return nullptr;
}

double HubInstance::import_cap_MW() const {
    double cap = 0.0;
    for (const auto& s : segments) cap += s.max_purchase_MW;
    return cap;
}

// ---------------------------------------------------------------------------
// validation

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

class Validator {
public:
    explicit Validator(const HubInstance& inst) : inst_(inst) {}

    std::vector<Violation> run() {
        check_time();
        check_series("demands.electricity_MWh", inst_.demands.electricity_MWh, true);
        check_series("demands.heat_MWh", inst_.demands.heat_MWh, true);
        check_series("demands.cooling_MWh", inst_.demands.cooling_MWh, true);
        check_series("demands.ev_MWh", inst_.demands.ev_MWh, true);
        check_series("demands.hv_MWh", inst_.demands.hv_MWh, true);
        check_series("renewables.pv_MW", inst_.renewables.pv_MW, true);
        check_series("renewables.wind_MW", inst_.renewables.wind_MW, true);
        check_series("grid.buy_price_per_MWh", inst_.prices.buy_per_MWh, false);
        check_series("grid.sell_price_per_MWh", inst_.prices.sell_per_MWh, false);
        check_segments();
        check_techs();
        check_storages();
        check_demand_response();
        check_misc();
        check_policy();
        return std::move(out_);
    }

private:
    void add(const char* code, std::string message) { out_.push_back({code, std::move(message)}); }

    void check_time() {
        const auto& t = inst_.time;
        if (t.years.empty()) add("TimeYearsEmpty", "time.years is empty");
        for (size_t i = 1; i < t.years.size(); ++i) {
            if (t.years[i] <= t.years[i - 1]) {
                add("YearsNotIncreasing", "time.years not strictly increasing at " + std::to_string(t.years[i]));
                break;
            }
        }
        if (t.periods_per_year < 2 || t.periods_per_year % 2 != 0)
            add("PeriodsInvalid", "time.periods_per_year must be even and >= 2, got " + std::to_string(t.periods_per_year));
        if (!(t.period_duration_h > 0.0) || !std::isfinite(t.period_duration_h))
            add("DurationInvalid", "time.period_duration_h must be positive");
    }

    void check_series(const std::string& field, const Series& s, bool nonnegative) {
        const auto& t = inst_.time;
        if (s.empty()) {
            add("SeriesMissing", field + ": missing series");
            return;
        }
        if (s.size() != t.years.size()) {
            add("SeriesCoverage", field + ": expected " + std::to_string(t.years.size()) + " years, got " +
                                      std::to_string(s.size()));
            return;
        }
        for (size_t y = 0; y < s.size(); ++y) {
            const int year = t.years[y];
            if (s[y].size() != static_cast<size_t>(t.periods_per_year)) {
                add("SeriesCoverage", field + "[" + std::to_string(year) + "]: expected " +
                                          std::to_string(t.periods_per_year) + " periods, got " +
                                          std::to_string(s[y].size()));
                continue;
            }
            for (size_t p = 0; p < s[y].size(); ++p) {
                const double v = s[y][p];
                const std::string loc = field + "[" + std::to_string(year) + "," + std::to_string(p + 1) + "]";
                if (!std::isfinite(v)) {
                    add("NonFinite", loc + " is not finite");
                } else if (nonnegative && v < 0.0) {
                    add("NegativeValue", loc + " = " + fmt(v) + " is negative");
                }
            }
        }
    }

    void check_schedule(const std::string& field, const std::vector<double>& sched) {
        if (!sched.empty() && sched.size() != inst_.time.years.size())
            add("ScheduleLength", field + ": expected " + std::to_string(inst_.time.years.size()) +
                                      " entries, got " + std::to_string(sched.size()));
    }

    void check_segments() {
        static const std::set<std::string> kNames{"nuclear", "hydro", "gas", "biofuel"};
        std::set<std::string> seen;
        double share_sum = 0.0;
        for (size_t i = 0; i < inst_.segments.size(); ++i) {
            const auto& s = inst_.segments[i];
            const std::string f = "grid.segments[" + s.name + "]";
            if (!kNames.count(s.name)) add("GridSegmentName", "grid.segments[" + std::to_string(i) + "]: unknown segment '" + s.name + "'");
            else if (!seen.insert(s.name).second) add("GridSegmentName", f + ": duplicate segment");
            if (!(s.min_share >= 0.0 && s.min_share <= 1.0))
                add("GridShareOutOfRange", f + ".min_share " + fmt(s.min_share) + " out of [0,1]");
            share_sum += s.min_share;
            if (!(s.max_purchase_MW >= 0.0)) add("GridCapNegative", f + ".max_purchase_MW is negative");
            if (!(s.emission_factor_t_per_MWh >= 0.0)) add("EmissionFactorNegative", f + ".emission_factor_t_per_MWh is negative");
            if (s.ramp_limit_MW && !(*s.ramp_limit_MW >= 0.0)) add("RampLimitNegative", f + ".ramp_limit_MW is negative");
            if (!(s.generation_efficiency > 0.0 && s.generation_efficiency <= 1.0))
                add("EfficiencyOutOfRange", f + ".generation_efficiency out of (0,1]");
            if (!std::isfinite(s.price_per_MWh)) add("NonFinite", f + ".price_per_MWh is not finite");
        }
        if (share_sum > 1.0 + 1e-12) add("GridShareOverflow", "grid segment min_share values sum to " + fmt(share_sum) + " > 1");
    }

    void check_techs() {
        std::set<TechKind> seen;
        int electrolyzers = 0;
        for (const auto& t : inst_.techs) {
            const std::string f = std::string("techs[") + to_string(t.kind) + "]";
            if (t.kind == TechKind::kElectrolyzer) ++electrolyzers;
            else if (!seen.insert(t.kind).second) add("TechDuplicate", f + ": more than one unit of this kind");
            switch (t.kind) {
                case TechKind::kBoiler:
                case TechKind::kElectrolyzer:
                    if (!(t.efficiency > 0.0 && t.efficiency <= 1.0))
                        add("EfficiencyOutOfRange", f + ".efficiency out of (0,1]");
                    break;
                case TechKind::kChp:
                    if (!(t.eta_e > 0.0 && t.eta_e <= 1.0)) add("EfficiencyOutOfRange", f + ".eta_e out of (0,1]");
                    if (!(t.eta_h > 0.0 && t.eta_h <= 1.0)) add("EfficiencyOutOfRange", f + ".eta_h out of (0,1]");
                    if (t.eta_e + t.eta_h > 1.0 + 1e-12) add("ChpEfficiencySum", f + ": eta_e + eta_h exceeds 1");
                    break;
                case TechKind::kElectricChiller:
                case TechKind::kAbsorptionChiller:
                    if (!(t.cop > 0.0) || !std::isfinite(t.cop)) add("CopOutOfRange", f + ".cop must be positive");
                    break;
            }
            if ((t.kind == TechKind::kBoiler || t.kind == TechKind::kChp) && !(t.fuel_lhv > 0.0))
                add("FuelLhvInvalid", f + ".fuel_lhv must be positive");
            if (!(t.max_input_per_period >= 0.0)) add("CapacityNegative", f + ".max_input_per_period is negative");
            check_schedule(f + ".max_input_by_year", t.max_input_by_year);
            for (double v : t.max_input_by_year)
                if (!(v >= 0.0)) add("CapacityNegative", f + ".max_input_by_year has a negative entry");
            check_schedule(f + ".learning_multiplier_by_year", t.learning_multiplier_by_year);
            for (double v : t.learning_multiplier_by_year)
                if (!(v > 0.0)) add("LearningMultiplier", f + ".learning_multiplier_by_year entries must be > 0");
            if (!(t.om_cost_per_MWh >= 0.0)) add("CostNegative", f + ".om_cost_per_MWh is negative");
        }
        if (electrolyzers != 1)
            add("ElectrolyzerCount", "exactly one electrolyzer required, found " + std::to_string(electrolyzers));
    }

    void check_storages() {
        std::set<Carrier> seen;
        for (const auto& s : inst_.storages) {
            const std::string f = std::string("storages[") + to_string(s.carrier) + "]";
            if (!seen.insert(s.carrier).second) add("StorageDuplicate", f + ": more than one storage for this carrier");
            if (!(s.eta_ch > 0.0 && s.eta_ch <= 1.0)) add("StorageEfficiencyOutOfRange", f + ": eta_ch out of (0,1]");
            if (!(s.eta_dch > 0.0 && s.eta_dch <= 1.0)) add("StorageEfficiencyOutOfRange", f + ": eta_dch out of (0,1]");
            if (!(s.p_ch_max >= 0.0) || !(s.p_dch_max >= 0.0)) add("StoragePowerNegative", f + ": power bounds must be >= 0");
            check_schedule(f + ".e_min_by_year", s.e_min_by_year);
            check_schedule(f + ".e_max_by_year", s.e_max_by_year);
            check_schedule(f + ".e_init_by_year", s.e_init_by_year);
            if (!(s.cycle_cost_per_MWh >= 0.0)) add("CostNegative", f + ".cycle_cost_per_MWh is negative");
            if (!(s.aux_power_ratio >= 0.0)) add("StorageAuxNegative", f + ".aux_power_ratio is negative");
            if (!(s.supply_emission_t_per_MWh >= 0.0)) add("EmissionFactorNegative", f + ".supply_emission_t_per_MWh is negative");
            const size_t ny = inst_.time.years.size();
            bool sched_ok = true;
            for (const auto* v : {&s.e_min_by_year, &s.e_max_by_year, &s.e_init_by_year})
                if (!v->empty() && v->size() != ny) sched_ok = false;
            if (!sched_ok) continue;
            for (size_t y = 0; y < std::max<size_t>(ny, 1); ++y) {
                const std::string at = ny ? " in " + std::to_string(inst_.time.years[y]) : "";
                const double lo = ny ? s.min_at(y) : s.e_min;
                const double hi = ny ? s.max_at(y) : s.e_max;
                const double init = ny ? s.init_at(y) : s.e_init;
                if (!(lo >= 0.0) || !(lo <= hi)) {
                    add("StorageBoundsInverted", f + ": e_min=" + fmt(lo) + " > e_max=" + fmt(hi) + at);
                } else if (!(init >= lo && init <= hi)) {
                    add("StorageInitOutOfBounds", f + ": e_init=" + fmt(init) + " outside [" + fmt(lo) + "," + fmt(hi) + "]" + at);
                }
            }
        }
        for (Carrier c : {Carrier::kHeat, Carrier::kHydrogen})
            if (!seen.count(c)) add("StorageMissing", std::string("storages: no ") + to_string(c) + " storage");
    }

    void check_demand_response() {
        const auto& d = inst_.demands;
        const std::pair<const char*, double> ratios[] = {{"dr_up_ratio_el", d.dr_up_ratio_el},
                                                         {"dr_down_ratio_el", d.dr_down_ratio_el},
                                                         {"dr_up_ratio_h", d.dr_up_ratio_h},
                                                         {"dr_down_ratio_h", d.dr_down_ratio_h}};
        for (const auto& [key, v] : ratios)
            if (!(v >= 0.0 && v <= 1.0)) add("DrRatioOutOfRange", std::string("demands.") + key + " " + fmt(v) + " out of [0,1]");
        if (!(d.dr_penalty_per_MWh >= 0.0)) add("CostNegative", "demands.dr_penalty_per_MWh is negative");
    }

    void check_misc() {
        if (!(inst_.export_limit_MW >= 0.0)) add("ExportLimitNegative", "grid.export_limit_MW is negative");
        if (!(inst_.fuel_emission_coeff >= 0.0)) add("EmissionFactorNegative", "fuels.emission_t_per_unit is negative");
        const auto& f = inst_.fuels;
        if (!(f.gas_max_per_period >= 0.0) || !(f.bio_max_per_period >= 0.0))
            add("CapacityNegative", "fuels: supply limits must be >= 0");
        if (!(f.energy_MWh_per_unit > 0.0)) add("FuelLhvInvalid", "fuels.energy_MWh_per_unit must be positive");
        if (!std::isfinite(f.gas_price_per_unit) || !std::isfinite(f.bio_price_per_unit))
            add("NonFinite", "fuels: prices must be finite");
        if (!(inst_.robust.dev_fraction >= 0.0 && inst_.robust.dev_fraction < 1.0))
            add("DevFractionOutOfRange", "robust.dev_fraction out of [0,1)");
    }

    void check_policy() {
        const auto& p = inst_.policy;
        if (!(p.tax_base_per_t <= p.tax_cap_per_t)) add("TaxScheduleInvalid", "policy: tax_base_per_t exceeds tax_cap_per_t");
        if (!(p.tax_escalation_per_t_per_year >= 0.0)) add("TaxScheduleInvalid", "policy: tax escalation is negative");
        if (!(p.tax_base_per_t >= 0.0)) add("TaxScheduleInvalid", "policy: tax_base_per_t is negative");
        if (p.nz_base_emissions_t && !(*p.nz_base_emissions_t > 0.0))
            add("NetZeroBaseInvalid", "policy: nz_base_emissions_t must be > 0");
        const int base = p.nz_base_year.value_or(inst_.time.years.empty() ? p.nz_target_year - 1 : inst_.time.years.front());
        if (p.nz_target_year <= base && p.mode == PolicyMode::kNetZero)
            add("NetZeroTargetInvalid", "policy: nz_target_year must be after the net-zero base year");
    }

    const HubInstance& inst_;
    std::vector<Violation> out_;
};

}  // namespace

std::vector<Violation> validate(const HubInstance& instance) { return Validator(instance).run(); }

// ---------------------------------------------------------------------------
// JSON

namespace {

class Reader {
public:
    explicit Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("expected an object");
    }

    [[noreturn]] void fail(const std::string& msg) const { throw InstanceError("parse error at " + path_ + ": " + msg); }

    bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    Reader child(const char* key) const {
        if (!has(key)) throw InstanceError("parse error: missing required field " + sub(key));
        return Reader(j_.at(key), sub(key));
    }

    std::string sub(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    double num(const char* key, double fallback) const {
        if (!has(key)) return fallback;
        return as_number(j_.at(key), sub(key));
    }
    double num_required(const char* key) const {
        if (!has(key)) throw InstanceError("parse error: missing required field " + sub(key));
        return as_number(j_.at(key), sub(key));
    }
    std::optional<double> opt_num(const char* key) const {
        if (!has(key)) return std::nullopt;
        return as_number(j_.at(key), sub(key));
    }
    int integer(const char* key, int fallback) const {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_number_integer()) throw InstanceError("parse error at " + sub(key) + ": expected an integer");
        return v.get<int>();
    }
    std::string str(const char* key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_string()) throw InstanceError("parse error at " + sub(key) + ": expected a string");
        return v.get<std::string>();
    }
    std::vector<double> vec(const char* key) const {
        std::vector<double> out;
        if (!has(key)) return out;
        const auto& v = j_.at(key);
        if (!v.is_array()) throw InstanceError("parse error at " + sub(key) + ": expected an array");
        for (size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], sub(key) + "[" + std::to_string(i) + "]"));
        return out;
    }
    Series series(const char* key) const {
        Series out;
        if (!has(key)) return out;
        const auto& v = j_.at(key);
        if (!v.is_array()) throw InstanceError("parse error at " + sub(key) + ": expected an array of arrays");
        for (size_t y = 0; y < v.size(); ++y) {
            if (!v[y].is_array()) throw InstanceError("parse error at " + sub(key) + "[" + std::to_string(y) + "]: expected an array");
            std::vector<double> row;
            for (size_t t = 0; t < v[y].size(); ++t)
                row.push_back(as_number(v[y][t], sub(key) + "[" + std::to_string(y) + "][" + std::to_string(t) + "]"));
            out.push_back(std::move(row));
        }
        return out;
    }
    std::vector<Reader> list(const char* key) const {
        std::vector<Reader> out;
        if (!has(key)) return out;
        const auto& v = j_.at(key);
        if (!v.is_array()) throw InstanceError("parse error at " + sub(key) + ": expected an array");
        for (size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i], sub(key) + "[" + std::to_string(i) + "]");
        return out;
    }
    const json& raw() const { return j_; }

private:
    static double as_number(const json& v, const std::string& where) {
        if (v.is_number()) return v.get<double>();
        // Infinite values travel as strings because JSON has no literal.
        if (v.is_string()) {
            const auto s = v.get<std::string>();
            if (s == "inf" || s == "+inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
            if (s == "-inf" || s == "-Infinity") return -std::numeric_limits<double>::infinity();
        }
        throw InstanceError("parse error at " + where + ": expected a number");
    }

    const json& j_;
    std::string path_;
};

json number_json(double v) {
    if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
    return v;
}

}  // namespace

nlohmann::json to_json(const HubInstance& inst) {
    json doc;
    doc["schema"] = kSchemaVersion;
    doc["name"] = inst.name;
    doc["time"] = {{"years", inst.time.years},
                   {"periods_per_year", inst.time.periods_per_year},
                   {"period_duration_h", inst.time.period_duration_h}};

    json segs = json::array();
    for (const auto& s : inst.segments) {
        json j{{"name", s.name},
               {"max_purchase_MW", s.max_purchase_MW},
               {"min_share", s.min_share},
               {"price_per_MWh", s.price_per_MWh},
               {"emission_factor_t_per_MWh", s.emission_factor_t_per_MWh},
               {"generation_efficiency", s.generation_efficiency}};
        if (s.ramp_limit_MW) j["ramp_limit_MW"] = *s.ramp_limit_MW;
        segs.push_back(std::move(j));
    }
    doc["grid"] = {{"export_limit_MW", inst.export_limit_MW},
                   {"buy_price_per_MWh", inst.prices.buy_per_MWh},
                   {"sell_price_per_MWh", inst.prices.sell_per_MWh},
                   {"segments", segs}};

    doc["fuels"] = {{"emission_t_per_unit", inst.fuel_emission_coeff},
                    {"gas_price_per_unit", inst.fuels.gas_price_per_unit},
                    {"bio_price_per_unit", inst.fuels.bio_price_per_unit},
                    {"gas_max_per_period", number_json(inst.fuels.gas_max_per_period)},
                    {"bio_max_per_period", number_json(inst.fuels.bio_max_per_period)},
                    {"energy_MWh_per_unit", inst.fuels.energy_MWh_per_unit}};

    json techs = json::array();
    for (const auto& t : inst.techs) {
        json j{{"kind", to_string(t.kind)}};
        switch (t.kind) {
            case TechKind::kBoiler:
                j["efficiency"] = t.efficiency;
                j["fuel_lhv"] = t.fuel_lhv;
                break;
            case TechKind::kChp:
                j["eta_e"] = t.eta_e;
                j["eta_h"] = t.eta_h;
                j["fuel_lhv"] = t.fuel_lhv;
                break;
            case TechKind::kElectricChiller:
            case TechKind::kAbsorptionChiller: j["cop"] = t.cop; break;
            case TechKind::kElectrolyzer: j["efficiency"] = t.efficiency; break;
        }
        j["max_input_per_period"] = t.max_input_per_period;
        if (!t.max_input_by_year.empty()) j["max_input_by_year"] = t.max_input_by_year;
        j["om_cost_per_MWh"] = t.om_cost_per_MWh;
        if (!t.learning_multiplier_by_year.empty()) j["learning_multiplier_by_year"] = t.learning_multiplier_by_year;
        techs.push_back(std::move(j));
    }
    doc["techs"] = techs;

    json stores = json::array();
    for (const auto& s : inst.storages) {
        json j{{"carrier", to_string(s.carrier)},
               {"e_min", s.e_min},
               {"e_max", s.e_max},
               {"p_ch_max", s.p_ch_max},
               {"p_dch_max", s.p_dch_max},
               {"eta_ch", s.eta_ch},
               {"eta_dch", s.eta_dch},
               {"e_init", s.e_init},
               {"cycle_cost_per_MWh", s.cycle_cost_per_MWh}};
        if (!s.e_min_by_year.empty()) j["e_min_by_year"] = s.e_min_by_year;
        if (!s.e_max_by_year.empty()) j["e_max_by_year"] = s.e_max_by_year;
        if (!s.e_init_by_year.empty()) j["e_init_by_year"] = s.e_init_by_year;
        if (s.carrier == Carrier::kHydrogen) {
            j["supply_price_per_MWh"] = s.supply_price_per_MWh;
            j["supply_emission_t_per_MWh"] = s.supply_emission_t_per_MWh;
        }
        if (s.carrier == Carrier::kCold) j["aux_power_ratio"] = s.aux_power_ratio;
        stores.push_back(std::move(j));
    }
    doc["storages"] = stores;

    const auto& d = inst.demands;
    doc["demands"] = {{"electricity_MWh", d.electricity_MWh},
                      {"heat_MWh", d.heat_MWh},
                      {"cooling_MWh", d.cooling_MWh},
                      {"ev_MWh", d.ev_MWh},
                      {"hv_MWh", d.hv_MWh},
                      {"dr_up_ratio_el", d.dr_up_ratio_el},
                      {"dr_down_ratio_el", d.dr_down_ratio_el},
                      {"dr_up_ratio_h", d.dr_up_ratio_h},
                      {"dr_down_ratio_h", d.dr_down_ratio_h},
                      {"dr_penalty_per_MWh", d.dr_penalty_per_MWh}};
    doc["renewables"] = {{"pv_MW", inst.renewables.pv_MW}, {"wind_MW", inst.renewables.wind_MW}};

    const auto& p = inst.policy;
    json pol{{"mode", to_string(p.mode)},
             {"tax_base_per_t", p.tax_base_per_t},
             {"tax_escalation_per_t_per_year", p.tax_escalation_per_t_per_year},
             {"tax_cap_per_t", p.tax_cap_per_t},
             {"tax_base_year", p.tax_base_year},
             {"nz_target_year", p.nz_target_year}};
    if (p.nz_base_emissions_t) pol["nz_base_emissions_t"] = *p.nz_base_emissions_t;
    if (p.nz_base_year) pol["nz_base_year"] = *p.nz_base_year;
    doc["policy"] = pol;
    doc["robust"] = {{"dev_fraction", inst.robust.dev_fraction}};
    return doc;
}

HubInstance from_json(const nlohmann::json& doc) {
    const Reader root(doc, "");
    const std::string schema = root.str("schema", "");
    if (schema != kSchemaVersion)
        throw InstanceError("schema error: expected schema \"" + std::string(kSchemaVersion) + "\", got \"" + schema + "\"");

    HubInstance inst;
    inst.name = root.str("name", "");

    const Reader time = root.child("time");
    if (!time.has("years") || !time.raw().at("years").is_array()) time.fail("missing years array");
    for (const auto& y : time.raw().at("years")) {
        if (!y.is_number_integer()) time.fail("years must be integers");
        inst.time.years.push_back(y.get<int>());
    }
    inst.time.periods_per_year = time.integer("periods_per_year", 48);
    inst.time.period_duration_h = time.num("period_duration_h", 1.0);

    const Reader grid = root.child("grid");
    inst.export_limit_MW = grid.num("export_limit_MW", 0.0);
    inst.prices.buy_per_MWh = grid.series("buy_price_per_MWh");
    inst.prices.sell_per_MWh = grid.series("sell_price_per_MWh");
    for (const auto& s : grid.list("segments")) {
        GridSegment seg;
        seg.name = s.str("name", "");
        seg.max_purchase_MW = s.num("max_purchase_MW", 0.0);
        seg.min_share = s.num("min_share", 0.0);
        seg.price_per_MWh = s.num("price_per_MWh", 0.0);
        seg.emission_factor_t_per_MWh = s.num("emission_factor_t_per_MWh", 0.0);
        seg.ramp_limit_MW = s.opt_num("ramp_limit_MW");
        seg.generation_efficiency = s.num("generation_efficiency", 1.0);
        inst.segments.push_back(std::move(seg));
    }

    if (root.has("fuels")) {
        const Reader f = root.child("fuels");
        inst.fuel_emission_coeff = f.num("emission_t_per_unit", 0.0);
        inst.fuels.gas_price_per_unit = f.num("gas_price_per_unit", 0.0);
        inst.fuels.bio_price_per_unit = f.num("bio_price_per_unit", 0.0);
        inst.fuels.gas_max_per_period = f.num("gas_max_per_period", inst.fuels.gas_max_per_period);
        inst.fuels.bio_max_per_period = f.num("bio_max_per_period", inst.fuels.bio_max_per_period);
        inst.fuels.energy_MWh_per_unit = f.num("energy_MWh_per_unit", 1.0);
    }

    for (const auto& t : root.list("techs")) {
        ConversionTech tech;
        const std::string kind = t.str("kind", "");
        const auto k = tech_kind_from_string(kind);
        if (!k) t.fail("unknown tech kind '" + kind + "'");
        tech.kind = *k;
        tech.efficiency = t.num("efficiency", 1.0);
        tech.eta_e = t.num("eta_e", 0.0);
        tech.eta_h = t.num("eta_h", 0.0);
        tech.cop = t.num("cop", 1.0);
        tech.fuel_lhv = t.num("fuel_lhv", 1.0);
        tech.max_input_per_period = t.num("max_input_per_period", 0.0);
        tech.max_input_by_year = t.vec("max_input_by_year");
        tech.om_cost_per_MWh = t.num("om_cost_per_MWh", 0.0);
        tech.learning_multiplier_by_year = t.vec("learning_multiplier_by_year");
        inst.techs.push_back(std::move(tech));
    }

    for (const auto& s : root.list("storages")) {
        StorageTech st;
        const std::string carrier = s.str("carrier", "");
        const auto c = carrier_from_string(carrier);
        if (!c) s.fail("unknown storage carrier '" + carrier + "'");
        st.carrier = *c;
        st.e_min = s.num("e_min", 0.0);
        st.e_max = s.num("e_max", 0.0);
        st.e_min_by_year = s.vec("e_min_by_year");
        st.e_max_by_year = s.vec("e_max_by_year");
        st.p_ch_max = s.num("p_ch_max", 0.0);
        st.p_dch_max = s.num("p_dch_max", 0.0);
        st.eta_ch = s.num("eta_ch", 1.0);
        st.eta_dch = s.num("eta_dch", 1.0);
        st.e_init = s.num("e_init", 0.0);
        st.e_init_by_year = s.vec("e_init_by_year");
        st.cycle_cost_per_MWh = s.num("cycle_cost_per_MWh", 0.0);
        st.supply_price_per_MWh = s.num("supply_price_per_MWh", 0.0);
        st.supply_emission_t_per_MWh = s.num("supply_emission_t_per_MWh", 0.0);
        st.aux_power_ratio = s.num("aux_power_ratio", 0.0);
        inst.storages.push_back(std::move(st));
    }

    const Reader d = root.child("demands");
    inst.demands.electricity_MWh = d.series("electricity_MWh");
    inst.demands.heat_MWh = d.series("heat_MWh");
    inst.demands.cooling_MWh = d.series("cooling_MWh");
    inst.demands.ev_MWh = d.series("ev_MWh");
    inst.demands.hv_MWh = d.series("hv_MWh");
    inst.demands.dr_up_ratio_el = d.num("dr_up_ratio_el", 0.0);
    inst.demands.dr_down_ratio_el = d.num("dr_down_ratio_el", 0.0);
    inst.demands.dr_up_ratio_h = d.num("dr_up_ratio_h", 0.0);
    inst.demands.dr_down_ratio_h = d.num("dr_down_ratio_h", 0.0);
    inst.demands.dr_penalty_per_MWh = d.num("dr_penalty_per_MWh", 0.0);

    const Reader r = root.child("renewables");
    inst.renewables.pv_MW = r.series("pv_MW");
    inst.renewables.wind_MW = r.series("wind_MW");

    if (root.has("policy")) {
        const Reader p = root.child("policy");
        const std::string mode = p.str("mode", "none");
        const auto m = policy_mode_from_string(mode);
        if (!m) p.fail("unknown policy mode '" + mode + "'");
        inst.policy.mode = *m;
        inst.policy.tax_base_per_t = p.num("tax_base_per_t", inst.policy.tax_base_per_t);
        inst.policy.tax_escalation_per_t_per_year =
            p.num("tax_escalation_per_t_per_year", inst.policy.tax_escalation_per_t_per_year);
        inst.policy.tax_cap_per_t = p.num("tax_cap_per_t", inst.policy.tax_cap_per_t);
        inst.policy.tax_base_year = p.integer("tax_base_year", inst.policy.tax_base_year);
        inst.policy.nz_base_emissions_t = p.opt_num("nz_base_emissions_t");
        inst.policy.nz_target_year = p.integer("nz_target_year", inst.policy.nz_target_year);
        if (p.has("nz_base_year")) inst.policy.nz_base_year = p.integer("nz_base_year", 0);
    }
    if (root.has("robust")) inst.robust.dev_fraction = root.child("robust").num("dev_fraction", 0.30);
    return inst;
}

HubInstance parse_instance(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InstanceError(std::string("parse error: ") + e.what());
    }
    HubInstance inst = from_json(doc);
    auto violations = validate(inst);
    if (!violations.empty()) {
        const std::string first = violations.front().code + ": " + violations.front().message;
        throw InstanceError("validation error: " + first, std::move(violations));
    }
    return inst;
}

HubInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InstanceError("cannot open instance file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_instance(ss.str());
}

void save_instance(const HubInstance& instance, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InstanceError("cannot write instance file: " + path);
    out << to_json(instance).dump(1) << '\n';
}

std::string data_dir() {
    if (const char* env = std::getenv("HUBOPT_DATA_DIR"); env && *env) return env;
    return HUBOPT_DATA_DIR;
}

std::string bundled_instance_path(const std::string& file) { return data_dir() + "/" + file; }

}  // namespace hubopt
