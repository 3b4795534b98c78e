#include "hubopt/report.hpp"

#include <algorithm>

#include "hubopt/policy.hpp"

namespace hubopt {

namespace {

double value(std::span<const double> x, VarId v) { return x[static_cast<size_t>(v)]; }

}  // namespace

ScenarioReport metrics(const HubInstance& inst, const VarCatalog& vars, std::span<const double> x,
                       const MetricsOptions& options) {
    ScenarioReport r;
    const size_t ny = vars.years();
    const size_t nt = vars.periods();
    const double dt = inst.time.period_duration_h;
    const auto* ely = inst.find_tech(TechKind::kElectrolyzer);

    std::vector<SupplyRow> rows;
    for (const auto& s : inst.segments) rows.push_back({s.name});
    const size_t base = rows.size();
    for (const char* name : {"pv", "wind", "chp_electricity", "chp_heat", "boiler_heat", "electrolyzer_input",
                             "h2_production", "h2_supply", "h2_delivered", "export", "curtailment"})
        rows.push_back({name});

    double renewable = 0.0, electric_supply = 0.0, ely_in = 0.0, ely_capacity = 0.0;
    for (size_t y = 0; y < ny; ++y) {
        if (ely) ely_capacity += ely->max_input(y) * dt * static_cast<double>(nt);
        for (size_t t = 0; t < nt; ++t) {
            const PeriodVars& p = vars.at(y, t);
            const bool cold = t < nt / 2;
            auto put = [&](size_t k, double v) { (cold ? rows[k].cold_MWh : rows[k].warm_MWh) += v; };

            const double pv = inst.renewables.pv_MW[y][t] * dt * value(x, p.pv);
            const double wind = inst.renewables.wind_MW[y][t] * dt * value(x, p.wind);
            const double echp = value(x, p.echp);
            const double buy = value(x, p.buy);
            double broad = 0.0;
            for (size_t s = 0; s < p.seg.size(); ++s) {
                const double v = value(x, p.seg[s]);
                put(s, v);
                const auto& seg = inst.segments[s];
                if (seg.name == "gas") r.fossil_use_MWh += v / seg.generation_efficiency;
                if (seg.name == "hydro" || seg.name == "biofuel") broad += v;
            }
            r.fossil_use_MWh += value(x, p.g_gas) * inst.fuels.energy_MWh_per_unit;
            // Shares refer to electricity consumed inside the hub; exports are
            // taken out of the renewable output first.
            const double sell = value(x, p.sell);
            renewable += std::max(0.0, pv + wind - sell) + (options.broad_renewables ? broad : 0.0);
            electric_supply += buy + pv + wind + echp - sell;

            const double e_in = value(x, p.ely);
            ely_in += e_in;
            const double h2_made = (ely ? ely->efficiency : 0.0) * e_in;
            r.h2_production_MWh += h2_made;

            put(base + 0, pv);
            put(base + 1, wind);
            put(base + 2, echp);
            put(base + 3, value(x, p.hchp));
            put(base + 4, value(x, p.hb));
            put(base + 5, e_in);
            put(base + 6, h2_made);
            put(base + 7, value(x, p.h2_ch));
            put(base + 8, value(x, p.h2_use));
            put(base + 9, value(x, p.sell));
            put(base + 10, inst.renewables.pv_MW[y][t] * dt + inst.renewables.wind_MW[y][t] * dt - pv - wind);
        }
    }
    r.supply = std::move(rows);
    r.renewable_share_frac = electric_supply > 0.0 ? renewable / electric_supply : 0.0;
    r.electrolyzer_utilization_frac = ely_capacity > 0.0 ? ely_in / ely_capacity : 0.0;

    r.total_emissions_t = emissions_expression(inst, vars).evaluate(x);

    // Cost without carbon monetization, rebuilt from instance data.
    const HubModel probe = build_deterministic(inst);
    r.total_cost = probe.cost.evaluate(x);
    if (options.policy == PolicyMode::kCarbonTax) {
        const CarbonSchedule sched = carbon_schedule(inst);
        for (size_t y = 0; y < ny; ++y)
            r.carbon_cost += sched.rate_per_t[y] * emissions_expression(inst, vars, static_cast<int>(y)).evaluate(x);
        r.total_cost += r.carbon_cost;
    }
    return r;
}

nlohmann::json to_json(const ScenarioReport& r) {
    nlohmann::json supply = nlohmann::json::array();
    for (const auto& s : r.supply)
        supply.push_back({{"source", s.source}, {"cold_day_MWh", s.cold_MWh}, {"warm_day_MWh", s.warm_MWh},
                          {"total_MWh", s.total_MWh()}});
    return {{"total_cost_usd", r.total_cost},
            {"carbon_cost_usd", r.carbon_cost},
            {"total_emissions_t", r.total_emissions_t},
            {"h2_production_MWh", r.h2_production_MWh},
            {"fossil_use_MWh", r.fossil_use_MWh},
            {"renewable_share_frac", r.renewable_share_frac},
            {"electrolyzer_utilization_frac", r.electrolyzer_utilization_frac},
            {"supply", supply}};
}

}  // namespace hubopt
