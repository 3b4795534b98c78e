#include <set>

#include "doctest.h"
#include "hubopt/hub_model.hpp"
#include "support/invariants.hpp"
#include "support/toy_hub.hpp"

using namespace hubopt;
using milp::SolveStatus;

namespace {

const HubInstance& bundled() {
    static const HubInstance inst = load_instance(bundled_instance_path());
    return inst;
}

struct Solved {
    HubModel hub;
    milp::Solution sol;
};

const Solved& bundled_solution() {
    static const Solved s = [] {
        Solved out{build_deterministic(bundled()), {}};
        out.sol = milp::solve(out.hub.model);
        return out;
    }();
    return s;
}

double at(const milp::Solution& s, VarId v) { return s.values[static_cast<size_t>(v)]; }

}  // namespace

TEST_CASE("one electricity balance per period") {
    const HubModel hub = build_deterministic(bundled());
    CHECK(hub.rows.rows("el_balance").size() == 48);
    CHECK(hub.rows.rows("heat_balance").size() == 48);
    CHECK(hub.rows.rows("h2_dyn").size() == 48);
    CHECK(hub.rows.rows("h_storage_netzero").size() == 1);
    CHECK(hub.rows.find("el_balance[2025,1]") >= 0);
    CHECK(hub.rows.find("h2_meet[2025,48,hv]") >= 0);
    CHECK(hub.rows.find("el_balance[2025,49]") == -1);
    CHECK(hub.vars.years() == 1);
    CHECK(hub.vars.periods() == 48);
    hub.model.validate_structure();
}

TEST_CASE("tags are unique and every period symbol has its own column") {
    const HubModel hub = build_deterministic(bundled());
    std::set<std::string> tags;
    for (const auto& c : hub.model.constraints()) {
        REQUIRE_FALSE(c.tag.empty());
        CHECK(tags.insert(c.tag).second);
    }
    std::set<VarId> ids;
    size_t count = 0;
    for (size_t t = 0; t < hub.vars.periods(); ++t)
        for (const auto& [name, id] : VarCatalog::symbols(hub.vars.at(0, t))) {
            CHECK(id >= 0);
            ids.insert(id);
            ++count;
        }
    CHECK(ids.size() == count);
}

TEST_CASE("tag helpers") {
    CHECK(make_tag("el_balance", 2025, 0) == "el_balance[2025,1]");
    CHECK(make_tag("h2_meet", 2030, 11, "hv") == "h2_meet[2030,12,hv]");
    CHECK(tag_family("ramp[2025,3,nuclear,up]") == "ramp");
    CHECK(tag_family("plain") == "plain");
}

TEST_CASE("empty hub costs nothing") {
    const HubModel hub = build_deterministic(testing::toy_hub());
    const auto sol = milp::solve(hub.model);
    REQUIRE(sol.status == SolveStatus::kOptimal);
    CHECK(sol.objective == doctest::Approx(0.0));
    for (double v : sol.values) CHECK(std::abs(v) <= 1e-9);
}

TEST_CASE("single served load at the segment price") {
    // 10 MWh of demand in one period, the only source a 50 $/MWh segment.
    HubInstance inst = testing::toy_hub();
    inst.segments[0].price_per_MWh = 50.0;
    inst.demands.electricity_MWh[0][0] = 10.0;
    const HubModel hub = build_deterministic(inst);
    const auto sol = milp::solve(hub.model);
    REQUIRE(sol.status == SolveStatus::kOptimal);
    CHECK(sol.objective == doctest::Approx(500.0).epsilon(1e-9));
    CHECK(at(sol, hub.vars.at(0, 0).buy) == doctest::Approx(10.0));
}

TEST_CASE("renewables are used before paid imports") {
    HubInstance inst = testing::toy_hub();
    inst.segments[0].price_per_MWh = 40.0;
    inst.demands.electricity_MWh[0] = {30.0, 30.0};
    inst.renewables.pv_MW[0] = {20.0, 0.0};
    inst.renewables.wind_MW[0] = {5.0, 50.0};
    const HubModel hub = build_deterministic(inst);
    const auto sol = milp::solve(hub.model);
    REQUIRE(sol.status == SolveStatus::kOptimal);
    // Period 1 imports 5 MWh; period 2 curtails 20 of 50 MWh wind.
    CHECK(sol.objective == doctest::Approx(200.0));
    CHECK(at(sol, hub.vars.at(0, 1).wind) == doctest::Approx(0.6));
}

TEST_CASE("hydrogen demand is met from the store and the electrolyzer") {
    HubInstance inst = testing::toy_hub();
    inst.segments[0].price_per_MWh = 10.0;
    inst.demands.hv_MWh[0] = {0.0, 30.0};
    const_cast<StorageTech*>(inst.find_storage(Carrier::kHydrogen))->supply_price_per_MWh = 100.0;
    const HubModel hub = build_deterministic(inst);
    const auto sol = milp::solve(hub.model);
    REQUIRE(sol.status == SolveStatus::kOptimal);
    // The store starts empty and bought-in hydrogen costs 100 $/MWh, so the
    // 30 MWh come from the electrolyzer: 30 / 0.75 MWh of electricity at 10.
    CHECK(sol.objective == doctest::Approx(400.0));
    CHECK(testing::check_invariants(inst, hub.vars, sol.values).empty());
}

TEST_CASE("emissions expression") {
    HubInstance inst = testing::toy_hub();
    SUBCASE("no factors means no terms") {
        const HubModel hub = build_deterministic(inst);
        const auto e = emissions_expression(inst, hub.vars);
        CHECK(e.terms.empty());
        CHECK(e.constant == 0.0);
    }
    SUBCASE("fuel coefficient times gas use") {
        inst.fuel_emission_coeff = 0.2;
        const HubModel hub = build_deterministic(inst);
        std::vector<double> x(hub.model.num_variables(), 0.0);
        x[static_cast<size_t>(hub.vars.at(0, 0).g_gas)] = 10.0;
        CHECK(emissions_expression(inst, hub.vars).evaluate(x) == doctest::Approx(2.0));
        CHECK(emissions_expression(inst, hub.vars, 0).evaluate(x) == doctest::Approx(2.0));
    }
    SUBCASE("segment factors and hydrogen supply") {
        inst.segments[0].emission_factor_t_per_MWh = 0.4;
        const_cast<StorageTech*>(inst.find_storage(Carrier::kHydrogen))->supply_emission_t_per_MWh = 0.3;
        const HubModel hub = build_deterministic(inst);
        std::vector<double> x(hub.model.num_variables(), 0.0);
        x[static_cast<size_t>(hub.vars.at(0, 1).seg[0])] = 5.0;
        x[static_cast<size_t>(hub.vars.at(0, 0).h2_ch)] = 10.0;
        CHECK(emissions_expression(inst, hub.vars).evaluate(x) == doctest::Approx(5.0));
    }
}

TEST_CASE("bundled solution satisfies every structural invariant") {
    const Solved& s = bundled_solution();
    REQUIRE(s.sol.status == SolveStatus::kOptimal);
    const auto bad = testing::check_invariants(bundled(), s.hub.vars, s.sol.values);
    for (const auto& b : bad) INFO(b);
    CHECK(bad.empty());
    CHECK(milp::check_feasible(s.hub.model, s.sol.values, 1e-6).empty());
}

TEST_CASE("bundled emissions match a hand recomputation") {
    const Solved& s = bundled_solution();
    REQUIRE(s.sol.status == SolveStatus::kOptimal);
    const HubInstance& inst = bundled();
    double manual = 0.0;
    for (size_t t = 0; t < 48; ++t) {
        const auto& p = s.hub.vars.at(0, t);
        manual += inst.fuel_emission_coeff * (at(s.sol, p.g_gas) + at(s.sol, p.g_bio));
        for (size_t k = 0; k < p.seg.size(); ++k)
            manual += inst.segments[k].emission_factor_t_per_MWh * at(s.sol, p.seg[k]);
        manual += inst.find_storage(Carrier::kHydrogen)->supply_emission_t_per_MWh * at(s.sol, p.h2_ch);
    }
    CHECK(emissions_expression(inst, s.hub.vars).evaluate(s.sol.values) == doctest::Approx(manual).epsilon(1e-12));
    CHECK(manual > 0.0);
}

TEST_CASE("weighted objectives") {
    const Solved& base = bundled_solution();
    REQUIRE(base.sol.status == SolveStatus::kOptimal);
    const HubInstance& inst = bundled();

    const HubModel cost_only = build_weighted(inst, 1.0, 0.0);
    const auto c = milp::solve(cost_only.model);
    REQUIRE(c.status == SolveStatus::kOptimal);
    CHECK(c.objective == doctest::Approx(base.sol.objective).epsilon(1e-9));

    const HubModel emis_only = build_weighted(inst, 0.0, 1.0);
    const auto e = milp::solve(emis_only.model);
    REQUIRE(e.status == SolveStatus::kOptimal);
    const LinearExpr em = emissions_expression(inst, cost_only.vars);
    CHECK(e.objective <= em.evaluate(c.values) + 1e-6);

    const HubModel both = build_weighted(inst, 1.0, 1.0);
    const auto b = milp::solve(both.model);
    REQUIRE(b.status == SolveStatus::kOptimal);
    const double at_cost_opt = both.model.objective().evaluate(c.values);
    const double at_emis_opt = both.model.objective().evaluate(e.values);
    CHECK(b.objective <= std::min(at_cost_opt, at_emis_opt) + 1e-6);
    CHECK(b.objective >= c.objective + e.objective - 1e-6);

    CHECK_THROWS_AS(build_weighted(inst, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_weighted(inst, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("raising a demand never lowers the optimum") {
    // Demand response bounds scale with the load, so they are switched off
    // to isolate the effect of the demand itself.
    HubInstance inst = bundled();
    inst.demands.dr_up_ratio_el = inst.demands.dr_down_ratio_el = 0.0;
    inst.demands.dr_up_ratio_h = inst.demands.dr_down_ratio_h = 0.0;
    const auto base = milp::solve(build_deterministic(inst).model);
    REQUIRE(base.status == SolveStatus::kOptimal);

    for (Series DemandSet::*series : {&DemandSet::electricity_MWh, &DemandSet::heat_MWh, &DemandSet::hv_MWh}) {
        HubInstance up = inst;
        Series& s = up.demands.*series;
        for (auto& v : s[0]) v *= 1.05;
        const auto r = milp::solve(build_deterministic(up).model);
        REQUIRE(r.status == SolveStatus::kOptimal);
        CHECK(r.objective >= base.objective - 1e-6 * std::abs(base.objective));
    }
}

TEST_CASE("invalid instance is refused") {
    HubInstance inst = testing::toy_hub();
    inst.time.periods_per_year = 3;
    CHECK_THROWS_AS(build_deterministic(inst), InstanceError);
}
