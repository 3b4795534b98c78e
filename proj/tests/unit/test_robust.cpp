#include <sstream>

#include "doctest.h"
#include "hubopt/policy.hpp"
#include "hubopt/robust.hpp"
#include "support/invariants.hpp"
#include "support/robust_oracle.hpp"
#include "support/toy_hub.hpp"

using namespace hubopt;
using milp::Sense;
using milp::SolveStatus;

namespace {

struct Toy {
    HubInstance inst = testing::robust_toy();
    HubModel hub = build_deterministic(inst);
    UncertaintySpec spec = derive_uncertainty(inst, hub, 0.30);
};

// max x subject to 2x <= 10 with the coefficient 2 uncertain by 0.6.
struct Single {
    milp::MilpModel model;
    UncertaintySpec spec;
    Single() {
        const VarId x = model.add_variable("x", 0.0, milp::kInf);
        model.add_constraint("cap", {{x, 2.0}}, Sense::kLe, 10.0, "cap");
        milp::LinearExpr obj;
        obj.add(x, -1.0);
        model.set_objective(obj);
        spec.protected_families = {"cap"};
        spec.entries.push_back({"cap", x, "x", 2.0, 0.6});
    }
};

double solve_obj(const milp::MilpModel& m) {
    const auto s = milp::solve(m);
    REQUIRE(s.status == SolveStatus::kOptimal);
    return s.objective;
}

}  // namespace

TEST_CASE("derived uncertainty covers renewables and demands") {
    const HubInstance inst = load_instance(bundled_instance_path());
    const HubModel hub = build_deterministic(inst);
    const UncertaintySpec spec = derive_uncertainty(inst, hub, 0.30);
    const auto groups = spec.groups();
    size_t el = 0, hv = 0;
    for (const auto& [tag, members] : groups) {
        if (tag_family(tag) == "el_balance") {
            ++el;
            CHECK(members.size() == 4);
        } else {
            ++hv;
            CHECK(tag_family(tag) == "h2_meet");
            CHECK(members.size() == 1);
        }
    }
    CHECK(el == 48);
    CHECK(hv == 48);
    CHECK(spec.max_group_size() == 4);
    for (const auto& e : spec.entries) CHECK(e.deviation == doctest::Approx(0.30 * std::abs(e.nominal)));

    SUBCASE("zero fraction gives zero deviations") {
        for (const auto& e : derive_uncertainty(inst, hub, 0.0).entries) CHECK(e.deviation == 0.0);
    }
    SUBCASE("wind nominal 100 deviates by 30") {
        HubInstance w = testing::toy_hub();
        w.renewables.wind_MW[0][0] = 100.0;
        const HubModel h = build_deterministic(w);
        const auto s = derive_uncertainty(w, h, 0.30);
        bool found = false;
        for (const auto& e : s.entries)
            if (e.label == "wind" && e.tag == "el_balance[2025,1]") {
                CHECK(e.deviation == doctest::Approx(30.0));
                found = true;
            }
        CHECK(found);
    }
    CHECK_THROWS_AS(derive_uncertainty(inst, hub, 1.5), RobustError);
}

TEST_CASE("single-row counterpart") {
    Single s;
    SUBCASE("budget one takes the full deviation") {
        s.spec.gamma = 1.0;
        CHECK(solve_obj(robustify(s.model, s.spec)) == doctest::Approx(-10.0 / 2.6).epsilon(1e-9));
    }
    SUBCASE("budget zero is the nominal row") {
        CHECK(solve_obj(robustify(s.model, s.spec)) == doctest::Approx(-5.0));
    }
    SUBCASE("half budget protects against half the deviation") {
        s.spec.gamma = 0.5;
        CHECK(solve_obj(robustify(s.model, s.spec)) == doctest::Approx(-10.0 / 2.3).epsilon(1e-9));
    }
    SUBCASE("interval counterpart folds the deviation in") {
        const auto m = interval_counterpart(s.model, s.spec);
        CHECK(m.constraint(0).terms[0].coef == doctest::Approx(2.6));
        CHECK(solve_obj(m) == doctest::Approx(-10.0 / 2.6).epsilon(1e-9));
    }
    SUBCASE("protected rows keep their position") {
        s.spec.gamma = 1.0;
        const auto m = robustify(s.model, s.spec);
        CHECK(m.constraint(0).tag == "cap");
        CHECK(m.variable(0).name == "x");
        CHECK(m.num_variables() > s.model.num_variables());
    }
}

TEST_CASE("mixed-sign column gets a magnitude variable") {
    // x in [-5, 5], row x <= 2 with deviation 1 on x: worst case
    // x + |x| <= 2, so the largest feasible x is 1.
    milp::MilpModel m;
    const VarId x = m.add_variable("x", -5.0, 5.0);
    m.add_constraint("r", {{x, 1.0}}, Sense::kLe, 2.0, "r");
    milp::LinearExpr obj;
    obj.add(x, -1.0);
    m.set_objective(obj);
    UncertaintySpec spec;
    spec.protected_families = {"r"};
    spec.entries.push_back({"r", x, "x", 1.0, 1.0});
    spec.gamma = 1.0;
    CHECK(solve_obj(robustify(m, spec)) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(interval_counterpart(m, spec), RobustError);
}

TEST_CASE("uncertain constants sit on a pinned column") {
    Toy t;
    t.spec.gamma = 1.0;
    const auto m = robustify(t.hub.model, t.spec);
    size_t pinned = 0;
    for (const auto& v : m.variables())
        if (v.name == "robust_one") {
            ++pinned;
            CHECK(v.lower == 1.0);
            CHECK(v.upper == 1.0);
        }
    CHECK(pinned == 1);
}

TEST_CASE("budget zero reproduces the deterministic optimum") {
    Toy t;
    const double det = solve_obj(t.hub.model);
    CHECK(solve_obj(robustify(t.hub.model, t.spec)) == doctest::Approx(det).epsilon(1e-9));
}

TEST_CASE("objective grows with the budget and saturates at the interval model") {
    Toy t;
    double last = solve_obj(t.hub.model);
    for (double g : {0.5, 1.0, 1.5, 2.0, 3.0, 4.0}) {
        t.spec.gamma = g;
        const double v = solve_obj(robustify(t.hub.model, t.spec));
        CHECK(v >= last - 1e-7);
        last = v;
    }
    t.spec.gamma = static_cast<double>(t.spec.max_group_size());
    const double interval = solve_obj(interval_counterpart(t.hub.model, t.spec));
    CHECK(last == doctest::Approx(interval).epsilon(1e-9));
    t.spec.gamma = 10.0;
    CHECK(solve_obj(robustify(t.hub.model, t.spec)) == doctest::Approx(interval).epsilon(1e-9));
}

TEST_CASE("counterpart matches brute force over deviation vertices") {
    Toy t;
    for (double g : {0.0, 1.0, 2.0, 0.5, 1.5}) {
        CAPTURE(g);
        t.spec.gamma = g;
        const double robust = solve_obj(robustify(t.hub.model, t.spec));
        const double brute = solve_obj(testing::scenario_expansion(t.hub.model, t.spec));
        CHECK(robust == doctest::Approx(brute).epsilon(1e-9));
    }
}

TEST_CASE("budget vertices") {
    CHECK(testing::budget_vertices(4, 0.0).size() == 1);
    CHECK(testing::budget_vertices(4, 1.0).size() == 9);
    CHECK(testing::budget_vertices(4, 2.0).size() == 33);
    CHECK(testing::budget_vertices(2, 5.0).size() == 9);
    // One full coordinate and one half coordinate, or either alone.
    CHECK(testing::budget_vertices(3, 1.5).size() == 1 + 6 + 6 + 6 * 4);
}

TEST_CASE("worst-case audit") {
    Toy t;
    const auto det = milp::solve(t.hub.model);
    REQUIRE(det.status == SolveStatus::kOptimal);

    SUBCASE("deterministic plan is exposed once deviations are allowed") {
        t.spec.gamma = 1.0;
        const AuditResult a = worst_case_audit(t.hub.model, t.spec, det.values);
        CHECK(a.max_violation > 1e-3);
        CHECK_FALSE(a.worst_tag.empty());
        CHECK(a.rows_checked == t.spec.groups().size());
    }
    SUBCASE("zero deviations never violate a nominal-feasible plan") {
        const UncertaintySpec zero = derive_uncertainty(t.inst, t.hub, 0.0, 2.0);
        CHECK(worst_case_audit(t.hub.model, zero, det.values).max_violation <= 1e-9);
    }
    SUBCASE("robust plans pass the audit at their own budget") {
        for (double g : {0.5, 1.0, 2.0, 4.0}) {
            t.spec.gamma = g;
            const auto r = milp::solve(robustify(t.hub.model, t.spec));
            REQUIRE(r.status == SolveStatus::kOptimal);
            CHECK(worst_case_audit(t.hub.model, t.spec, r.values).max_violation <= 1e-6);
            CHECK(testing::check_invariants(t.inst, t.hub.vars, r.values, true).empty());
        }
    }
    SUBCASE("size guard") {
        UncertaintySpec big;
        big.protected_families = {"el_balance"};
        for (int j = 0; j < 21; ++j) big.entries.push_back({"el_balance[2025,1]", -1, "d", 1.0, 0.1});
        CHECK_THROWS_AS(worst_case_audit(t.hub.model, big, det.values), RobustError);
    }
}

TEST_CASE("splitting equalities leaves no room for demand deviations") {
    Toy t;
    t.spec.equality_mode = EqualityMode::kSplit;
    CHECK(milp::solve(robustify(t.hub.model, t.spec)).status == SolveStatus::kOptimal);
    t.spec.gamma = 1.0;
    CHECK(milp::solve(robustify(t.hub.model, t.spec)).status == SolveStatus::kInfeasible);
    CHECK(milp::solve(testing::scenario_expansion(t.hub.model, t.spec)).status == SolveStatus::kInfeasible);
}

TEST_CASE("spec errors") {
    Toy t;
    SUBCASE("negative budget") {
        t.spec.gamma = -1.0;
        CHECK_THROWS_AS(robustify(t.hub.model, t.spec), RobustError);
    }
    SUBCASE("unresolved locator") {
        t.spec.entries.push_back({"el_balance[2030,1]", -1, "electricity", 1.0, 0.3});
        CHECK_THROWS_WITH_AS(robustify(t.hub.model, t.spec), "unresolved uncertainty locator el_balance[2030,1]",
                             RobustError);
    }
    SUBCASE("row outside the protected families") {
        t.spec.entries.push_back({"heat_balance[2025,1]", -1, "heat", 1.0, 0.3});
        CHECK_THROWS_AS(robustify(t.hub.model, t.spec), RobustError);
    }
    SUBCASE("negative deviation") {
        t.spec.entries.front().deviation = -0.1;
        CHECK_THROWS_AS(robustify(t.hub.model, t.spec), RobustError);
    }
    SUBCASE("per-row budgets must be non-negative") {
        t.spec.row_gamma["el_balance[2025,1]"] = -2.0;
        CHECK_THROWS_AS(robustify(t.hub.model, t.spec), RobustError);
    }
}

TEST_CASE("per-row budget overrides the global one") {
    Single s;
    s.spec.gamma = 0.0;
    s.spec.row_gamma["cap"] = 1.0;
    CHECK(solve_obj(robustify(s.model, s.spec)) == doctest::Approx(-10.0 / 2.6).epsilon(1e-9));
}

TEST_CASE("gamma sweep") {
    HubInstance inst = testing::robust_toy();
    const double det = solve_obj(build_deterministic(inst).model);
    const auto pts = gamma_sweep(inst, PolicyMode::kNone, {0.0, 1.0, 2.0, 4.0});
    REQUIRE(pts.size() == 4);
    CHECK(pts[0].solution.objective == doctest::Approx(det).epsilon(1e-9));
    for (size_t k = 1; k < pts.size(); ++k) {
        REQUIRE(pts[k].solution.status == SolveStatus::kOptimal);
        CHECK(pts[k].solution.objective >= pts[k - 1].solution.objective - 1e-7);
    }
    CHECK(pts[3].report.total_cost == doctest::Approx(pts[3].solution.objective).epsilon(1e-9));
    CHECK_THROWS_AS(gamma_sweep(inst, PolicyMode::kNone, {1.0, 0.0}), RobustError);

    std::ostringstream csv;
    write_gamma_csv(pts, csv);
    const std::string text = csv.str();
    CHECK(text.rfind("gamma,status,objective_usd,emissions_t,h2_production_MWh,fossil_use_MWh,"
                     "renewable_share_frac,electrolyzer_utilization_frac\n",
                     0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
    CHECK(text.find("\n4,optimal,") != std::string::npos);
}

TEST_CASE("robust net-zero reference follows the budget") {
    HubInstance inst = testing::robust_toy();
    inst.policy.nz_base_year = 2000;
    const double e_det = reference_emissions(inst);
    CHECK(robust_reference_emissions(inst, 0.0) == doctest::Approx(e_det).epsilon(1e-9));
    CHECK(robust_reference_emissions(inst, 2.0) >= e_det - 1e-9);

    SweepOptions fixed;
    fixed.robust_reference = false;
    const RobustSetup a = prepare_robust(inst, PolicyMode::kNetZero, fixed, 2.0);
    CHECK(*a.instance.policy.nz_base_emissions_t == doctest::Approx(e_det).epsilon(1e-9));
    const RobustSetup b = prepare_robust(inst, PolicyMode::kNetZero, {}, 2.0);
    CHECK(*b.instance.policy.nz_base_emissions_t == doctest::Approx(robust_reference_emissions(inst, 2.0)));
    CHECK(b.spec.gamma == 2.0);

    inst.policy.nz_base_emissions_t = 7.0;
    const RobustSetup c = prepare_robust(inst, PolicyMode::kNetZero, {}, 2.0);
    CHECK(*c.instance.policy.nz_base_emissions_t == 7.0);
}
