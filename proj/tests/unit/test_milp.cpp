#include <random>

#include "doctest.h"
#include "hubopt/lp_format.hpp"
#include "hubopt/milp.hpp"
#include "hubopt/simplex.hpp"
#include "support/enumeration.hpp"
#include "support/random_milp.hpp"

using namespace hubopt::milp;

TEST_CASE("single continuous variable") {
    MilpModel m;
    const VarId x = m.add_variable("x", 0.0, 1.0);
    LinearExpr obj;
    obj.add(x, -1.0);
    m.set_objective(obj);
    const Solution s = solve(m);
    REQUIRE(s.status == SolveStatus::kOptimal);
    CHECK(s.objective == doctest::Approx(-1.0));
    CHECK(s.values[0] == doctest::Approx(1.0));
}

TEST_CASE("0/1 knapsack in minimization form") {
    // max 3x1 + 4x2 s.t. 2x1 + 3x2 <= 4; enumeration of {0,1}^2 gives
    // (0,0)=0, (1,0)=3, (0,1)=4, (1,1) infeasible.
    MilpModel m;
    const VarId x1 = m.add_binary("x1");
    const VarId x2 = m.add_binary("x2");
    m.add_constraint("cap", {{x1, 2.0}, {x2, 3.0}}, Sense::kLe, 4.0);
    LinearExpr obj;
    obj.add(x1, -3.0);
    obj.add(x2, -4.0);
    m.set_objective(obj);
    const Solution s = solve(m);
    REQUIRE(s.status == SolveStatus::kOptimal);
    CHECK(s.objective == doctest::Approx(-4.0));
    CHECK(s.values[static_cast<size_t>(x2)] == 1.0);
    CHECK(s.values[static_cast<size_t>(x1)] == 0.0);

    SUBCASE("relaxation bounds the integer optimum") {
        const MilpModel relaxed = lp_relax(m);
        CHECK(relaxed.num_binaries() == 0);
        CHECK(relaxed.variable(x1).lower == 0.0);
        CHECK(relaxed.variable(x1).upper == 1.0);
        const Solution r = solve(relaxed);
        REQUIRE(r.status == SolveStatus::kOptimal);
        // LP optimum: x1 = 1, x2 = 2/3 -> -3 - 8/3.
        CHECK(r.objective == doctest::Approx(-3.0 - 8.0 / 3.0));
        CHECK(r.objective <= s.objective + 1e-9);
    }
}

TEST_CASE("contradictory equalities are infeasible") {
    MilpModel m;
    const VarId x1 = m.add_variable("x1", 0.0, 1.0);
    const VarId x2 = m.add_variable("x2", 0.0, 1.0);
    m.add_constraint("sum", {{x1, 1.0}, {x2, 1.0}}, Sense::kEq, 1.0);
    m.add_constraint("diff", {{x1, 1.0}, {x2, -1.0}}, Sense::kEq, 3.0);
    CHECK(solve(m).status == SolveStatus::kInfeasible);
}

TEST_CASE("unbounded ray is detected") {
    MilpModel m;
    const VarId x = m.add_variable("x", 0.0, kInf);
    const VarId y = m.add_variable("y", 0.0, kInf);
    m.add_constraint("r", {{x, 1.0}, {y, -1.0}}, Sense::kLe, 2.0);
    LinearExpr obj;
    obj.add(x, -1.0);
    m.set_objective(obj);
    CHECK(solve(m).status == SolveStatus::kUnbounded);
}

TEST_CASE("free variables and ranged structure") {
    // min |x - 3| written with a free x and an epigraph t.
    MilpModel m;
    const VarId x = m.add_variable("x", -kInf, kInf);
    const VarId t = m.add_variable("t", 0.0, kInf);
    m.add_constraint("a", {{t, 1.0}, {x, -1.0}}, Sense::kGe, -3.0);
    m.add_constraint("b", {{t, 1.0}, {x, 1.0}}, Sense::kGe, 3.0);
    m.add_constraint("c", {{x, 1.0}}, Sense::kLe, 1.0);
    LinearExpr obj;
    obj.add(t, 1.0);
    m.set_objective(obj);
    const Solution s = solve(m);
    REQUIRE(s.status == SolveStatus::kOptimal);
    CHECK(s.objective == doctest::Approx(2.0));
    CHECK(s.values[static_cast<size_t>(x)] == doctest::Approx(1.0));
}

TEST_CASE("highly degenerate assignment LP terminates") {
    // 6x6 assignment polytope: massively degenerate vertices.
    MilpModel m;
    const int n = 6;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.add_variable("a" + std::to_string(i) + std::to_string(j), 0.0, kInf);
    for (int i = 0; i < n; ++i) {
        std::vector<Term> row, col;
        for (int j = 0; j < n; ++j) {
            row.push_back({i * n + j, 1.0});
            col.push_back({j * n + i, 1.0});
        }
        m.add_constraint("row" + std::to_string(i), row, Sense::kEq, 1.0);
        m.add_constraint("col" + std::to_string(i), col, Sense::kEq, 1.0);
    }
    LinearExpr obj;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) obj.add(i * n + j, static_cast<double>((i * 7 + j * 3) % 5));
    m.set_objective(obj);
    const Solution s = solve(m);
    REQUIRE(s.status == SolveStatus::kOptimal);
    // Each row i picks a column with (7i + 3j) % 5 == 0 and such a perfect
    // matching exists (j = 3i mod 5 for i < 5, distinct), so the optimum is 0
    // for five rows; the sixth row/column pair costs (35 + 15) % 5 = 0.
    CHECK(s.objective == doctest::Approx(0.0));
    CHECK(check_feasible(m, s.values, 1e-9).empty());
}

TEST_CASE("check_feasible reports violated rows and bounds") {
    MilpModel m;
    const VarId x = m.add_variable("x", 0.0, 5.0);
    m.add_constraint("cap", {{x, 1.0}}, Sense::kLe, 1.0);
    std::vector<double> values{2.0};
    std::vector<VarId> bad_bounds;
    const auto rows = check_feasible(m, values, 1e-9, &bad_bounds);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0] == 0);
    CHECK(bad_bounds.empty());
    values[0] = 0.5;
    CHECK(check_feasible(m, values, 1e-9).empty());
}

TEST_CASE("structural validation rejects dangling ids") {
    MilpModel m;
    m.add_variable("x", 0.0, 1.0);
    m.add_constraint("bad", {{3, 1.0}}, Sense::kLe, 1.0);
    CHECK_THROWS_AS(solve(m), StructureError);

    MilpModel inverted;
    inverted.add_variable("x", 2.0, 1.0);
    CHECK_THROWS_AS(inverted.validate_structure(), StructureError);
}

TEST_CASE("node limit returns the incumbent with iteration_limit") {
    std::mt19937_64 rng(7);
    const MilpModel m = hubopt::testing::random_milp(rng, {12, 10, 12});
    SolveOptions opt;
    opt.node_limit = 1;
    const Solution s = solve(m, opt);
    CHECK((s.status == SolveStatus::kIterationLimit || s.status == SolveStatus::kOptimal));
    if (s.has_values()) CHECK(check_feasible(m, s.values, 1e-6).empty());
}

TEST_CASE("branch-and-bound matches exhaustive enumeration") {
    std::mt19937_64 rng(20240611);
    for (int k = 0; k < 25; ++k) {
        CAPTURE(k);
        const MilpModel m = hubopt::testing::random_milp(rng, {2 + k % 9, 3 + k % 12, 4 + k % 9});
        const auto expected = hubopt::testing::enumerate_binaries(m);
        const Solution s = solve(m);
        REQUIRE(expected.has_value());
        REQUIRE(s.status == SolveStatus::kOptimal);
        CHECK(s.objective == doctest::Approx(*expected).epsilon(1e-9).scale(1.0));
        CHECK(check_feasible(m, s.values, 1e-6).empty());

        // Relaxation bound property.
        const Solution r = solve(lp_relax(m));
        REQUIRE(r.status == SolveStatus::kOptimal);
        CHECK(r.objective <= s.objective + 1e-7);
    }
}

TEST_CASE("solve is deterministic") {
    std::mt19937_64 rng(99);
    const MilpModel m = hubopt::testing::random_milp(rng, {10, 12, 14});
    const Solution a = solve(m);
    const Solution b = solve(m);
    REQUIRE(a.status == b.status);
    CHECK(a.objective == b.objective);
    CHECK(a.values == b.values);
    CHECK(a.stats.nodes == b.stats.nodes);
}

TEST_CASE("warm-started LP reproduces the cold optimum") {
    std::mt19937_64 rng(3);
    const MilpModel m = lp_relax(hubopt::testing::random_milp(rng, {0, 15, 12}));
    const auto data = lp::LpData::from_model(m);
    const auto cold = lp::solve(data);
    REQUIRE(cold.status == lp::LpStatus::kOptimal);
    std::vector<double> upper = data.col_upper;
    upper[0] = std::max(data.col_lower[0], cold.x[0] * 0.5);
    const auto ref = lp::solve(data, {}, data.col_lower, upper);
    const auto warm = lp::solve(data, {}, data.col_lower, upper, &cold.basis);
    REQUIRE(ref.status == warm.status);
    if (ref.status == lp::LpStatus::kOptimal) CHECK(warm.objective == doctest::Approx(ref.objective));
}

TEST_CASE("LP export subset") {
    MilpModel m;
    const VarId x = m.add_binary("x[2025,1]");
    const VarId y = m.add_variable("y", -kInf, kInf);
    const VarId z = m.add_variable("z", 1.0, 1.0);
    const VarId w = m.add_variable("w", -2.0, 4.5);
    m.add_constraint("c[a,b]", {{x, 2.0}, {y, -1.5}}, Sense::kLe, 4.0);
    m.add_constraint("e", {{z, 1.0}, {w, 1.0}}, Sense::kEq, 2.0);
    m.add_constraint("g", {{w, 1.0}}, Sense::kGe, -1.0);
    LinearExpr obj;
    obj.add(x, 1.0);
    obj.add(w, -0.25);
    obj.constant = 3.0;
    m.set_objective(obj);
    const std::string expected =
        "\\ hubopt LP export\n"
        "\\ objective constant: 3\n"
        "Minimize\n"
        " obj: + 1 x(2025.1) - 0.25 w\n"
        "Subject To\n"
        " c(a.b): + 2 x(2025.1) - 1.5 y <= 4\n"
        " n_e: + 1 z + 1 w = 2\n"
        " g: + 1 w >= -1\n"
        "Bounds\n"
        " y free\n"
        " z = 1\n"
        " -2 <= w <= 4.5\n"
        "Binaries\n"
        " x(2025.1)\n"
        "End\n";
    CHECK(to_lp_string(m) == expected);
}
