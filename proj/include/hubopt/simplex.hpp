#pragma once

// Bounded-variable revised primal simplex used by the reference MILP solver.
//
// Every row i of A x (sense) b is given a logical column r_i with
// A x - r = 0 and bounds on r taken from the row sense, so the only
// equality system is homogeneous and the initial basis is all-logical.
// Phase I minimizes the sum of bound infeasibilities of basic variables.

#include <span>
#include <vector>

#include "hubopt/milp.hpp"

namespace hubopt::milp::lp {

/// Column-compressed constraint matrix plus per-column and per-row bounds.
struct LpData {
    int rows = 0;
    int cols = 0;
    std::vector<int> col_start;  // size cols + 1
    std::vector<int> row_index;
    std::vector<double> value;
    std::vector<double> cost;
    std::vector<double> col_lower;
    std::vector<double> col_upper;
    std::vector<double> row_lower;
    std::vector<double> row_upper;
    double cost_offset = 0.0;

    static LpData from_model(const MilpModel& model);
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

enum class NonbasicAt : unsigned char { kLower, kUpper, kZero, kBasic };

/// Basis snapshot usable as a warm start for a problem with the same shape.
struct Basis {
    std::vector<int> head;             // column per basis position (size rows)
    std::vector<NonbasicAt> state;     // per column (size cols + rows)
    bool empty() const { return head.empty(); }
};

struct LpOptions {
    double primal_tol = 1e-9;
    double dual_tol = 1e-9;
    double pivot_tol = 1e-9;
    long iteration_limit = 2000000;
    int refactor_interval = 80;
    /// Consecutive degenerate pivots before switching to Bland's rule.
    int stall_threshold = 60;
};

struct LpResult {
    LpStatus status = LpStatus::kInfeasible;
    double objective = 0.0;
    std::vector<double> x;             // structural values
    std::vector<double> row_activity;  // A x
    Basis basis;
    long iterations = 0;
    double infeasibility = 0.0;        // phase-I residual when infeasible
};

/// Solve min c'x subject to row and column bounds. `col_lower`/`col_upper`
/// override the bounds stored in `data` when non-empty.
LpResult solve(const LpData& data, const LpOptions& options = {},
               std::span<const double> col_lower = {}, std::span<const double> col_upper = {},
               const Basis* warm_start = nullptr);

}  // namespace hubopt::milp::lp
