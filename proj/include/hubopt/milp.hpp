#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hubopt::milp {

using VarId = std::int32_t;
using RowId = std::int32_t;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Integrality { kContinuous, kBinary };
enum class Sense { kLe, kEq, kGe };

/// Thrown when a model references variables that do not exist or carries
/// inconsistent bounds.
class StructureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Term {
    VarId var;
    double coef;
};

/// Sparse linear expression with a constant offset.
struct LinearExpr {
    std::vector<Term> terms;
    double constant = 0.0;

    void add(VarId var, double coef) { terms.push_back({var, coef}); }
    void add(const LinearExpr& other, double scale = 1.0);
    /// Merge duplicate variable ids and drop exact zeros; order by variable id.
    void normalize();
    double evaluate(std::span<const double> values) const;
};

struct Variable {
    std::string name;
    double lower = 0.0;
    double upper = kInf;
    Integrality integrality = Integrality::kContinuous;
};

struct LinearConstraint {
    std::string name;
    std::vector<Term> terms;
    Sense sense = Sense::kLe;
    double rhs = 0.0;
    /// Semantic label such as "el_balance[2025,1]"; empty when unlabelled.
    std::string tag;

    double activity(std::span<const double> values) const;
    /// Amount by which the constraint is violated (0 when satisfied).
    double violation(std::span<const double> values) const;
};

/// Minimization MILP in a solver-neutral form. Ids are dense indices.
class MilpModel {
public:
    VarId add_variable(std::string name, double lower, double upper,
                       Integrality integrality = Integrality::kContinuous);
    VarId add_binary(std::string name) { return add_variable(std::move(name), 0.0, 1.0, Integrality::kBinary); }

    /// Terms with the same variable are merged.
    RowId add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs,
                         std::string tag = {});

    const std::vector<Variable>& variables() const { return variables_; }
    std::vector<Variable>& variables() { return variables_; }
    const std::vector<LinearConstraint>& constraints() const { return constraints_; }
    std::vector<LinearConstraint>& constraints() { return constraints_; }

    const Variable& variable(VarId id) const { return variables_.at(static_cast<size_t>(id)); }
    Variable& variable(VarId id) { return variables_.at(static_cast<size_t>(id)); }
    const LinearConstraint& constraint(RowId id) const { return constraints_.at(static_cast<size_t>(id)); }
    LinearConstraint& constraint(RowId id) { return constraints_.at(static_cast<size_t>(id)); }

    const LinearExpr& objective() const { return objective_; }
    LinearExpr& objective() { return objective_; }
    void set_objective(LinearExpr expr);

    size_t num_variables() const { return variables_.size(); }
    size_t num_constraints() const { return constraints_.size(); }
    size_t num_binaries() const;

    /// Throws StructureError on dangling ids, duplicate terms, non-finite
    /// coefficients or inverted bounds.
    void validate_structure() const;

private:
    std::vector<Variable> variables_;
    std::vector<LinearConstraint> constraints_;
    LinearExpr objective_;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* to_string(SolveStatus status);

struct SolveOptions {
    double eps_feas = 1e-6;
    double eps_int = 1e-6;
    /// Relative gap (incumbent - bound) / max(1, |incumbent|).
    double mip_gap = 1e-6;
    long node_limit = 200000;
    long lp_iteration_limit = 2000000;
};

struct SolveStats {
    long nodes = 0;
    long lp_iterations = 0;
    long lp_solves = 0;
};

struct Solution {
    SolveStatus status = SolveStatus::kInfeasible;
    double objective = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> values;
    double gap = std::numeric_limits<double>::quiet_NaN();
    double best_bound = std::numeric_limits<double>::quiet_NaN();
    SolveStats stats;

    bool has_values() const { return !values.empty(); }
};

/// Narrow backend contract: a model goes in, a Solution comes out.
class Solver {
public:
    virtual ~Solver() = default;
    virtual std::string name() const = 0;
    virtual Solution solve(const MilpModel& model, const SolveOptions& options) const = 0;
};

/// Branch-and-bound over a bounded-variable revised simplex.
class ReferenceSolver final : public Solver {
public:
    std::string name() const override { return "reference"; }
    Solution solve(const MilpModel& model, const SolveOptions& options) const override;
};

/// Backend by name; an empty name consults HUBOPT_SOLVER and falls back to
/// "reference".
std::unique_ptr<Solver> make_solver(std::string name = {});

Solution solve(const MilpModel& model, const SolveOptions& options = {});

/// Same model with every integrality mark cleared.
MilpModel lp_relax(const MilpModel& model);

/// Ids of constraints violated by more than eps; also reports bound
/// violations through `bound_violations` when given.
std::vector<RowId> check_feasible(const MilpModel& model, std::span<const double> values, double eps,
                                  std::vector<VarId>* bound_violations = nullptr);

}  // namespace hubopt::milp
