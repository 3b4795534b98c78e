#include "hubopt/milp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <queue>
#include <unordered_map>

#include "hubopt/simplex.hpp"

namespace hubopt::milp {

void LinearExpr::add(const LinearExpr& other, double scale) {
    for (const auto& t : other.terms) terms.push_back({t.var, t.coef * scale});
    constant += other.constant * scale;
}

void LinearExpr::normalize() {
    std::map<VarId, double> merged;
    for (const auto& t : terms) merged[t.var] += t.coef;
    terms.clear();
    for (const auto& [v, c] : merged)
        if (c != 0.0) terms.push_back({v, c});
}

double LinearExpr::evaluate(std::span<const double> values) const {
    double s = constant;
    for (const auto& t : terms) s += t.coef * values[static_cast<size_t>(t.var)];
    return s;
}

double LinearConstraint::activity(std::span<const double> values) const {
    double s = 0.0;
    for (const auto& t : terms) s += t.coef * values[static_cast<size_t>(t.var)];
    return s;
}

double LinearConstraint::violation(std::span<const double> values) const {
    const double a = activity(values);
    switch (sense) {
        case Sense::kLe: return std::max(0.0, a - rhs);
        case Sense::kGe: return std::max(0.0, rhs - a);
        case Sense::kEq: return std::abs(a - rhs);
    }
    return 0.0;
}

VarId MilpModel::add_variable(std::string name, double lower, double upper, Integrality integrality) {
    variables_.push_back({std::move(name), lower, upper, integrality});
    return static_cast<VarId>(variables_.size() - 1);
}

RowId MilpModel::add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs,
                                std::string tag) {
    LinearExpr e;
    e.terms = std::move(terms);
    e.normalize();
    constraints_.push_back({std::move(name), std::move(e.terms), sense, rhs, std::move(tag)});
    return static_cast<RowId>(constraints_.size() - 1);
}

void MilpModel::set_objective(LinearExpr expr) {
    expr.normalize();
    objective_ = std::move(expr);
}

size_t MilpModel::num_binaries() const {
    return static_cast<size_t>(std::count_if(variables_.begin(), variables_.end(), [](const Variable& v) {
        return v.integrality == Integrality::kBinary;
    }));
}

void MilpModel::validate_structure() const {
    const auto n = static_cast<VarId>(variables_.size());
    for (const auto& v : variables_) {
        if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper)
            throw StructureError("variable " + v.name + " has inverted or NaN bounds");
        if (v.integrality == Integrality::kBinary && (v.lower < 0.0 || v.upper > 1.0))
            throw StructureError("binary variable " + v.name + " has bounds outside [0,1]");
    }
    auto check_terms = [&](const std::vector<Term>& terms, const std::string& where) {
        std::vector<VarId> seen;
        seen.reserve(terms.size());
        for (const auto& t : terms) {
            if (t.var < 0 || t.var >= n) throw StructureError(where + " references unknown variable id " + std::to_string(t.var));
            if (!std::isfinite(t.coef)) throw StructureError(where + " has a non-finite coefficient");
            seen.push_back(t.var);
        }
        std::sort(seen.begin(), seen.end());
        if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
            throw StructureError(where + " repeats a variable id");
    };
    for (const auto& c : constraints_) {
        check_terms(c.terms, "constraint " + c.name);
        if (std::isnan(c.rhs)) throw StructureError("constraint " + c.name + " has NaN rhs");
    }
    check_terms(objective_.terms, "objective");
}

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::kOptimal: return "optimal";
        case SolveStatus::kInfeasible: return "infeasible";
        case SolveStatus::kUnbounded: return "unbounded";
        case SolveStatus::kIterationLimit: return "iteration_limit";
    }
    return "unknown";
}

MilpModel lp_relax(const MilpModel& model) {
    MilpModel relaxed = model;
    for (auto& v : relaxed.variables()) v.integrality = Integrality::kContinuous;
    return relaxed;
}

std::vector<RowId> check_feasible(const MilpModel& model, std::span<const double> values, double eps,
                                  std::vector<VarId>* bound_violations) {
    std::vector<RowId> out;
    for (size_t i = 0; i < model.num_constraints(); ++i)
        if (model.constraints()[i].violation(values) > eps) out.push_back(static_cast<RowId>(i));
    if (bound_violations) {
        bound_violations->clear();
        for (size_t j = 0; j < model.num_variables(); ++j) {
            const auto& v = model.variables()[j];
            if (values[j] < v.lower - eps || values[j] > v.upper + eps) bound_violations->push_back(static_cast<VarId>(j));
        }
    }
    return out;
}

namespace {

struct Node {
    long id = 0;
    double bound = -kInf;
    int depth = 0;
    std::vector<std::pair<int, double>> fixings;  // binary column -> fixed value
    std::shared_ptr<const lp::Basis> basis;
    double parent_frac = 0.0;  // distance moved by the last fixing
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.id > b.id;
    }
};

class BranchAndBound {
public:
    BranchAndBound(const MilpModel& model, const SolveOptions& opt)
        : model_(model), opt_(opt), data_(lp::LpData::from_model(model)) {
        for (size_t j = 0; j < model.num_variables(); ++j)
            if (model.variables()[j].integrality == Integrality::kBinary) binaries_.push_back(static_cast<int>(j));
        is_binary_.assign(model.num_variables(), 0);
        for (int j : binaries_) is_binary_[static_cast<size_t>(j)] = 1;
        for (int up = 0; up < 2; ++up) {
            pc_sum_[up].assign(model.num_variables(), 0.0);
            pc_count_[up].assign(model.num_variables(), 0);
        }
        lp_opt_.iteration_limit = opt.lp_iteration_limit;
    }

    Solution run() {
        Solution sol;
        const lp::LpResult root = solve_node({}, nullptr);
        if (root.status == lp::LpStatus::kInfeasible) {
            sol.status = SolveStatus::kInfeasible;
            return finish(sol);
        }
        if (root.status == lp::LpStatus::kUnbounded) {
            sol.status = SolveStatus::kUnbounded;
            return finish(sol);
        }
        if (root.status == lp::LpStatus::kIterationLimit) {
            sol.status = SolveStatus::kIterationLimit;
            return finish(sol);
        }

        std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
        long next_id = 0;
        bool limit_hit = false;

        auto process = [&](const Node& node, const lp::LpResult& res) {
            if (res.status != lp::LpStatus::kOptimal) {
                if (res.status == lp::LpStatus::kIterationLimit) limit_hit = true;
                return;
            }
            if (prunable(res.objective)) return;
            if (most_fractional(res.x) < 0) {
                polish(node.fixings, res);
                return;
            }
            if (node.depth == 0 || node.id % 25 == 0) rounding_heuristics(node.fixings, res);
            if (node.depth == 0 || (!has_incumbent_ && node.id % 50 == 0)) dive(node.fixings, res);
            if (prunable(res.objective)) return;
            const int branch = select_branch(node.fixings, res);
            if (branch < 0) return;
            auto basis = std::make_shared<const lp::Basis>(res.basis);
            for (double value : {0.0, 1.0}) {
                Node child;
                child.id = ++next_id;
                child.bound = res.objective;
                child.depth = node.depth + 1;
                child.fixings = node.fixings;
                child.fixings.emplace_back(branch, value);
                const double x = res.x[static_cast<size_t>(branch)];
                child.parent_frac = value > 0.5 ? 1.0 - x : x;
                child.basis = basis;
                open.push(std::move(child));
            }
        };

        process(Node{}, root);
        while (!open.empty()) {
            const Node node = open.top();
            if (has_incumbent_ && gap_closed(node.bound)) break;
            open.pop();
            if (nodes_ >= opt_.node_limit) {
                limit_hit = true;
                break;
            }
            ++nodes_;
            if (prunable(node.bound)) continue;
            const lp::LpResult res = solve_node(node.fixings, node.basis.get());
            if (!node.fixings.empty() && res.status == lp::LpStatus::kOptimal) {
                const auto& [j, v] = node.fixings.back();
                record_pseudocost(j, v > 0.5, res.objective - node.bound, node.parent_frac);
            }
            process(node, res);
        }
        if (!has_incumbent_) {
            sol.status = limit_hit ? SolveStatus::kIterationLimit : SolveStatus::kInfeasible;
            return finish(sol);
        }
        sol.values = incumbent_;
        sol.objective = model_.objective().evaluate(incumbent_);
        const bool exhausted = open.empty() || gap_closed(open.top().bound);
        sol.best_bound = open.empty() ? sol.objective : std::min(open.top().bound, sol.objective);
        sol.gap = std::max(0.0, (sol.objective - sol.best_bound) / std::max(1.0, std::abs(sol.objective)));
        sol.status = (exhausted && !limit_hit) ? SolveStatus::kOptimal : SolveStatus::kIterationLimit;
        if (limit_hit && gap_closed(sol.best_bound)) sol.status = SolveStatus::kOptimal;
        return finish(sol);
    }

private:
    Solution& finish(Solution& sol) {
        sol.stats.nodes = nodes_;
        sol.stats.lp_iterations = lp_iterations_;
        sol.stats.lp_solves = lp_solves_;
        return sol;
    }

    bool gap_closed(double bound) const {
        const double denom = std::max(1.0, std::abs(incumbent_obj_));
        return (incumbent_obj_ - bound) / denom <= opt_.mip_gap;
    }

    bool prunable(double bound) const { return has_incumbent_ && gap_closed(bound); }

    lp::LpResult solve_node(const std::vector<std::pair<int, double>>& fixings, const lp::Basis* warm) {
        std::vector<double> lower = data_.col_lower;
        std::vector<double> upper = data_.col_upper;
        for (const auto& [j, v] : fixings) {
            lower[static_cast<size_t>(j)] = v;
            upper[static_cast<size_t>(j)] = v;
        }
        if (!binaries_.empty()) {
            std::vector<double> lo = lower, up = upper;
            if (!propagate(lo, up)) return {};
            // Only binary fixings reach the LP; implied continuous bounds
            // stay internal to the propagation.
            for (int j : binaries_) {
                lower[static_cast<size_t>(j)] = lo[static_cast<size_t>(j)];
                upper[static_cast<size_t>(j)] = up[static_cast<size_t>(j)];
            }
        }
        lp::LpResult res = lp::solve(data_, lp_opt_, lower, upper, warm);
        lp_iterations_ += res.iterations;
        ++lp_solves_;
        return res;
    }

    // Activity-based bound tightening over all rows. Binaries whose implied
    // range excludes 0 or 1 are fixed. Returns false on a proven conflict.
    bool propagate(std::vector<double>& lo, std::vector<double>& up) const {
        constexpr int kPasses = 8;
        const auto& rows = model_.constraints();
        auto tighten = [&](int j, double bound, bool is_lower, bool& changed) {
            const size_t k = static_cast<size_t>(j);
            const bool binary = is_binary_[k] != 0;
            const double slack = 1e-9 * std::max(1.0, std::abs(bound));
            if (is_lower) {
                if (binary) {
                    if (bound > opt_.eps_int && lo[k] < 1.0) { lo[k] = 1.0; changed = true; }
                } else if (bound - slack > lo[k] + 1e-7 * std::max(1.0, std::abs(lo[k]))) {
                    lo[k] = bound - slack;
                    changed = true;
                }
            } else {
                if (binary) {
                    if (bound < 1.0 - opt_.eps_int && up[k] > 0.0) { up[k] = 0.0; changed = true; }
                } else if (bound + slack < up[k] - 1e-7 * std::max(1.0, std::abs(up[k]))) {
                    up[k] = bound + slack;
                    changed = true;
                }
            }
            return lo[k] <= up[k] + 1e-6 * std::max(1.0, std::abs(lo[k]));
        };
        for (int pass = 0; pass < kPasses; ++pass) {
            bool changed = false;
            for (const auto& row : rows) {
                // Minimum and maximum activity with the count of unbounded terms.
                double min_act = 0.0, max_act = 0.0;
                int min_inf = 0, max_inf = 0;
                for (const auto& t : row.terms) {
                    const size_t k = static_cast<size_t>(t.var);
                    const double a = t.coef;
                    const double l = a > 0 ? lo[k] : up[k];
                    const double h = a > 0 ? up[k] : lo[k];
                    if (std::isinf(l)) ++min_inf; else min_act += a * l;
                    if (std::isinf(h)) ++max_inf; else max_act += a * h;
                }
                const bool has_upper = row.sense != Sense::kGe;
                const bool has_lower = row.sense != Sense::kLe;
                if (has_upper && min_inf == 0 && min_act > row.rhs + 1e-6 * std::max(1.0, std::abs(row.rhs)))
                    return false;
                if (has_lower && max_inf == 0 && max_act < row.rhs - 1e-6 * std::max(1.0, std::abs(row.rhs)))
                    return false;
                for (const auto& t : row.terms) {
                    const size_t k = static_cast<size_t>(t.var);
                    const double a = t.coef;
                    if (has_upper) {
                        const double own = a > 0 ? lo[k] : up[k];
                        const bool own_inf = std::isinf(own);
                        if (min_inf == 0 || (min_inf == 1 && own_inf)) {
                            const double rest = own_inf ? min_act : min_act - a * own;
                            const double b = (row.rhs - rest) / a;
                            if (!tighten(t.var, b, a < 0, changed)) return false;
                        }
                    }
                    if (has_lower) {
                        const double own = a > 0 ? up[k] : lo[k];
                        const bool own_inf = std::isinf(own);
                        if (max_inf == 0 || (max_inf == 1 && own_inf)) {
                            const double rest = own_inf ? max_act : max_act - a * own;
                            const double b = (row.rhs - rest) / a;
                            if (!tighten(t.var, b, a > 0, changed)) return false;
                        }
                    }
                }
            }
            if (!changed) break;
        }
        return true;
    }

    void record_pseudocost(int j, bool up, double delta, double frac) {
        if (frac <= opt_.eps_int || !std::isfinite(delta)) return;
        const size_t k = static_cast<size_t>(j);
        pc_sum_[up][k] += std::max(0.0, delta) / frac;
        ++pc_count_[up][k];
    }

    double pseudocost(size_t k, bool up) const {
        if (pc_count_[up][k] > 0) return pc_sum_[up][k] / pc_count_[up][k];
        double s = 0.0;
        long n = 0;
        for (size_t i = 0; i < pc_sum_[up].size(); ++i) {
            s += pc_sum_[up][i];
            n += pc_count_[up][i];
        }
        return n > 0 ? s / static_cast<double>(n) : 1.0;
    }

    // Reliability branching: candidates without pseudocost history in both
    // directions are strong-branched (a bounded number per node), the rest
    // are scored from pseudocosts. Product score; ties go to the lowest id.
    // Returns -1 when strong branching proves the node infeasible.
    int select_branch(const std::vector<std::pair<int, double>>& fixings, const lp::LpResult& res) {
        constexpr int kReliable = 1;
        constexpr size_t kMaxStrong = 8;
        constexpr double kFloor = 1e-6;
        std::vector<std::pair<double, int>> cands;
        for (int j : binaries_) {
            const double v = res.x[static_cast<size_t>(j)];
            const double f = std::min(v - std::floor(v), std::ceil(v) - v);
            if (f > opt_.eps_int) cands.emplace_back(f, j);
        }
        if (cands.empty()) return -1;
        std::stable_sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

        int best = -1;
        double best_score = -1.0;
        size_t strong = 0;
        for (const auto& [f, j] : cands) {
            const size_t k = static_cast<size_t>(j);
            const double x = res.x[k];
            double d0, d1;
            const bool unreliable = pc_count_[0][k] < kReliable || pc_count_[1][k] < kReliable;
            if (unreliable && strong < kMaxStrong) {
                ++strong;
                double delta[2];
                bool feasible[2];
                for (int up = 0; up < 2; ++up) {
                    auto trial = fixings;
                    trial.emplace_back(j, up ? 1.0 : 0.0);
                    const lp::LpResult child = solve_node(trial, &res.basis);
                    feasible[up] = child.status == lp::LpStatus::kOptimal;
                    delta[up] = feasible[up] ? child.objective - res.objective : kInf;
                    if (feasible[up]) record_pseudocost(j, up, delta[up], up ? 1.0 - x : x);
                    if (feasible[up] && has_incumbent_ && child.objective >= incumbent_obj_) delta[up] = kInf;
                }
                if (!feasible[0] && !feasible[1]) return -1;
                d0 = delta[0];
                d1 = delta[1];
            } else {
                d0 = pseudocost(k, false) * x;
                d1 = pseudocost(k, true) * (1.0 - x);
            }
            const double lo = std::min(d0, d1), hi = std::max(d0, d1);
            const double score = std::isinf(hi) ? (std::isinf(lo) ? kInf : 1e30 + lo)
                                                : std::max(lo, kFloor) * std::max(hi, kFloor);
            if (score > best_score) {
                best_score = score;
                best = j;
            }
        }
        return best;
    }

    // Most fractional binary; ties go to the lowest id.
    int most_fractional(const std::vector<double>& x) const {
        int best = -1;
        double best_score = 0.0;
        for (int j : binaries_) {
            const double v = x[static_cast<size_t>(j)];
            const double score = std::min(v - std::floor(v), std::ceil(v) - v);
            if (score > opt_.eps_int && score > best_score + 1e-12) {
                best = j;
                best_score = score;
            }
        }
        return best;
    }

    // Fix every binary to a rounded value and re-solve the continuous part.
    bool try_fixed(const std::vector<double>& rounded, const lp::Basis* warm) {
        std::vector<std::pair<int, double>> fix;
        fix.reserve(binaries_.size());
        for (int j : binaries_) fix.emplace_back(j, rounded[static_cast<size_t>(j)]);
        const lp::LpResult res = solve_node(fix, warm);
        if (res.status != lp::LpStatus::kOptimal) return false;
        std::vector<double> values = res.x;
        for (int j : binaries_) values[static_cast<size_t>(j)] = rounded[static_cast<size_t>(j)];
        const double obj = model_.objective().evaluate(values);
        if (!has_incumbent_ || obj < incumbent_obj_ - 1e-12 * std::max(1.0, std::abs(obj))) {
            has_incumbent_ = true;
            incumbent_obj_ = obj;
            incumbent_ = std::move(values);
            return true;
        }
        return false;
    }

    void polish(const std::vector<std::pair<int, double>>&, const lp::LpResult& res) {
        if (binaries_.empty()) {
            if (!has_incumbent_ || res.objective < incumbent_obj_) {
                has_incumbent_ = true;
                incumbent_obj_ = model_.objective().evaluate(res.x);
                incumbent_ = res.x;
            }
            return;
        }
        std::vector<double> rounded = res.x;
        for (int j : binaries_) rounded[static_cast<size_t>(j)] = std::round(res.x[static_cast<size_t>(j)]);
        try_fixed(rounded, &res.basis);
    }

    void rounding_heuristics(const std::vector<std::pair<int, double>>&, const lp::LpResult& res) {
        std::vector<double> up = res.x;
        for (int j : binaries_) up[static_cast<size_t>(j)] = res.x[static_cast<size_t>(j)] > opt_.eps_int ? 1.0 : 0.0;
        try_fixed(up, &res.basis);
        std::vector<double> nearest = res.x;
        bool differs = false;
        for (int j : binaries_) {
            nearest[static_cast<size_t>(j)] = std::round(res.x[static_cast<size_t>(j)]);
            differs = differs || nearest[static_cast<size_t>(j)] != up[static_cast<size_t>(j)];
        }
        if (differs) try_fixed(nearest, &res.basis);
    }

    // Fractional diving: repeatedly fix nearly integral binaries to their
    // rounded values and re-solve. On an infeasible child the batch is
    // replaced by a single fixing, tried both ways.
    void dive(std::vector<std::pair<int, double>> fix, const lp::LpResult& start) {
        lp::LpResult cur = start;
        std::vector<char> fixed(model_.num_variables(), 0);
        for (const auto& f : fix) fixed[static_cast<size_t>(f.first)] = 1;
        const size_t max_rounds = binaries_.size() + 1;
        for (size_t round = 0; round < max_rounds; ++round) {
            if (cur.status != lp::LpStatus::kOptimal || prunable(cur.objective)) return;
            std::vector<std::pair<double, int>> frac;
            for (int j : binaries_) {
                if (fixed[static_cast<size_t>(j)]) continue;
                const double v = cur.x[static_cast<size_t>(j)];
                const double f = std::min(v - std::floor(v), std::ceil(v) - v);
                if (f > opt_.eps_int) frac.emplace_back(f, j);
            }
            if (frac.empty()) {
                std::vector<double> rounded = cur.x;
                for (int j : binaries_) rounded[static_cast<size_t>(j)] = std::round(cur.x[static_cast<size_t>(j)]);
                try_fixed(rounded, &cur.basis);
                return;
            }
            std::sort(frac.begin(), frac.end());
            std::vector<std::pair<int, double>> batch;
            for (const auto& [f, j] : frac)
                if (f <= 0.2 || batch.empty()) batch.emplace_back(j, std::round(cur.x[static_cast<size_t>(j)]));
            auto attempt = [&](const std::vector<std::pair<int, double>>& extra) {
                auto trial = fix;
                trial.insert(trial.end(), extra.begin(), extra.end());
                lp::LpResult r = solve_node(trial, &cur.basis);
                if (r.status != lp::LpStatus::kOptimal) return false;
                fix = std::move(trial);
                for (const auto& e : extra) fixed[static_cast<size_t>(e.first)] = 1;
                cur = std::move(r);
                return true;
            };
            if (attempt(batch)) continue;
            const auto [j, v] = batch.front();
            if (batch.size() > 1 && attempt({{j, v}})) continue;
            if (!attempt({{j, 1.0 - v}})) return;
        }
    }

    const MilpModel& model_;
    SolveOptions opt_;
    lp::LpData data_;
    lp::LpOptions lp_opt_;
    std::vector<int> binaries_;
    std::vector<char> is_binary_;
    std::vector<double> pc_sum_[2];
    std::vector<long> pc_count_[2];
    bool has_incumbent_ = false;
    double incumbent_obj_ = kInf;
    std::vector<double> incumbent_;
    long nodes_ = 0;
    long lp_iterations_ = 0;
    long lp_solves_ = 0;
};

}  // namespace

Solution ReferenceSolver::solve(const MilpModel& model, const SolveOptions& options) const {
    model.validate_structure();
    BranchAndBound bb(model, options);
    return bb.run();
}

std::unique_ptr<Solver> make_solver(std::string name) {
    if (name.empty()) {
        if (const char* env = std::getenv("HUBOPT_SOLVER")) name = env;
    }
    if (name.empty() || name == "reference") return std::make_unique<ReferenceSolver>();
    throw std::invalid_argument("unknown solver backend '" + name + "'");
}

Solution solve(const MilpModel& model, const SolveOptions& options) {
    return make_solver()->solve(model, options);
}

}  // namespace hubopt::milp
