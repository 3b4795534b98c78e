#include "hubopt/simplex.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

namespace hubopt::milp::lp {

LpData LpData::from_model(const MilpModel& model) {
    LpData d;
    d.rows = static_cast<int>(model.num_constraints());
    d.cols = static_cast<int>(model.num_variables());
    d.cost.assign(static_cast<size_t>(d.cols), 0.0);
    d.col_lower.resize(static_cast<size_t>(d.cols));
    d.col_upper.resize(static_cast<size_t>(d.cols));
    for (int j = 0; j < d.cols; ++j) {
        const auto& v = model.variables()[static_cast<size_t>(j)];
        d.col_lower[static_cast<size_t>(j)] = v.lower;
        d.col_upper[static_cast<size_t>(j)] = v.upper;
    }
    for (const auto& t : model.objective().terms) d.cost[static_cast<size_t>(t.var)] += t.coef;
    d.cost_offset = model.objective().constant;

    std::vector<int> counts(static_cast<size_t>(d.cols) + 1, 0);
    for (const auto& c : model.constraints())
        for (const auto& t : c.terms) ++counts[static_cast<size_t>(t.var) + 1];
    for (int j = 0; j < d.cols; ++j) counts[static_cast<size_t>(j) + 1] += counts[static_cast<size_t>(j)];
    d.col_start = counts;
    d.row_index.resize(static_cast<size_t>(counts.back()));
    d.value.resize(static_cast<size_t>(counts.back()));
    std::vector<int> fill(counts.begin(), counts.end() - 1);
    d.row_lower.resize(static_cast<size_t>(d.rows));
    d.row_upper.resize(static_cast<size_t>(d.rows));
    for (int i = 0; i < d.rows; ++i) {
        const auto& c = model.constraints()[static_cast<size_t>(i)];
        for (const auto& t : c.terms) {
            const int k = fill[static_cast<size_t>(t.var)]++;
            d.row_index[static_cast<size_t>(k)] = i;
            d.value[static_cast<size_t>(k)] = t.coef;
        }
        switch (c.sense) {
            case Sense::kLe: d.row_lower[static_cast<size_t>(i)] = -kInf; d.row_upper[static_cast<size_t>(i)] = c.rhs; break;
            case Sense::kGe: d.row_lower[static_cast<size_t>(i)] = c.rhs; d.row_upper[static_cast<size_t>(i)] = kInf; break;
            case Sense::kEq: d.row_lower[static_cast<size_t>(i)] = c.rhs; d.row_upper[static_cast<size_t>(i)] = c.rhs; break;
        }
    }
    return d;
}

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

// LU of the basis at the last refactorization followed by a product-form
// eta file for the pivots since then.
class BasisFactor {
public:
    explicit BasisFactor(const LpData& data) : data_(data) {}

    bool factor(const std::vector<int>& head) {
        const int m = data_.rows;
        etas_.clear();
        if (m == 0) return true;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<size_t>(m) * 3);
        for (int p = 0; p < m; ++p) {
            const int j = head[static_cast<size_t>(p)];
            if (j < data_.cols) {
                for (int k = data_.col_start[static_cast<size_t>(j)]; k < data_.col_start[static_cast<size_t>(j) + 1]; ++k)
                    trip.emplace_back(data_.row_index[static_cast<size_t>(k)], p, data_.value[static_cast<size_t>(k)]);
            } else {
                trip.emplace_back(j - data_.cols, p, -1.0);
            }
        }
        basis_.resize(m, m);
        basis_.setFromTriplets(trip.begin(), trip.end());
        basis_.makeCompressed();
        lu_.analyzePattern(basis_);
        lu_.factorize(basis_);
        return lu_.info() == Eigen::Success;
    }

    void ftran(std::vector<double>& v) const {
        if (data_.rows == 0) return;
        Eigen::Map<Eigen::VectorXd> mv(v.data(), data_.rows);
        Eigen::VectorXd sol = lu_.solve(mv);
        mv = sol;
        for (const auto& e : etas_) {
            double& vr = v[static_cast<size_t>(e.row)];
            if (vr == 0.0) continue;
            vr /= e.pivot;
            for (size_t k = 0; k < e.idx.size(); ++k) v[static_cast<size_t>(e.idx[k])] -= e.val[k] * vr;
        }
    }

    void btran(std::vector<double>& v) const {
        if (data_.rows == 0) return;
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double s = v[static_cast<size_t>(it->row)];
            for (size_t k = 0; k < it->idx.size(); ++k) s -= it->val[k] * v[static_cast<size_t>(it->idx[k])];
            v[static_cast<size_t>(it->row)] = s / it->pivot;
        }
        Eigen::Map<Eigen::VectorXd> mv(v.data(), data_.rows);
        Eigen::VectorXd sol = lu_.transpose().solve(mv);
        mv = sol;
    }

    void update(int row, const std::vector<double>& alpha) {
        Eta e;
        e.row = row;
        e.pivot = alpha[static_cast<size_t>(row)];
        for (int i = 0; i < data_.rows; ++i) {
            if (i == row) continue;
            const double a = alpha[static_cast<size_t>(i)];
            if (std::abs(a) > 1e-14) {
                e.idx.push_back(i);
                e.val.push_back(a);
            }
        }
        etas_.push_back(std::move(e));
    }

    size_t num_updates() const { return etas_.size(); }

private:
    struct Eta {
        int row = 0;
        double pivot = 1.0;
        std::vector<int> idx;
        std::vector<double> val;
    };
    const LpData& data_;
    SpMat basis_;
    mutable Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
    std::vector<Eta> etas_;
};

class Simplex {
public:
    Simplex(const LpData& data, const LpOptions& opt, std::span<const double> lower,
            std::span<const double> upper)
        : d_(data), opt_(opt), m_(data.rows), n_(data.cols), total_(data.rows + data.cols), factor_(data) {
        lb_.resize(static_cast<size_t>(total_));
        ub_.resize(static_cast<size_t>(total_));
        cost_.assign(static_cast<size_t>(total_), 0.0);
        for (int j = 0; j < n_; ++j) {
            lb_[static_cast<size_t>(j)] = lower.empty() ? d_.col_lower[static_cast<size_t>(j)] : lower[static_cast<size_t>(j)];
            ub_[static_cast<size_t>(j)] = upper.empty() ? d_.col_upper[static_cast<size_t>(j)] : upper[static_cast<size_t>(j)];
            cost_[static_cast<size_t>(j)] = d_.cost[static_cast<size_t>(j)];
        }
        for (int i = 0; i < m_; ++i) {
            lb_[static_cast<size_t>(n_ + i)] = d_.row_lower[static_cast<size_t>(i)];
            ub_[static_cast<size_t>(n_ + i)] = d_.row_upper[static_cast<size_t>(i)];
        }
        cost_scale_ = 1.0;
        for (double c : cost_) cost_scale_ = std::max(cost_scale_, std::abs(c));
    }

    LpResult run(const Basis* warm) {
        LpResult res;
        for (int j = 0; j < total_; ++j) {
            if (lb_[static_cast<size_t>(j)] > ub_[static_cast<size_t>(j)] + opt_.primal_tol) {
                res.status = LpStatus::kInfeasible;
                res.infeasibility = lb_[static_cast<size_t>(j)] - ub_[static_cast<size_t>(j)];
                return res;
            }
        }
        x_.assign(static_cast<size_t>(total_), 0.0);
        state_.assign(static_cast<size_t>(total_), NonbasicAt::kLower);
        pos_.assign(static_cast<size_t>(total_), -1);
        head_.assign(static_cast<size_t>(m_), 0);

        bool warm_ok = false;
        if (warm && static_cast<int>(warm->head.size()) == m_ && static_cast<int>(warm->state.size()) == total_) {
            head_ = warm->head;
            for (int j = 0; j < total_; ++j) state_[static_cast<size_t>(j)] = warm->state[static_cast<size_t>(j)];
            warm_ok = true;
            for (int p = 0; p < m_; ++p) {
                const int j = head_[static_cast<size_t>(p)];
                if (j < 0 || j >= total_ || pos_[static_cast<size_t>(j)] != -1) { warm_ok = false; break; }
                pos_[static_cast<size_t>(j)] = p;
                state_[static_cast<size_t>(j)] = NonbasicAt::kBasic;
            }
            if (warm_ok) warm_ok = factor_.factor(head_);
        }
        if (!warm_ok) slack_basis();
        for (int j = 0; j < total_; ++j)
            if (pos_[static_cast<size_t>(j)] < 0) place_nonbasic(j);
        compute_basic_values();

        std::vector<double> y(static_cast<size_t>(m_));
        std::vector<double> alpha(static_cast<size_t>(m_));
        int degenerate_run = 0;
        bool bland = false;
        bool confirmed = false;

        while (true) {
            if (iterations_ >= opt_.iteration_limit) {
                res.status = LpStatus::kIterationLimit;
                break;
            }
            if (static_cast<int>(factor_.num_updates()) >= opt_.refactor_interval) refactor();

            const double infeas = infeasibility();
            const bool phase1 = infeas > 0.0;

            for (int p = 0; p < m_; ++p) {
                const int j = head_[static_cast<size_t>(p)];
                y[static_cast<size_t>(p)] = phase1 ? phase1_cost(j) : cost_[static_cast<size_t>(j)];
            }
            factor_.btran(y);

            const double dtol = phase1 ? opt_.dual_tol : opt_.dual_tol * cost_scale_;
            int entering = -1;
            double best = 0.0;
            double entering_d = 0.0;
            for (int j = 0; j < total_; ++j) {
                const NonbasicAt st = state_[static_cast<size_t>(j)];
                if (st == NonbasicAt::kBasic) continue;
                if (lb_[static_cast<size_t>(j)] == ub_[static_cast<size_t>(j)]) continue;
                const double dj = (phase1 ? 0.0 : cost_[static_cast<size_t>(j)]) - column_dot(j, y);
                bool eligible = false;
                if (st == NonbasicAt::kLower) eligible = dj < -dtol;
                else if (st == NonbasicAt::kUpper) eligible = dj > dtol;
                else eligible = std::abs(dj) > dtol;
                if (!eligible) continue;
                if (bland) { entering = j; entering_d = dj; break; }
                if (std::abs(dj) > best) { best = std::abs(dj); entering = j; entering_d = dj; }
            }

            if (entering < 0) {
                // Confirm on a fresh factorization before declaring a verdict.
                if (!confirmed && factor_.num_updates() > 0) {
                    refactor();
                    confirmed = true;
                    continue;
                }
                if (phase1) {
                    res.status = LpStatus::kInfeasible;
                    res.infeasibility = infeas;
                } else {
                    res.status = LpStatus::kOptimal;
                }
                break;
            }
            confirmed = false;

            std::fill(alpha.begin(), alpha.end(), 0.0);
            scatter_column(entering, alpha);
            factor_.ftran(alpha);
            const double dir = entering_d < 0.0 ? 1.0 : -1.0;

            const Step step = ratio_test(entering, dir, alpha, phase1, bland);
            if (step.unbounded) {
                if (phase1) {
                    // Cannot happen in exact arithmetic; recover via refactorization.
                    refactor();
                    ++iterations_;
                    continue;
                }
                res.status = LpStatus::kUnbounded;
                break;
            }

            const double theta = step.theta;
            x_[static_cast<size_t>(entering)] += dir * theta;
            if (theta != 0.0) {
                for (int p = 0; p < m_; ++p) {
                    const double a = alpha[static_cast<size_t>(p)];
                    if (a != 0.0) x_[static_cast<size_t>(head_[static_cast<size_t>(p)])] -= dir * a * theta;
                }
            }
            if (step.flip) {
                const bool to_upper = dir > 0.0;
                state_[static_cast<size_t>(entering)] = to_upper ? NonbasicAt::kUpper : NonbasicAt::kLower;
                x_[static_cast<size_t>(entering)] = to_upper ? ub_[static_cast<size_t>(entering)] : lb_[static_cast<size_t>(entering)];
            } else {
                const int leaving = head_[static_cast<size_t>(step.row)];
                x_[static_cast<size_t>(leaving)] = step.leave_at_upper ? ub_[static_cast<size_t>(leaving)] : lb_[static_cast<size_t>(leaving)];
                state_[static_cast<size_t>(leaving)] = step.leave_at_upper ? NonbasicAt::kUpper : NonbasicAt::kLower;
                pos_[static_cast<size_t>(leaving)] = -1;
                head_[static_cast<size_t>(step.row)] = entering;
                pos_[static_cast<size_t>(entering)] = step.row;
                state_[static_cast<size_t>(entering)] = NonbasicAt::kBasic;
                factor_.update(step.row, alpha);
            }
            ++iterations_;

            if (theta * std::max(1.0, std::abs(entering_d)) <= 1e-12) {
                if (++degenerate_run > opt_.stall_threshold) bland = true;
            } else {
                degenerate_run = 0;
                bland = false;
            }
        }

        res.iterations = iterations_;
        res.x.assign(x_.begin(), x_.begin() + n_);
        res.row_activity.assign(static_cast<size_t>(m_), 0.0);
        for (int j = 0; j < n_; ++j) {
            const double xj = x_[static_cast<size_t>(j)];
            if (xj == 0.0) continue;
            for (int k = d_.col_start[static_cast<size_t>(j)]; k < d_.col_start[static_cast<size_t>(j) + 1]; ++k)
                res.row_activity[static_cast<size_t>(d_.row_index[static_cast<size_t>(k)])] += d_.value[static_cast<size_t>(k)] * xj;
        }
        double obj = d_.cost_offset;
        for (int j = 0; j < n_; ++j) obj += cost_[static_cast<size_t>(j)] * x_[static_cast<size_t>(j)];
        res.objective = obj;
        res.basis.head = head_;
        res.basis.state = state_;
        return res;
    }

private:
    struct Step {
        bool unbounded = false;
        bool flip = false;
        int row = -1;
        bool leave_at_upper = false;
        double theta = 0.0;
    };

    void slack_basis() {
        std::fill(pos_.begin(), pos_.end(), -1);
        for (int j = 0; j < total_; ++j) state_[static_cast<size_t>(j)] = NonbasicAt::kLower;
        for (int i = 0; i < m_; ++i) {
            head_[static_cast<size_t>(i)] = n_ + i;
            pos_[static_cast<size_t>(n_ + i)] = i;
            state_[static_cast<size_t>(n_ + i)] = NonbasicAt::kBasic;
        }
        factor_.factor(head_);
    }

    void place_nonbasic(int j) {
        const double l = lb_[static_cast<size_t>(j)];
        const double u = ub_[static_cast<size_t>(j)];
        NonbasicAt& st = state_[static_cast<size_t>(j)];
        if (st == NonbasicAt::kBasic) st = NonbasicAt::kLower;
        if (std::isfinite(l) && std::isfinite(u)) {
            if (st != NonbasicAt::kUpper) st = NonbasicAt::kLower;
        } else if (std::isfinite(l)) {
            st = NonbasicAt::kLower;
        } else if (std::isfinite(u)) {
            st = NonbasicAt::kUpper;
        } else {
            st = NonbasicAt::kZero;
        }
        x_[static_cast<size_t>(j)] = st == NonbasicAt::kLower ? l : st == NonbasicAt::kUpper ? u : 0.0;
    }

    void refactor() {
        if (!factor_.factor(head_)) {
            slack_basis();
            for (int j = 0; j < total_; ++j)
                if (pos_[static_cast<size_t>(j)] < 0) place_nonbasic(j);
        }
        compute_basic_values();
    }

    void compute_basic_values() {
        std::vector<double> rhs(static_cast<size_t>(m_), 0.0);
        for (int j = 0; j < total_; ++j) {
            if (pos_[static_cast<size_t>(j)] >= 0) continue;
            const double xj = x_[static_cast<size_t>(j)];
            if (xj == 0.0) continue;
            if (j < n_) {
                for (int k = d_.col_start[static_cast<size_t>(j)]; k < d_.col_start[static_cast<size_t>(j) + 1]; ++k)
                    rhs[static_cast<size_t>(d_.row_index[static_cast<size_t>(k)])] -= d_.value[static_cast<size_t>(k)] * xj;
            } else {
                rhs[static_cast<size_t>(j - n_)] += xj;
            }
        }
        factor_.ftran(rhs);
        for (int p = 0; p < m_; ++p) x_[static_cast<size_t>(head_[static_cast<size_t>(p)])] = rhs[static_cast<size_t>(p)];
    }

    double infeasibility() const {
        double s = 0.0;
        for (int p = 0; p < m_; ++p) {
            const int j = head_[static_cast<size_t>(p)];
            const double v = x_[static_cast<size_t>(j)];
            if (v < lb_[static_cast<size_t>(j)] - opt_.primal_tol) s += lb_[static_cast<size_t>(j)] - v;
            else if (v > ub_[static_cast<size_t>(j)] + opt_.primal_tol) s += v - ub_[static_cast<size_t>(j)];
        }
        return s;
    }

    double phase1_cost(int j) const {
        const double v = x_[static_cast<size_t>(j)];
        if (v < lb_[static_cast<size_t>(j)] - opt_.primal_tol) return -1.0;
        if (v > ub_[static_cast<size_t>(j)] + opt_.primal_tol) return 1.0;
        return 0.0;
    }

    double column_dot(int j, const std::vector<double>& y) const {
        if (j >= n_) return -y[static_cast<size_t>(j - n_)];
        double s = 0.0;
        for (int k = d_.col_start[static_cast<size_t>(j)]; k < d_.col_start[static_cast<size_t>(j) + 1]; ++k)
            s += d_.value[static_cast<size_t>(k)] * y[static_cast<size_t>(d_.row_index[static_cast<size_t>(k)])];
        return s;
    }

    void scatter_column(int j, std::vector<double>& v) const {
        if (j >= n_) {
            v[static_cast<size_t>(j - n_)] = -1.0;
            return;
        }
        for (int k = d_.col_start[static_cast<size_t>(j)]; k < d_.col_start[static_cast<size_t>(j) + 1]; ++k)
            v[static_cast<size_t>(d_.row_index[static_cast<size_t>(k)])] += d_.value[static_cast<size_t>(k)];
    }

    // Harris two-pass ratio test; in Bland mode the exact minimum ratio with
    // lowest column index wins.
    Step ratio_test(int q, double dir, const std::vector<double>& alpha, bool phase1, bool bland) const {
        Step step;
        const double tol = opt_.primal_tol;
        const double flip_range = ub_[static_cast<size_t>(q)] - lb_[static_cast<size_t>(q)];

        struct Candidate {
            int row;
            double exact;
            double relaxed;
            bool upper;
            double mag;
        };
        std::vector<Candidate> cands;
        double theta_max = kInf;
        for (int p = 0; p < m_; ++p) {
            const double a = alpha[static_cast<size_t>(p)];
            if (std::abs(a) <= opt_.pivot_tol) continue;
            const double delta = -dir * a;
            const int j = head_[static_cast<size_t>(p)];
            const double v = x_[static_cast<size_t>(j)];
            const double l = lb_[static_cast<size_t>(j)];
            const double u = ub_[static_cast<size_t>(j)];
            Candidate c{p, 0.0, 0.0, false, std::abs(a)};
            if (phase1 && v < l - tol) {
                if (delta <= 0.0) continue;
                c.exact = c.relaxed = (l - v) / delta;
                c.upper = false;
            } else if (phase1 && v > u + tol) {
                if (delta >= 0.0) continue;
                c.exact = c.relaxed = (u - v) / delta;
                c.upper = true;
            } else if (delta > 0.0) {
                if (!std::isfinite(u)) continue;
                c.exact = std::max(0.0, (u - v) / delta);
                c.relaxed = (u + tol - v) / delta;
                c.upper = true;
            } else {
                if (!std::isfinite(l)) continue;
                c.exact = std::max(0.0, (l - v) / delta);
                c.relaxed = (l - tol - v) / delta;
                c.upper = false;
            }
            theta_max = std::min(theta_max, c.relaxed);
            cands.push_back(c);
        }

        if (bland) {
            const Candidate* pick = nullptr;
            for (const auto& c : cands) {
                if (!pick || c.exact < pick->exact - 1e-12 ||
                    (c.exact <= pick->exact + 1e-12 && head_[static_cast<size_t>(c.row)] < head_[static_cast<size_t>(pick->row)]))
                    pick = &c;
            }
            if (std::isfinite(flip_range) && (!pick || flip_range <= pick->exact)) {
                step.flip = true;
                step.theta = flip_range;
                return step;
            }
            if (!pick) {
                step.unbounded = true;
                return step;
            }
            step.row = pick->row;
            step.leave_at_upper = pick->upper;
            step.theta = pick->exact;
            return step;
        }

        if (std::isfinite(flip_range) && flip_range <= theta_max) {
            step.flip = true;
            step.theta = flip_range;
            return step;
        }
        if (cands.empty() || !std::isfinite(theta_max)) {
            step.unbounded = true;
            return step;
        }
        const Candidate* pick = nullptr;
        for (const auto& c : cands) {
            if (c.exact > theta_max) continue;
            if (!pick || c.mag > pick->mag ||
                (c.mag == pick->mag && head_[static_cast<size_t>(c.row)] < head_[static_cast<size_t>(pick->row)]))
                pick = &c;
        }
        step.row = pick->row;
        step.leave_at_upper = pick->upper;
        step.theta = pick->exact;
        return step;
    }

    const LpData& d_;
    LpOptions opt_;
    int m_, n_, total_;
    BasisFactor factor_;
    std::vector<double> lb_, ub_, cost_, x_;
    std::vector<int> head_, pos_;
    std::vector<NonbasicAt> state_;
    double cost_scale_ = 1.0;
    long iterations_ = 0;
};

}  // namespace

LpResult solve(const LpData& data, const LpOptions& options, std::span<const double> col_lower,
               std::span<const double> col_upper, const Basis* warm_start) {
    Simplex simplex(data, options, col_lower, col_upper);
    return simplex.run(warm_start);
}

}  // namespace hubopt::milp::lp
