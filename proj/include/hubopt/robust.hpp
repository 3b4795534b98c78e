#pragma once

#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hubopt/hub_model.hpp"
#include "hubopt/report.hpp"

namespace hubopt {

class RobustError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// One uncertain term of a protected row. `var` is -1 for a constant on
/// the right-hand side (a demand); the constant's nominal value is then its
/// contribution to the row's rhs.
struct UncertainCoefficient {
    std::string tag;
    VarId var = -1;
    std::string label;
    double nominal = 0.0;
    double deviation = 0.0;
};

/// How protected equalities are treated. kCover protects only the
/// adequacy direction (left side >= right side); kSplit protects both
/// inequality halves.
enum class EqualityMode { kCover, kSplit };

struct UncertaintySpec {
    std::vector<UncertainCoefficient> entries;
    double gamma = 0.0;
    std::set<std::string> protected_families{"el_balance", "h2_dyn", "h2_meet"};
    /// Per-row budgets keyed by row tag; rows not listed use `gamma`.
    std::map<std::string, double> row_gamma;
    EqualityMode equality_mode = EqualityMode::kCover;

    double gamma_for(const std::string& tag) const;
    /// Entry indices grouped per protected row (J_i), ordered by first
    /// appearance.
    std::vector<std::pair<std::string, std::vector<size_t>>> groups() const;
    size_t max_group_size() const;
};

/// PV and wind availability coefficients plus electricity, EV and hydrogen
/// vehicle demand constants, each with deviation dev_fraction * |nominal|.
UncertaintySpec derive_uncertainty(const HubInstance& instance, const HubModel& hub, double dev_fraction = 0.30,
                                   double gamma = 0.0);

/// Budgeted robust counterpart. Protected rows keep their index; auxiliary
/// variables and rows are appended, so values of the nominal variables sit
/// at the same positions in a robust solution.
MilpModel robustify(const MilpModel& model, const UncertaintySpec& spec);

/// Interval (full worst case) counterpart with deviations folded into the
/// coefficients, used to check the saturated budget.
MilpModel interval_counterpart(const MilpModel& model, const UncertaintySpec& spec);

struct AuditResult {
    double max_violation = 0.0;
    std::string worst_tag;
    size_t rows_checked = 0;
    size_t scenarios = 0;
};

/// Brute force over deviation vertices: z in {-1,0,1}^J with sum |z| <= Gamma
/// (plus one fractional coordinate when Gamma is fractional), evaluated on
/// the nominal rows at the given point. Throws RobustError when a row has
/// more than 20 uncertain terms.
AuditResult worst_case_audit(const MilpModel& nominal, const UncertaintySpec& spec, std::span<const double> values);

struct GammaPoint {
    double gamma = 0.0;
    milp::Solution solution;
    ScenarioReport report;
};

struct SweepOptions {
    double dev_fraction = 0.30;
    EqualityMode equality_mode = EqualityMode::kCover;
    /// When the instance leaves the net-zero reference unset, take it from
    /// the no-policy model protected at the same budget (false: always the
    /// deterministic no-policy model).
    bool robust_reference = true;
    milp::SolveOptions solve;
};

/// Copy of the instance with the net-zero reference emissions filled in
/// (solving the no-policy model when needed) so repeated builds agree.
HubInstance with_reference_emissions(const HubInstance& instance, PolicyMode mode,
                                     const milp::SolveOptions& options = {});

/// Year-one emissions of the no-policy model protected at `gamma`.
double robust_reference_emissions(const HubInstance& instance, double gamma, const SweepOptions& options = {});

/// Deterministic model under `mode` plus the uncertainty spec derived from it,
/// with spec.gamma set to `gamma`.
struct RobustSetup {
    HubInstance instance;
    HubModel hub;
    UncertaintySpec spec;
};
RobustSetup prepare_robust(const HubInstance& instance, PolicyMode mode, const SweepOptions& options,
                           double gamma = 0.0);

/// One robust solve per Gamma; gammas must be ascending.
std::vector<GammaPoint> gamma_sweep(const HubInstance& instance, PolicyMode mode, const std::vector<double>& gammas,
                                    const SweepOptions& options = {});

void write_gamma_csv(const std::vector<GammaPoint>& points, std::ostream& out);

}  // namespace hubopt
