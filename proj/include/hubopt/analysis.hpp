#pragma once

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hubopt/report.hpp"
#include "hubopt/robust.hpp"
#include "json.hpp"

namespace hubopt {

class AnalysisError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class PerturbMode { kScale, kShift };

const char* to_string(PerturbMode mode);

/// A parameter addressed by a dot path into the instance document, e.g.
/// "fuels.gas_price_per_unit", "demands.hv_MWh", "grid.segments.gas.price_per_MWh"
/// or "storages.hydrogen.e_max". Array elements are picked by name, kind or
/// carrier, or by zero-based index. Every number under the addressed node
/// is perturbed, so a series path moves the whole series.
///
/// Aliases: "demands.total" moves all five demand series together;
/// "policy.carbon_price" moves the tax base and cap (and in scale mode
/// the escalation, so the whole schedule scales).
struct PerturbationSpec {
    std::string path;
    PerturbMode mode = PerturbMode::kScale;
    std::vector<double> levels;
};

/// Copy of the instance with `path` scaled by or shifted by `level`.
/// Throws AnalysisError for paths that do not resolve to a number.
HubInstance perturb(const HubInstance& instance, const std::string& path, PerturbMode mode, double level);

/// Throws AnalysisError unless the path resolves and every level is finite.
void check_spec(const HubInstance& instance, const PerturbationSpec& spec);

struct AnalysisOptions {
    PolicyMode policy = PolicyMode::kCarbonTax;
    /// Also solve the robust counterpart at this budget.
    std::optional<double> robust_gamma;
    SweepOptions robust;
    /// Worker threads for independent solves; results do not depend on it.
    int threads = 1;
};

struct OatRow {
    double level = 0.0;
    milp::SolveStatus status = milp::SolveStatus::kInfeasible;
    double objective = 0.0;
    ScenarioReport report;
    std::optional<milp::SolveStatus> robust_status;
    double robust_objective = 0.0;
};

/// One solve per level with the other inputs held at their nominal value.
/// The net-zero reference emissions are fixed from the unperturbed instance
/// so that the cap does not move with the parameter. Failed solves are
/// recorded and the sweep continues.
std::vector<OatRow> oat_sweep(const HubInstance& instance, const PerturbationSpec& spec,
                              const AnalysisOptions& options = {});

struct TornadoRow {
    std::string parameter;
    PerturbMode mode = PerturbMode::kScale;
    double low_level = 0.0;
    double high_level = 0.0;
    double low_delta = 0.0;
    double high_delta = 0.0;
    milp::SolveStatus low_status = milp::SolveStatus::kOptimal;
    milp::SolveStatus high_status = milp::SolveStatus::kOptimal;
    double swing() const;
};

struct TornadoResult {
    double baseline_objective = 0.0;
    std::vector<TornadoRow> rows;
};

/// Each spec must carry exactly a low and a high level. Deltas are
/// objective(level) - baseline; rows are ranked by the larger absolute
/// delta, ties kept in input order. A failed solve counts as an infinite
/// swing.
TornadoResult tornado(const HubInstance& instance, const std::vector<PerturbationSpec>& specs,
                      const AnalysisOptions& options = {});

/// Carbon price, gas price, electricity, heat and hydrogen demand, grid
/// price, PV, wind and electrolyzer size, each at 0.7 and 1.3.
std::vector<PerturbationSpec> default_tornado_specs();

struct StressResult {
    bool infeasible = false;
    /// First infeasible level, or the last level tried.
    double level = 0.0;
    size_t steps = 0;
    /// Rows whose relaxation restores feasibility at `level`.
    std::vector<std::string> violated_tags;
    /// Minimizer of the total relaxation, restricted to the model's own
    /// variables.
    std::vector<double> elastic_values;
};

/// Escalates the perturbation (scale: 1 + k*step, shift: k*step) until the
/// model turns infeasible or the level passes `max_level`.
StressResult stress_to_infeasibility(const HubInstance& instance, const std::string& path, PerturbMode mode,
                                     double step, double max_level, const AnalysisOptions& options = {});

/// The policy model stress_to_infeasibility solves for a given instance.
MilpModel stress_model(const HubInstance& instance, const AnalysisOptions& options = {});

/// Elastic version of `model`: every row gains nonnegative slack columns
/// and the objective is the total slack. Returns the tags of rows with
/// positive slack and the values of the original columns.
struct ElasticResult {
    milp::SolveStatus status = milp::SolveStatus::kInfeasible;
    double total_slack = 0.0;
    std::vector<std::string> relaxed_tags;
    std::vector<double> values;
};
ElasticResult elastic_relaxation(const MilpModel& model, const milp::SolveOptions& options = {});

enum class Direction { kDown = -1, kFlat = 0, kUp = 1 };

const char* to_string(Direction d);

struct Comparison {
    double gamma = 0.0;
    PolicyMode policy = PolicyMode::kNone;
    milp::SolveStatus det_status = milp::SolveStatus::kInfeasible;
    milp::SolveStatus rob_status = milp::SolveStatus::kInfeasible;
    double det_objective = 0.0;
    double rob_objective = 0.0;
    ScenarioReport det;
    ScenarioReport rob;
    /// (robust - deterministic) / deterministic objective.
    double premium = 0.0;
    Direction cost = Direction::kFlat;
    Direction emissions = Direction::kFlat;
    Direction fossil = Direction::kFlat;
    Direction h2 = Direction::kFlat;
    Direction renewable_share = Direction::kFlat;
    Direction utilization = Direction::kFlat;
};

/// Deterministic and robust solves under the same policy. Throws
/// AnalysisError when gamma is negative or not finite.
Comparison compare_det_rob(const HubInstance& instance, PolicyMode policy, double gamma,
                           const SweepOptions& options = {});

/// Relative tolerance below which a metric difference counts as flat.
inline constexpr double kDirectionTol = 1e-9;

void write_oat_csv(const std::vector<OatRow>& rows, std::ostream& out);
void write_tornado_csv(const TornadoResult& result, std::ostream& out);
void write_compare_csv(const Comparison& c, std::ostream& out);
nlohmann::json to_json(const Comparison& c);
nlohmann::json to_json(const StressResult& s);

}  // namespace hubopt
