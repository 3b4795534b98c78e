#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "hubopt/instance.hpp"
#include "hubopt/milp.hpp"

namespace hubopt {

using milp::LinearExpr;
using milp::MilpModel;
using milp::RowId;
using milp::VarId;

/// Decision variables of one (year, period). All flows are energies per
/// period in MWh; renewables enter as dispatch fractions of availability.
struct PeriodVars {
    VarId buy = -1, sell = -1, buy_mode = -1;  // buy_mode = 1 allows imports, 0 allows exports
    std::vector<VarId> seg;                      // per grid segment, instance order
    VarId pv = -1, wind = -1;                    // fraction of available output dispatched
    VarId echp = -1, hchp = -1, hb = -1;
    VarId g_chp = -1, g_b = -1, g_gas = -1, g_bio = -1;
    VarId p_ec = -1, p_ice = -1, p_hac = -1;
    VarId c_ch = -1, c_dch = -1, c_state = -1;
    VarId ely = -1, h2_ch = -1, h2_dch = -1, h2_state = -1, h2_use = -1;
    VarId k_h2_ch = -1, k_h2_dch = -1;
    VarId h_ch = -1, h_dch = -1, h_state = -1;
    VarId k_ch = -1, k_dch = -1;
    VarId dr_up_el = -1, dr_dn_el = -1, i_up_el = -1, i_dn_el = -1;
    VarId dr_up_h = -1, dr_dn_h = -1, i_up_h = -1, i_dn_h = -1;
};

class VarCatalog {
public:
    VarCatalog() = default;
    VarCatalog(size_t years, size_t periods) : years_(years), periods_(periods), vars_(years * periods) {}

    size_t years() const { return years_; }
    size_t periods() const { return periods_; }
    const PeriodVars& at(size_t y, size_t t) const { return vars_.at(y * periods_ + t); }
    PeriodVars& at(size_t y, size_t t) { return vars_.at(y * periods_ + t); }

    /// (symbol, handle) pairs for one period, fixed order. Used for audits
    /// and solution export.
    static std::vector<std::pair<std::string, VarId>> symbols(const PeriodVars& p);

private:
    size_t years_ = 0, periods_ = 0;
    std::vector<PeriodVars> vars_;
};

/// Constraint rows grouped by family; tags are unique across the model.
class ConstraintCatalog {
public:
    void add(const std::string& family, const std::string& tag, RowId row);
    const std::vector<RowId>& rows(const std::string& family) const;
    /// -1 when the tag is unknown.
    RowId find(const std::string& tag) const;
    const std::map<std::string, std::vector<RowId>>& families() const { return families_; }

private:
    std::map<std::string, std::vector<RowId>> families_;
    std::unordered_map<std::string, RowId> by_tag_;
};

/// "family[year,t]" with a 1-based period, plus optional extra qualifier.
std::string make_tag(const std::string& family, int year, size_t t, const std::string& extra = {});
/// Family part of a tag ("el_balance[2025,3]" -> "el_balance").
std::string tag_family(const std::string& tag);

struct HubModel {
    MilpModel model;
    VarCatalog vars;
    ConstraintCatalog rows;
    /// Total cost without carbon monetization (the objective as built).
    LinearExpr cost;
};

/// Full deterministic MILP with the cost objective. Throws InstanceError if
/// the instance does not validate.
HubModel build_deterministic(const HubInstance& instance);

/// Emissions in tonnes: fuel use times the fuel coefficient, grid segment
/// purchases times their factors, and externally supplied hydrogen. A
/// negative year index sums over all years.
LinearExpr emissions_expression(const HubInstance& instance, const VarCatalog& vars, int year_index = -1);

/// Objective w_cost * cost + w_emis * emissions. Throws std::invalid_argument
/// on negative weights or both zero.
HubModel build_weighted(const HubInstance& instance, double w_cost, double w_emis);

}  // namespace hubopt
