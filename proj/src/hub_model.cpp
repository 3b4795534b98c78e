#include "hubopt/hub_model.hpp"

#include <algorithm>
#include <stdexcept>

namespace hubopt {

using milp::Integrality;
using milp::kInf;
using milp::Sense;
using milp::Term;

std::string make_tag(const std::string& family, int year, size_t t, const std::string& extra) {
    std::string s = family + "[" + std::to_string(year) + "," + std::to_string(t + 1);
    if (!extra.empty()) s += "," + extra;
    return s + "]";
}

std::string tag_family(const std::string& tag) {
    const auto pos = tag.find('[');
    return pos == std::string::npos ? tag : tag.substr(0, pos);
}

void ConstraintCatalog::add(const std::string& family, const std::string& tag, RowId row) {
    if (!by_tag_.emplace(tag, row).second) throw std::logic_error("duplicate constraint tag " + tag);
    families_[family].push_back(row);
}

const std::vector<RowId>& ConstraintCatalog::rows(const std::string& family) const {
    static const std::vector<RowId> kEmpty;
    const auto it = families_.find(family);
    return it == families_.end() ? kEmpty : it->second;
}

RowId ConstraintCatalog::find(const std::string& tag) const {
    const auto it = by_tag_.find(tag);
    return it == by_tag_.end() ? -1 : it->second;
}

std::vector<std::pair<std::string, VarId>> VarCatalog::symbols(const PeriodVars& p) {
    std::vector<std::pair<std::string, VarId>> out{
        {"buy", p.buy},         {"sell", p.sell},       {"buy_mode", p.buy_mode}, {"pv", p.pv},
        {"wind", p.wind},       {"echp", p.echp},       {"hchp", p.hchp},
        {"hb", p.hb},           {"g_chp", p.g_chp},     {"g_b", p.g_b},             {"g_gas", p.g_gas},
        {"g_bio", p.g_bio},     {"p_ec", p.p_ec},       {"p_ice", p.p_ice},         {"p_hac", p.p_hac},
        {"c_ch", p.c_ch},       {"c_dch", p.c_dch},     {"c_state", p.c_state},     {"ely", p.ely},
        {"h2_ch", p.h2_ch},     {"h2_dch", p.h2_dch},   {"h2_state", p.h2_state},   {"h2_use", p.h2_use},
        {"k_h2_ch", p.k_h2_ch}, {"k_h2_dch", p.k_h2_dch}, {"h_ch", p.h_ch},         {"h_dch", p.h_dch},
        {"h_state", p.h_state}, {"k_ch", p.k_ch},       {"k_dch", p.k_dch},         {"dr_up_el", p.dr_up_el},
        {"dr_dn_el", p.dr_dn_el}, {"i_up_el", p.i_up_el}, {"i_dn_el", p.i_dn_el},   {"dr_up_h", p.dr_up_h},
        {"dr_dn_h", p.dr_dn_h}, {"i_up_h", p.i_up_h},   {"i_dn_h", p.i_dn_h}};
    for (size_t s = 0; s < p.seg.size(); ++s) out.emplace_back("seg" + std::to_string(s), p.seg[s]);
    return out;
}

namespace {

class Builder {
public:
    explicit Builder(const HubInstance& inst) : inst_(inst) {}

    HubModel build() {
        auto violations = validate(inst_);
        if (!violations.empty()) {
            const std::string what =
                "validation error: " + violations.front().code + ": " + violations.front().message;
            throw InstanceError(what, std::move(violations));
        }
        const size_t ny = inst_.time.num_years();
        const size_t nt = static_cast<size_t>(inst_.time.periods_per_year);
        out_.vars = VarCatalog(ny, nt);
        dt_ = inst_.time.period_duration_h;
        for (size_t y = 0; y < ny; ++y) {
            for (size_t t = 0; t < nt; ++t) add_period_vars(y, t);
            for (size_t t = 0; t < nt; ++t) add_period_rows(y, t);
            add_year_rows(y);
        }
        out_.cost.normalize();
        out_.model.set_objective(out_.cost);
        return std::move(out_);
    }

private:
    std::string vname(const char* sym, size_t y, size_t t, const std::string& extra = {}) const {
        return make_tag(sym, inst_.time.years[y], t, extra);
    }

    VarId var(const char* sym, size_t y, size_t t, double lo, double hi) {
        return out_.model.add_variable(vname(sym, y, t), lo, hi);
    }
    VarId bin(const char* sym, size_t y, size_t t) { return out_.model.add_binary(vname(sym, y, t)); }

    void row(const std::string& family, size_t y, size_t t, const std::string& extra, std::vector<Term> terms,
             Sense sense, double rhs) {
        const std::string tag = make_tag(family, inst_.time.years[y], t, extra);
        const RowId r = out_.model.add_constraint(tag, std::move(terms), sense, rhs, tag);
        out_.rows.add(family, tag, r);
    }

    void year_row(const std::string& family, size_t y, const std::string& extra, std::vector<Term> terms, Sense sense,
                  double rhs) {
        std::string tag = family + "[" + std::to_string(inst_.time.years[y]);
        if (!extra.empty()) tag += "," + extra;
        tag += "]";
        const RowId r = out_.model.add_constraint(tag, std::move(terms), sense, rhs, tag);
        out_.rows.add(family, tag, r);
    }

    double cap(TechKind kind, size_t y) const {
        const auto* t = inst_.find_tech(kind);
        return t ? t->max_input(y) : 0.0;
    }

    void cost(VarId v, double c) {
        if (c != 0.0) out_.cost.add(v, c);
    }

    void add_period_vars(size_t y, size_t t) {
        PeriodVars& p = out_.vars.at(y, t);
        const auto* heat = inst_.find_storage(Carrier::kHeat);
        const auto* h2 = inst_.find_storage(Carrier::kHydrogen);
        const auto* cold = inst_.find_storage(Carrier::kCold);

        p.buy = var("buy", y, t, 0.0, kInf);
        p.sell = var("sell", y, t, 0.0, inst_.export_limit_MW * dt_);
        p.buy_mode = bin("buy_mode", y, t);
        for (const auto& s : inst_.segments)
            p.seg.push_back(out_.model.add_variable(vname("seg", y, t, s.name), 0.0, s.max_purchase_MW * dt_));
        p.pv = var("pv", y, t, 0.0, 1.0);
        p.wind = var("wind", y, t, 0.0, 1.0);

        p.echp = var("echp", y, t, 0.0, kInf);
        p.hchp = var("hchp", y, t, 0.0, kInf);
        p.hb = var("hb", y, t, 0.0, kInf);
        p.g_chp = var("g_chp", y, t, 0.0, cap(TechKind::kChp, y) * dt_);
        p.g_b = var("g_b", y, t, 0.0, cap(TechKind::kBoiler, y) * dt_);
        p.g_gas = var("g_gas", y, t, 0.0, inst_.fuels.gas_max_per_period);
        p.g_bio = var("g_bio", y, t, 0.0, inst_.fuels.bio_max_per_period);

        p.p_ec = var("p_ec", y, t, 0.0, cap(TechKind::kElectricChiller, y) * dt_);
        p.p_ice = var("p_ice", y, t, 0.0, kInf);
        p.p_hac = var("p_hac", y, t, 0.0, cap(TechKind::kAbsorptionChiller, y) * dt_);
        p.c_ch = var("c_ch", y, t, 0.0, cold ? cold->p_ch_max * dt_ : 0.0);
        p.c_dch = var("c_dch", y, t, 0.0, cold ? cold->p_dch_max * dt_ : 0.0);
        p.c_state = var("c_state", y, t, cold ? cold->min_at(y) : 0.0, cold ? cold->max_at(y) : 0.0);

        p.ely = var("ely", y, t, 0.0, cap(TechKind::kElectrolyzer, y) * dt_);
        p.h2_ch = var("h2_ch", y, t, 0.0, kInf);
        p.h2_dch = var("h2_dch", y, t, 0.0, kInf);
        p.h2_state = var("h2_state", y, t, h2->min_at(y), h2->max_at(y));
        p.h2_use = var("h2_use", y, t, 0.0, kInf);
        p.k_h2_ch = bin("k_h2_ch", y, t);
        p.k_h2_dch = bin("k_h2_dch", y, t);

        p.h_ch = var("h_ch", y, t, 0.0, kInf);
        p.h_dch = var("h_dch", y, t, 0.0, kInf);
        p.h_state = var("h_state", y, t, heat->min_at(y), heat->max_at(y));
        p.k_ch = bin("k_ch", y, t);
        p.k_dch = bin("k_dch", y, t);

        p.dr_up_el = var("dr_up_el", y, t, 0.0, kInf);
        p.dr_dn_el = var("dr_dn_el", y, t, 0.0, kInf);
        p.i_up_el = bin("i_up_el", y, t);
        p.i_dn_el = bin("i_dn_el", y, t);
        p.dr_up_h = var("dr_up_h", y, t, 0.0, kInf);
        p.dr_dn_h = var("dr_dn_h", y, t, 0.0, kInf);
        p.i_up_h = bin("i_up_h", y, t);
        p.i_dn_h = bin("i_dn_h", y, t);

        // cost terms
        cost(p.buy, inst_.prices.buy_per_MWh[y][t]);
        cost(p.sell, -inst_.prices.sell_per_MWh[y][t]);
        for (size_t s = 0; s < inst_.segments.size(); ++s) cost(p.seg[s], inst_.segments[s].price_per_MWh);
        cost(p.g_gas, inst_.fuels.gas_price_per_unit);
        cost(p.g_bio, inst_.fuels.bio_price_per_unit);
        cost(p.h2_ch, h2->supply_price_per_MWh);
        for (const auto& tech : inst_.techs) {
            const double om = tech.om_cost_per_MWh * tech.learning_multiplier(y);
            switch (tech.kind) {
                case TechKind::kBoiler: cost(p.g_b, om * tech.fuel_lhv); break;
                case TechKind::kChp: cost(p.g_chp, om * tech.fuel_lhv); break;
                case TechKind::kElectricChiller: cost(p.p_ec, om); break;
                case TechKind::kAbsorptionChiller: cost(p.p_hac, om); break;
                case TechKind::kElectrolyzer: cost(p.ely, om); break;
            }
        }
        cost(p.h_dch, heat->cycle_cost_per_MWh);
        cost(p.h2_dch, h2->cycle_cost_per_MWh);
        if (cold) cost(p.c_dch, cold->cycle_cost_per_MWh);
        const double pen = inst_.demands.dr_penalty_per_MWh;
        for (VarId v : {p.dr_up_el, p.dr_dn_el, p.dr_up_h, p.dr_dn_h}) cost(v, pen);
    }

    void add_period_rows(size_t y, size_t t) {
        const PeriodVars& p = out_.vars.at(y, t);
        const PeriodVars* prev = t > 0 ? &out_.vars.at(y, t - 1) : nullptr;
        const auto& d = inst_.demands;
        const auto* heat = inst_.find_storage(Carrier::kHeat);
        const auto* h2 = inst_.find_storage(Carrier::kHydrogen);
        const auto* cold = inst_.find_storage(Carrier::kCold);
        const auto* boiler = inst_.find_tech(TechKind::kBoiler);
        const auto* chp = inst_.find_tech(TechKind::kChp);
        const auto* ec = inst_.find_tech(TechKind::kElectricChiller);
        const auto* ac = inst_.find_tech(TechKind::kAbsorptionChiller);
        const auto* ely = inst_.find_tech(TechKind::kElectrolyzer);
        const double pv_avail = inst_.renewables.pv_MW[y][t] * dt_;
        const double wind_avail = inst_.renewables.wind_MW[y][t] * dt_;

        // Supply minus flexible uses on the left, fixed loads on the right.
        row("el_balance", y, t, {},
            {{p.buy, 1.0}, {p.pv, pv_avail}, {p.wind, wind_avail}, {p.echp, 1.0}, {p.sell, -1.0}, {p.p_ice, -1.0},
             {p.p_ec, -1.0}, {p.ely, -1.0}, {p.dr_up_el, -1.0}, {p.dr_dn_el, 1.0}},
            Sense::kEq, d.electricity_MWh[y][t] + d.ev_MWh[y][t]);
        row("heat_balance", y, t, {},
            {{p.hchp, 1.0}, {p.hb, 1.0}, {p.h_dch, 1.0}, {p.h_ch, -1.0}, {p.p_hac, -1.0}, {p.dr_up_h, -1.0},
             {p.dr_dn_h, 1.0}},
            Sense::kEq, d.heat_MWh[y][t]);
        row("cool_balance", y, t, {},
            {{p.p_ec, ec ? ec->cop : 0.0}, {p.p_hac, ac ? ac->cop : 0.0}, {p.c_dch, 1.0}, {p.c_ch, -1.0}}, Sense::kEq,
            d.cooling_MWh[y][t]);
        row("cool_aux", y, t, {}, {{p.p_ice, 1.0}, {p.c_ch, cold ? -cold->aux_power_ratio : 0.0}}, Sense::kEq, 0.0);

        row("boiler_io", y, t, {}, {{p.hb, 1.0}, {p.g_b, boiler ? -boiler->efficiency * boiler->fuel_lhv : 0.0}},
            Sense::kEq, 0.0);
        row("chp_e_io", y, t, {}, {{p.echp, 1.0}, {p.g_chp, chp ? -chp->eta_e * chp->fuel_lhv : 0.0}}, Sense::kEq, 0.0);
        row("chp_h_io", y, t, {}, {{p.hchp, 1.0}, {p.g_chp, chp ? -chp->eta_h * chp->fuel_lhv : 0.0}}, Sense::kEq, 0.0);
        row("fuel_split", y, t, {}, {{p.g_chp, 1.0}, {p.g_b, 1.0}, {p.g_gas, -1.0}, {p.g_bio, -1.0}}, Sense::kEq, 0.0);

        // Heat storage. The first period starts from the year's initial state.
        {
            std::vector<Term> terms{{p.h_state, 1.0}, {p.h_ch, -heat->eta_ch}, {p.h_dch, 1.0 / heat->eta_dch}};
            if (prev) terms.push_back({prev->h_state, -1.0});
            row("h_storage_dyn", y, t, {}, std::move(terms), Sense::kEq, prev ? 0.0 : heat->init_at(y));
        }
        row("h_storage_power", y, t, "ch", {{p.h_ch, 1.0}, {p.k_ch, -heat->p_ch_max * dt_}}, Sense::kLe, 0.0);
        row("h_storage_power", y, t, "dch", {{p.h_dch, 1.0}, {p.k_dch, -heat->p_dch_max * dt_}}, Sense::kLe, 0.0);
        row("h_storage_mutex", y, t, {}, {{p.k_ch, 1.0}, {p.k_dch, 1.0}}, Sense::kLe, 1.0);

        {
            std::vector<Term> terms{{p.h2_state, 1.0},
                                    {p.h2_ch, -h2->eta_ch},
                                    {p.ely, -ely->efficiency},
                                    {p.h2_dch, 1.0 / h2->eta_dch}};
            if (prev) terms.push_back({prev->h2_state, -1.0});
            row("h2_dyn", y, t, {}, std::move(terms), Sense::kEq, prev ? 0.0 : h2->init_at(y));
        }
        row("h2_power", y, t, "ch", {{p.h2_ch, 1.0}, {p.k_h2_ch, -h2->p_ch_max * dt_}}, Sense::kLe, 0.0);
        row("h2_power", y, t, "dch", {{p.h2_dch, 1.0}, {p.k_h2_dch, -h2->p_dch_max * dt_}}, Sense::kLe, 0.0);
        row("h2_mutex", y, t, {}, {{p.k_h2_ch, 1.0}, {p.k_h2_dch, 1.0}}, Sense::kLe, 1.0);
        row("h2_meet", y, t, "hv", {{p.h2_use, 1.0}}, Sense::kEq, d.hv_MWh[y][t]);
        row("h2_meet", y, t, "dch", {{p.h2_use, 1.0}, {p.h2_dch, -1.0}}, Sense::kEq, 0.0);

        if (cold) {
            std::vector<Term> terms{{p.c_state, 1.0}, {p.c_ch, -cold->eta_ch}, {p.c_dch, 1.0 / cold->eta_dch}};
            if (prev) terms.push_back({prev->c_state, -1.0});
            row("c_storage_dyn", y, t, {}, std::move(terms), Sense::kEq, prev ? 0.0 : cold->init_at(y));
        }

        const double lel = d.electricity_MWh[y][t];
        const double lh = d.heat_MWh[y][t];
        row("dr_bounds", y, t, "el,up", {{p.dr_up_el, 1.0}, {p.i_up_el, -d.dr_up_ratio_el * lel}}, Sense::kLe, 0.0);
        row("dr_bounds", y, t, "el,dn", {{p.dr_dn_el, 1.0}, {p.i_dn_el, -d.dr_down_ratio_el * lel}}, Sense::kLe, 0.0);
        row("dr_bounds", y, t, "h,up", {{p.dr_up_h, 1.0}, {p.i_up_h, -d.dr_up_ratio_h * lh}}, Sense::kLe, 0.0);
        row("dr_bounds", y, t, "h,dn", {{p.dr_dn_h, 1.0}, {p.i_dn_h, -d.dr_down_ratio_h * lh}}, Sense::kLe, 0.0);
        row("dr_logic", y, t, "el", {{p.i_up_el, 1.0}, {p.i_dn_el, 1.0}}, Sense::kLe, 1.0);
        row("dr_logic", y, t, "h", {{p.i_up_h, 1.0}, {p.i_dn_h, 1.0}}, Sense::kLe, 1.0);

        {
            std::vector<Term> terms{{p.buy, 1.0}};
            for (VarId s : p.seg) terms.push_back({s, -1.0});
            row("grid_split", y, t, {}, std::move(terms), Sense::kEq, 0.0);
        }
        for (size_t s = 0; s < inst_.segments.size(); ++s) {
            const auto& seg = inst_.segments[s];
            if (seg.min_share > 0.0)
                row("grid_min_share", y, t, seg.name, {{p.seg[s], 1.0}, {p.buy, -seg.min_share}}, Sense::kGe, 0.0);
            if (seg.ramp_limit_MW && prev) {
                const double r = *seg.ramp_limit_MW * dt_;
                row("ramp", y, t, seg.name + ",up", {{p.seg[s], 1.0}, {prev->seg[s], -1.0}}, Sense::kLe, r);
                row("ramp", y, t, seg.name + ",dn", {{p.seg[s], 1.0}, {prev->seg[s], -1.0}}, Sense::kGe, -r);
            }
        }
        // Each side uses its own physical limit as the big-M.
        const double m_buy = inst_.import_cap_MW() * dt_;
        const double m_sell = inst_.export_limit_MW * dt_;
        row("buy_sell_mutex", y, t, "buy", {{p.buy, 1.0}, {p.buy_mode, -m_buy}}, Sense::kLe, 0.0);
        row("buy_sell_mutex", y, t, "sell", {{p.sell, 1.0}, {p.buy_mode, m_sell}}, Sense::kLe, m_sell);
    }

    void add_year_rows(size_t y) {
        const size_t nt = out_.vars.periods();
        std::vector<Term> heat, el, h;
        for (size_t t = 0; t < nt; ++t) {
            const PeriodVars& p = out_.vars.at(y, t);
            heat.push_back({p.h_ch, 1.0});
            heat.push_back({p.h_dch, -1.0});
            el.push_back({p.dr_up_el, 1.0});
            el.push_back({p.dr_dn_el, -1.0});
            h.push_back({p.dr_up_h, 1.0});
            h.push_back({p.dr_dn_h, -1.0});
        }
        year_row("h_storage_netzero", y, {}, std::move(heat), Sense::kEq, 0.0);
        year_row("dr_netzero", y, "el", std::move(el), Sense::kEq, 0.0);
        year_row("dr_netzero", y, "h", std::move(h), Sense::kEq, 0.0);
    }

    const HubInstance& inst_;
    HubModel out_;
    double dt_ = 1.0;
};

}  // namespace

HubModel build_deterministic(const HubInstance& instance) { return Builder(instance).build(); }

LinearExpr emissions_expression(const HubInstance& instance, const VarCatalog& vars, int year_index) {
    LinearExpr e;
    const auto* h2 = instance.find_storage(Carrier::kHydrogen);
    const double h2_factor = h2 ? h2->supply_emission_t_per_MWh : 0.0;
    for (size_t y = 0; y < vars.years(); ++y) {
        if (year_index >= 0 && static_cast<size_t>(year_index) != y) continue;
        for (size_t t = 0; t < vars.periods(); ++t) {
            const PeriodVars& p = vars.at(y, t);
            if (instance.fuel_emission_coeff != 0.0) {
                e.add(p.g_gas, instance.fuel_emission_coeff);
                e.add(p.g_bio, instance.fuel_emission_coeff);
            }
            for (size_t s = 0; s < p.seg.size(); ++s) {
                const double f = instance.segments[s].emission_factor_t_per_MWh;
                if (f != 0.0) e.add(p.seg[s], f);
            }
            if (h2_factor != 0.0) e.add(p.h2_ch, h2_factor);
        }
    }
    e.normalize();
    return e;
}

HubModel build_weighted(const HubInstance& instance, double w_cost, double w_emis) {
    if (!(w_cost >= 0.0) || !(w_emis >= 0.0) || (w_cost == 0.0 && w_emis == 0.0))
        throw std::invalid_argument("weights must be nonnegative and not both zero");
    HubModel hub = build_deterministic(instance);
    LinearExpr obj;
    obj.add(hub.cost, w_cost);
    obj.add(emissions_expression(instance, hub.vars), w_emis);
    hub.model.set_objective(std::move(obj));
    return hub;
}

}  // namespace hubopt
