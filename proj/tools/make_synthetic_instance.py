#!/usr/bin/env python3
"""Generate the bundled synthetic Ontario-like hub instances.

Profiles are closed-form (no random numbers) so the files are reproducible
byte for byte. Periods 1-24 are the cold representative day, 25-48 the warm
one.

    python tools/make_synthetic_instance.py --out data/
"""

import argparse
import json
import math
from pathlib import Path

HOURS = 24
SELL_PEAK = 55.0
HV_SCALE = 1.3
GAS_FUEL_MAX = 18.0
GAS_SEG_PRICE = 50.0
BIO_SEG_CAP = 60.0
HYDRO_CAP = 600.0
HYDRO_PRICE = 85.0
PV_WARM_PEAK = 900.0
NUCLEAR_RAMP = 60.0
HV_WARM_EVENING = 80.0
NZ_BASE_YEAR = 2000


def bump(h, center, width):
    return math.exp(-0.5 * ((h - center) / width) ** 2)


def solar(h, peak):
    if h < 6 or h > 19:
        return 0.0
    return peak * max(0.0, math.sin(math.pi * (h - 6) / 13.0)) ** 1.5


def day(fn):
    return [round(fn(h), 3) for h in range(HOURS)]


def two_days(cold, warm):
    return day(cold) + day(warm)


def profiles(scale=1.0):
    s = scale
    elec = two_days(lambda h: s * (430 + 110 * bump(h, 8, 2.0) + 150 * bump(h, 18.5, 2.5) - 90 * bump(h, 3, 2.5)),
                    lambda h: s * (380 + 160 * bump(h, 15, 3.5) - 80 * bump(h, 3, 2.5)))
    heat = two_days(lambda h: s * (90 + 25 * bump(h, 7, 2.0) + 20 * bump(h, 19, 2.5)),
                    lambda h: s * (20 + 6 * bump(h, 7, 2.0)))
    cool = two_days(lambda h: 0.0,
                    lambda h: s * (40 + 140 * bump(h, 15, 3.0)))
    ev = two_days(lambda h: s * (25 + 55 * bump(h, 20, 2.0) + 20 * bump(h, 1, 2.0)),
                  lambda h: s * (20 + 45 * bump(h, 20, 2.0) + 15 * bump(h, 1, 2.0)))
    # Refuelling stations close overnight, which leaves hours for restocking
    # the hydrogen store from outside supply.
    k = s * HV_SCALE
    hv = two_days(lambda h: 0.0 if h <= 5 else k * (30 + 25 * bump(h, 8, 2.5) + 25 * bump(h, 17, 2.5)),
                  lambda h: 0.0 if h <= 5 else k * (28 + 22 * bump(h, 8, 2.5) + HV_WARM_EVENING * bump(h, 17, 2.5)))
    pv = two_days(lambda h: solar(h, 140.0), lambda h: solar(h, PV_WARM_PEAK))
    wind = two_days(lambda h: 170 + 60 * math.cos(2 * math.pi * (h - 2) / 24),
                    lambda h: 70 + 30 * math.cos(2 * math.pi * (h - 4) / 24))
    buy = two_days(lambda h: 18 + 14 * bump(h, 8, 2.0) + 18 * bump(h, 18.5, 2.5),
                   lambda h: 14 + 20 * bump(h, 15, 3.0) + SELL_PEAK * bump(h, 13, 2.0))
    sell = two_days(lambda h: 30 + 15 * bump(h, 8, 2.0) + 20 * bump(h, 18.5, 2.5),
                    lambda h: 22 + 10 * bump(h, 15, 3.0) + SELL_PEAK * bump(h, 13, 2.0))
    return dict(elec=elec, heat=heat, cool=cool, ev=ev, hv=hv, pv=pv, wind=wind, buy=buy, sell=sell)


def segments():
    return [
        {"name": "nuclear", "max_purchase_MW": 230.0, "min_share": 0.30, "price_per_MWh": 28.0,
         "emission_factor_t_per_MWh": 0.0, "generation_efficiency": 0.33, "ramp_limit_MW": NUCLEAR_RAMP},
        {"name": "hydro", "max_purchase_MW": HYDRO_CAP, "min_share": 0.10, "price_per_MWh": HYDRO_PRICE,
         "emission_factor_t_per_MWh": 0.0, "generation_efficiency": 0.9, "ramp_limit_MW": 90.0},
        {"name": "gas", "max_purchase_MW": 450.0, "min_share": 0.0, "price_per_MWh": GAS_SEG_PRICE,
         "emission_factor_t_per_MWh": 0.42, "generation_efficiency": 0.5},
        {"name": "biofuel", "max_purchase_MW": BIO_SEG_CAP, "min_share": 0.02, "price_per_MWh": 95.0,
         "emission_factor_t_per_MWh": 0.05, "generation_efficiency": 0.35},
    ]


def techs(n_years, ely_caps=None, learning=None):
    def lm(k):
        return {"learning_multiplier_by_year": learning[k]} if learning else {}

    ely = {"kind": "electrolyzer", "efficiency": 0.75, "max_input_per_period": 300.0, "om_cost_per_MWh": 4.0}
    if ely_caps:
        ely["max_input_by_year"] = ely_caps
    ely.update(lm("ely"))
    return [
        dict({"kind": "boiler", "efficiency": 0.90, "fuel_lhv": 1.0, "max_input_per_period": 420.0,
              "om_cost_per_MWh": 1.5}, **lm("boiler")),
        dict({"kind": "chp", "eta_e": 0.35, "eta_h": 0.45, "fuel_lhv": 1.0, "max_input_per_period": 260.0,
              "om_cost_per_MWh": 3.0}, **lm("chp")),
        {"kind": "electric_chiller", "cop": 3.5, "max_input_per_period": 70.0, "om_cost_per_MWh": 1.0},
        {"kind": "absorption_chiller", "cop": 0.7, "max_input_per_period": 120.0, "om_cost_per_MWh": 1.0},
        ely,
    ]


def storages(h2_max=None, h2_min=None):
    h2 = {"carrier": "hydrogen", "e_min": 200.0, "e_max": 2000.0, "p_ch_max": 200.0, "p_dch_max": 200.0,
          "eta_ch": 0.95, "eta_dch": 0.95, "e_init": 600.0, "cycle_cost_per_MWh": 1.0,
          "supply_price_per_MWh": 70.0, "supply_emission_t_per_MWh": 0.30}
    if h2_max:
        h2["e_max_by_year"] = h2_max
        h2["e_min_by_year"] = h2_min
        h2["e_init_by_year"] = [round(0.3 * v, 6) for v in h2_max]
    return [
        {"carrier": "heat", "e_min": 40.0, "e_max": 400.0, "p_ch_max": 100.0, "p_dch_max": 100.0,
         "eta_ch": 0.92, "eta_dch": 0.92, "e_init": 120.0, "cycle_cost_per_MWh": 1.5},
        h2,
        {"carrier": "cold", "e_min": 0.0, "e_max": 240.0, "p_ch_max": 60.0, "p_dch_max": 60.0,
         "eta_ch": 0.95, "eta_dch": 0.95, "e_init": 0.0, "cycle_cost_per_MWh": 0.5, "aux_power_ratio": 0.0},
    ]


def instance(name, years, scales, ely_caps=None, h2_max=None, learning=None, nz_base_year=None):
    per_year = [profiles(s) for s in scales]
    h2_min = [round(0.1 * v, 6) for v in h2_max] if h2_max else None

    def series(key):
        return [p[key] for p in per_year]

    return {
        "schema": "hubopt/1",
        "name": name,
        "time": {"years": years, "periods_per_year": 48, "period_duration_h": 1.0},
        "grid": {
            "export_limit_MW": 120.0,
            "buy_price_per_MWh": series("buy"),
            "sell_price_per_MWh": series("sell"),
            "segments": segments(),
        },
        "fuels": {"emission_t_per_unit": 0.20, "gas_price_per_unit": 28.0, "bio_price_per_unit": 55.0,
                  "gas_max_per_period": GAS_FUEL_MAX, "bio_max_per_period": 1000.0,
                  "energy_MWh_per_unit": 1.0},
        "techs": techs(len(years), ely_caps, learning),
        "storages": storages(h2_max, h2_min),
        "demands": {
            "electricity_MWh": series("elec"),
            "heat_MWh": series("heat"),
            "cooling_MWh": series("cool"),
            "ev_MWh": series("ev"),
            "hv_MWh": series("hv"),
            "dr_up_ratio_el": 0.10, "dr_down_ratio_el": 0.10,
            "dr_up_ratio_h": 0.05, "dr_down_ratio_h": 0.05,
            "dr_penalty_per_MWh": 6.0,
        },
        "renewables": {"pv_MW": series("pv"), "wind_MW": series("wind")},
        "policy": {"mode": "carbon_tax", "tax_base_per_t": 80.0, "tax_escalation_per_t_per_year": 15.0,
                   "tax_cap_per_t": 170.0, "tax_base_year": 2025, "nz_target_year": 2050,
                   "nz_base_year": nz_base_year or NZ_BASE_YEAR},
        "robust": {"dev_fraction": 0.30},
    }


def long_horizon():
    years = [2025, 2030, 2035, 2040, 2045, 2050]
    ely = [300.0, 1000.0, 1700.0, 2400.0, 3100.0, 3800.0]
    h2 = [2000.0, 9000.0, 16000.0, 23000.0, 30000.0, 37000.0]
    learning = {
        "ely": [1.0, 0.85, 0.74, 0.66, 0.6, 0.55],
        "boiler": [1.0] * 6,
        "chp": [1.0, 1.02, 1.04, 1.06, 1.08, 1.1],
    }
    return instance("synthetic_on_2050", years, [1.0] * len(years), ely, h2, learning, nz_base_year=2025)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    docs = {
        "synthetic_on.json": instance("synthetic_on", [2025], [1.0]),
        "synthetic_on_2050.json": long_horizon(),
    }
    for fname, doc in docs.items():
        (out / fname).write_text(json.dumps(doc, indent=1) + "\n")
        print("wrote", out / fname)


if __name__ == "__main__":
    main()
