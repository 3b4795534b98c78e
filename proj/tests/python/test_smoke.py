import json
import math
from pathlib import Path

import pytest

import hubopt

TOY = Path(__file__).resolve().parents[1] / "fixtures" / "toy_hub.json"


@pytest.fixture(scope="module")
def toy():
    return hubopt.Instance.load(str(TOY))


@pytest.fixture(scope="module")
def bundled():
    return hubopt.Instance.bundled()


def test_bundled_instance_is_valid(bundled):
    assert bundled.validate() == []
    assert bundled.years[0] == 2025
    doc = bundled.to_dict()
    assert doc["robust"]["dev_fraction"] == pytest.approx(0.30)


def test_dict_round_trip(toy, tmp_path):
    doc = toy.to_dict()
    again = hubopt.Instance.from_dict(json.loads(json.dumps(doc)))
    assert again.to_dict() == doc
    again.save(str(tmp_path / "copy.json"))
    assert hubopt.Instance.load(str(tmp_path / "copy.json")).to_dict() == doc


def test_invalid_instance_reports_violations(toy):
    doc = toy.to_dict()
    doc["storages"][0]["eta_ch"] = 1.5
    bad = hubopt.Instance.from_dict(doc)
    codes = [code for code, _ in bad.validate()]
    assert codes
    with pytest.raises(hubopt.InstanceError):
        hubopt.Instance.from_dict({"demands": 3})


def test_bundled_carbon_tax_solve(bundled):
    res = hubopt.solve(bundled, policy="carbon_tax")
    assert res["status"] == "optimal"
    assert res["objective"] == pytest.approx(1102806.247, abs=1e-2)
    assert res["metrics"]["total_cost_usd"] == pytest.approx(res["objective"], rel=1e-9)


def test_robust_solve_is_audited_and_costlier(toy):
    det = hubopt.solve(toy, policy="none")
    rob = hubopt.solve(toy, policy="none", gamma=2)
    assert rob["status"] == "optimal"
    assert rob["objective"] >= det["objective"] - 1e-7
    assert rob["audit"]["max_violation"] <= 1e-6
    with pytest.raises(ValueError):
        hubopt.solve(toy, gamma=-1)


def test_gamma_sweep_is_monotone(toy):
    points = hubopt.gamma_sweep(toy, policy="carbon_tax", gammas=[2, 0, 1, 4])
    assert [p["gamma"] for p in points] == [0, 1, 2, 4]
    objs = [p["objective"] for p in points]
    assert all(b >= a - 1e-7 for a, b in zip(objs, objs[1:]))


def test_compare_premium(toy):
    c = hubopt.compare(toy, policy="carbon_tax", gamma=1)
    assert c["premium_frac"] >= 0.0


def test_sensitivity_and_stress(toy):
    rows = hubopt.oat(toy, "demands.total", [0.9, 1.0, 1.1], threads=2, gamma=1)
    assert [r["status"] for r in rows] == ["optimal"] * 3
    assert rows[0]["objective"] <= rows[2]["objective"]
    assert "robust_objective" in rows[1]

    tor = hubopt.tornado(toy, ["renewables.wind_MW", "grid.buy_price_per_MWh"])
    swings = [r["swing"] for r in tor["rows"]]
    assert swings == sorted(swings, reverse=True)

    st = hubopt.stress(toy, "demands.electricity_MWh", step=0.5, max_level=10)
    assert st["infeasible"]
    assert st["violated_tags"]

    with pytest.raises(ValueError):
        hubopt.oat(toy, "fuels.nothing", [1.0])


def test_perturb_scales_series(toy):
    base = toy.to_dict()["demands"]["electricity_MWh"][0]
    moved = toy.perturb("demands.electricity_MWh", 2.0).to_dict()["demands"]["electricity_MWh"][0]
    assert moved == [2 * v for v in base]


def test_small_milp():
    m = hubopt.Model()
    x = m.add_variable("x", 0, 10)
    y = m.add_binary("y")
    m.add_constraint([(x, 1.0), (y, -10.0)], "<=", 0.0)
    m.add_constraint([(x, 1.0)], ">=", 3.5)
    m.set_objective([(x, 1.0), (y, 5.0)])
    res = m.solve()
    assert res["status"] == "optimal"
    assert res["objective"] == pytest.approx(8.5)
    assert res["values"][1] == pytest.approx(1.0)
    assert "Subject To" in m.to_lp()
    assert m.num_variables == 2 and m.num_constraints == 2


def test_infeasible_milp_has_no_objective():
    m = hubopt.Model()
    x = m.add_variable("x", 0, 1)
    m.add_constraint([(x, 1.0)], ">=", 2.0)
    m.set_objective([(x, 1.0)])
    res = m.solve()
    assert res["status"] == "infeasible"
    assert res["objective"] is None
    assert math.isnan(res["gap"]) or res["gap"] >= 0
