"""Frozen random MILP fixture with optima from HiGHS (scipy.optimize.milp).

Each model has at most 12 binaries and 20 bounded continuous variables and
is feasible by construction: a random point with an integral binary part
satisfies every row. The acceptance suite rebuilds the models from the JSON
file and compares the reference solver against the stored optimum and
against exhaustive binary enumeration.
"""

import argparse
import json
from pathlib import Path

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

SEED = 20250611
COUNT = 60


def random_model(rng, n_bin, n_cont, n_rows):
    n = n_bin + n_cont
    lower = np.zeros(n)
    upper = np.ones(n)
    point = np.zeros(n)
    point[:n_bin] = rng.integers(0, 2, n_bin)
    for j in range(n_bin, n):
        lower[j] = -3.0 if rng.random() < 0.2 else 0.0
        upper[j] = round(2.0 + 8.0 * rng.random(), 2)
        point[j] = lower[j] + (upper[j] - lower[j]) * rng.random()
    rows = []
    for _ in range(n_rows):
        mask = rng.random(n) < 0.5
        if not mask.any():
            continue
        coef = np.where(mask, np.round(rng.uniform(-5.0, 5.0, n), 2), 0.0)
        act = float(coef @ point)
        r = rng.random()
        if r < 0.15:
            sense, rhs = "=", act
        elif r < 0.6:
            sense, rhs = "<=", act + 3.0 * rng.random()
        else:
            sense, rhs = ">=", act - 3.0 * rng.random()
        rows.append({"coef": coef.tolist(), "sense": sense, "rhs": round(rhs, 9)})
    cost = np.round(rng.uniform(-5.0, 5.0, n), 2)
    return {
        "binaries": n_bin,
        "lower": lower.tolist(),
        "upper": upper.tolist(),
        "cost": cost.tolist(),
        "rows": rows,
    }


def solve(model):
    n = len(model["cost"])
    integrality = np.zeros(n)
    integrality[: model["binaries"]] = 1
    cons = []
    for row in model["rows"]:
        a = np.array(row["coef"])
        if row["sense"] == "=":
            cons.append(LinearConstraint(a, row["rhs"], row["rhs"]))
        elif row["sense"] == "<=":
            cons.append(LinearConstraint(a, -np.inf, row["rhs"]))
        else:
            cons.append(LinearConstraint(a, row["rhs"], np.inf))
    res = milp(
        np.array(model["cost"]),
        constraints=cons,
        integrality=integrality,
        bounds=Bounds(model["lower"], model["upper"]),
        options={"mip_rel_gap": 0.0, "presolve": True},
    )
    if res.status != 0:
        raise RuntimeError(f"HiGHS status {res.status}: {res.message}")
    return float(res.fun)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="tests/fixtures/random_milps.json")
    args = ap.parse_args()
    rng = np.random.default_rng(SEED)
    models = []
    for k in range(COUNT):
        n_bin = 2 + k % 11
        n_cont = 4 + (3 * k) % 17
        n_rows = 4 + k % 13
        m = random_model(rng, n_bin, n_cont, n_rows)
        m["name"] = f"random_{k:02d}"
        m["highs_objective"] = solve(m)
        models.append(m)
    doc = {"seed": SEED, "solver": "HiGHS via scipy.optimize.milp", "models": models}
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, indent=1) + "\n")
    print(f"wrote {out} ({len(models)} models)")


if __name__ == "__main__":
    main()
