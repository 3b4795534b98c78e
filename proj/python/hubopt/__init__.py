"""Multi-energy hub planning under carbon policy, with budgeted robust counterparts.

Instances are loaded from JSON files; results come back as plain dicts.

    >>> import hubopt
    >>> inst = hubopt.Instance.bundled()
    >>> hubopt.solve(inst, policy="carbon_tax")["status"]
    'optimal'
"""

import os
from pathlib import Path

_packaged_data = Path(__file__).resolve().parent / "data"
if "HUBOPT_DATA_DIR" not in os.environ and (_packaged_data / "synthetic_on.json").is_file():
    os.environ["HUBOPT_DATA_DIR"] = str(_packaged_data)

from ._core import (  # noqa: E402
    Instance,
    InstanceError,
    Model,
    StructureError,
    bundled_instance_path,
    compare,
    data_dir,
    gamma_sweep,
    oat,
    solve,
    stress,
    tornado,
)

__all__ = [
    "Instance",
    "InstanceError",
    "Model",
    "StructureError",
    "bundled_instance_path",
    "compare",
    "data_dir",
    "gamma_sweep",
    "oat",
    "solve",
    "stress",
    "tornado",
]
