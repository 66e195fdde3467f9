"""Weak-measurement simulation lab."""

import json as _json

from ._wvlab import *  # noqa: F401,F403
from ._wvlab import REPORT_SCHEMA, run_scenario as _run_scenario

__version__ = "0.1.0"


def run(scenario, workers=1, seed=None):
    """Run a scenario given as a dict or JSON text.

    Returns (csv_text, report_dict, physics_ok).
    """
    text = scenario if isinstance(scenario, str) else _json.dumps(scenario)
    csv, report, ok = _run_scenario(text, workers, seed)
    return csv, _json.loads(report), ok
