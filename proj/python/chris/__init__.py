"""Python bindings for the chris C++ library."""

import json

from ._chris import (
    ChrisError,
    Configuration,
    at_predict,
    count_ops,
    dispatch,
    enumerate,
    feasible,
    pareto_filter,
    profiles_json,
    run_cli,
    select,
    synth_window,
)


def profiles(name="deployment"):
    return json.loads(profiles_json(name))


__all__ = [
    "ChrisError",
    "Configuration",
    "at_predict",
    "count_ops",
    "dispatch",
    "enumerate",
    "feasible",
    "pareto_filter",
    "profiles",
    "run_cli",
    "select",
    "synth_window",
]
