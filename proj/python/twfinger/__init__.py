"""Travelling-wave finger solutions of the hysteretic Richards system."""

import json

from ._core import (
    BracketError,
    ConfigError,
    Error,
    FluxConvention,
    InvalidInput,
    Params,
    PressureSolver,
    Solution,
    SolverFailure,
    UndefinedResult,
    bisect,
    c_mass_balance,
    classify,
    eval_G1,
    eval_G2,
    eval_G_general,
    find_wave_speed,
    fixed_point_solve,
    flux_profile,
    free_boundary,
    g_F,
    ode_transport,
    params_from_config,
    s_star,
    sweep_c,
)
from ._core import parse_config as _parse_config
from ._core import run as _run

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_NOT_CONVERGED = 2
EXIT_CONFIG_ERROR = 3


def parse_config(text):
    """Effective configuration (every key) for a JSON or key = value text."""
    return json.loads(_parse_config(text))


def run(config, out_dir, overrides=()):
    """Run a configuration and write its artifacts to out_dir.

    config is a JSON/TOML-style string or a dict. Returns (exit_code, summary).
    """
    if isinstance(config, dict):
        config = json.dumps(config)
    code, summary = _run(config, str(out_dir), list(overrides))
    return code, json.loads(summary)
