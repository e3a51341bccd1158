# SPDX-License-Identifier: Apache-2.0
"""Python front end of the mfris simulator."""

import json

from ._mfris import (
    BackendUnavailableError,
    ConfigError,
    InfeasibleError,
    SolverError,
    beampattern,
    default_config,
    four_target_config,
    normalize_config,
    rayleigh_argmax,
    scheme_names,
    sweep,
)
from ._mfris import run as _run


def config(**overrides):
    """Default scenario with the given fields replaced, as JSON text."""
    base = json.loads(default_config())
    base.update(overrides)
    return normalize_config(json.dumps(base))


def run(scheme="ES", config="", seed=None):
    """Solve one scenario; config may be JSON text or a dict."""
    if isinstance(config, dict):
        config = json.dumps(config)
    return _run(scheme, config, seed)


__all__ = [
    "BackendUnavailableError",
    "ConfigError",
    "InfeasibleError",
    "SolverError",
    "beampattern",
    "config",
    "default_config",
    "four_target_config",
    "normalize_config",
    "rayleigh_argmax",
    "run",
    "scheme_names",
    "sweep",
]
