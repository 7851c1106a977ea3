"""Python interface to the bsdekit lattice engine.

The compiled core exposes the main operations; this wrapper adds dict-level
convenience around the JSON-string boundary.
"""

import json

from ._core import (
    ConfigError,
    NumericError,
    bundled_config_json,
    bundled_names,
    closed_form_geometric,
    holder_conjugate,
    implicit_step,
    mollified_gap,
)
from . import _core

__all__ = [
    "ConfigError",
    "NumericError",
    "bundled_config",
    "bundled_config_json",
    "bundled_names",
    "closed_form_geometric",
    "holder_conjugate",
    "implicit_step",
    "mollified_gap",
    "run",
]


def bundled_config(name):
    """Fully resolved config for a bundled preset, as a dict."""
    return json.loads(bundled_config_json(name))


def run(command, config):
    """Run one pipeline and return its report as a dict.

    ``config`` may be a dict or a JSON string; outputs are written to the
    directory named by the config's ``output.dir``.
    """
    if not isinstance(config, str):
        config = json.dumps(config)
    return json.loads(_core.run(command, config))
