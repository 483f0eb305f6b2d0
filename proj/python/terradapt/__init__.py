"""Python bindings for the terradapt library.

Commands that produce JSON summaries return plain dicts.
"""

import json as _json

from . import _terradapt
from ._terradapt import *  # noqa: F401,F403

__version__ = _terradapt.version()


def _decoded(fn):
    def wrapper(*args, **kwargs):
        return _json.loads(fn(*args, **kwargs))

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


gen_data = _decoded(_terradapt.gen_data)
train = _decoded(_terradapt.train)
simulate = _decoded(_terradapt.simulate)
evaluate = _decoded(_terradapt.evaluate)


def build_world(spec):
    """Builds a world from a dict (or JSON string) in the config "world" format."""
    return _terradapt.build_world(spec if isinstance(spec, str) else _json.dumps(spec))


def run_once(config, run, variant):
    """Runs one scenario instance; returns (summary dict, column names, telemetry array)."""
    summary, columns, table = _terradapt.run_once(config, run, variant)
    return _json.loads(summary), columns, table
