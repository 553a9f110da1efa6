import json as _json

from ._core import *  # noqa: F401,F403
from ._core import Error, run_pipeline as _run_pipeline

__version__ = "0.1.0"


def run_pipeline(subcommand, archive="", out="out", **kwargs):
    """Run a stage (or "all") and return the parsed summary."""
    return _json.loads(_run_pipeline(subcommand, str(archive), str(out), **kwargs))
