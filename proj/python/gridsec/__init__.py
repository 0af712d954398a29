"""Grid contingency screening and attack path assessment."""

import json

from ._core import (
    ComputeError,
    ConfigError,
    Network,
    ParseError,
    __version__,
    base_score,
    dc_flows,
    import_matrix_case,
    load_case,
    n2_scan,
    parse_case_text,
    score_network,
)
from ._core import assess_json as _assess_json


def assess(config):
    """Run the full assessment pipeline.

    Takes a config dict shaped like the CLI config files and returns the
    report as a dict.
    """
    return json.loads(_assess_json(json.dumps(config)))


__all__ = [
    "ComputeError",
    "ConfigError",
    "Network",
    "ParseError",
    "__version__",
    "assess",
    "base_score",
    "dc_flows",
    "import_matrix_case",
    "load_case",
    "n2_scan",
    "parse_case_text",
    "score_network",
]
