"""Figure rendering for spectrum-sharing experiment result tables.

The package reads the CSV result tables written by the ``osasim`` command
line tool and renders deterministic comparison figures from them.  It has
no other coupling to the simulator: everything it needs is in the tables.
"""

from .spec import (
    EXPECTED_COLUMNS,
    KINDS,
    FigureError,
    FigureSpec,
    ResultRecord,
    load_spec,
    read_result_table,
    spec_from_dict,
    spec_to_dict,
)
from .render import render

__version__ = "0.1.0"

__all__ = [
    "EXPECTED_COLUMNS",
    "KINDS",
    "FigureError",
    "FigureSpec",
    "ResultRecord",
    "load_spec",
    "read_result_table",
    "spec_from_dict",
    "spec_to_dict",
    "render",
    "__version__",
]
