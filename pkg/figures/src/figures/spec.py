"""Figure specifications and result-table loading.

A figure spec names one or more result tables (CSV files produced by the
``osasim`` command line tool), a figure kind, axis labels, and an output
image path.  This module owns the spec schema, its JSON (de)serialization,
and the CSV reader that enforces the expected result-table columns.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, fields, asdict

__all__ = [
    "EXPECTED_COLUMNS",
    "KINDS",
    "FigureError",
    "ResultRecord",
    "FigureSpec",
    "read_result_table",
    "spec_from_dict",
    "spec_to_dict",
    "load_spec",
]

# Column layout of the result tables this package consumes.  The order and
# names match the CSV emitted by the osasim command line tool; a table is
# accepted as long as every one of these columns is present.
EXPECTED_COLUMNS = (
    "protocol",
    "metric",
    "sweep_name",
    "sweep_value",
    "analytic_value",
    "bound_lower",
    "bound_upper",
    "simulated_mean",
    "simulated_stderr",
    "n_trials",
    "n_rejected",
    "seed",
)

KINDS = ("curve-vs-sweep", "bound-band", "tradeoff-scatter")

_STRING_COLUMNS = ("protocol", "metric", "sweep_name")
_FLOAT_COLUMNS = (
    "sweep_value",
    "analytic_value",
    "bound_lower",
    "bound_upper",
    "simulated_mean",
    "simulated_stderr",
)
_INT_COLUMNS = ("n_trials", "n_rejected", "seed")


class FigureError(ValueError):
    """Raised for invalid figure specs or unusable result tables."""


@dataclass(frozen=True)
class ResultRecord:
    """One row of a result table, with numeric fields parsed.

    Empty CSV cells become None: a row may carry an analytic value, a
    bound pair, a simulated estimate, or any combination.
    """

    protocol: str
    metric: str
    sweep_name: str
    sweep_value: float | None
    analytic_value: float | None
    bound_lower: float | None
    bound_upper: float | None
    simulated_mean: float | None
    simulated_stderr: float | None
    n_trials: int | None
    n_rejected: int | None
    seed: int | None


@dataclass(frozen=True)
class FigureSpec:
    """Declarative description of one figure.

    Each entry of ``inputs`` becomes one panel, drawn left to right.
    ``metric`` restricts panels to rows with that metric name; it must be
    left unset for the tradeoff-scatter kind, which always pairs the
    throughput_primary and throughput_secondary rows.
    """

    inputs: tuple[str, ...]
    kind: str
    output: str
    metric: str | None = None
    x_label: str = ""
    y_label: str = ""
    title: str = ""
    panel_titles: tuple[str, ...] = field(default_factory=tuple)
    dpi: int = 150

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "panel_titles", tuple(self.panel_titles))
        if self.kind not in KINDS:
            raise FigureError(
                f"unknown figure kind {self.kind!r}; expected one of {KINDS}"
            )
        if not self.inputs:
            raise FigureError("inputs must name at least one result table")
        for path in self.inputs:
            if not isinstance(path, str) or not path:
                raise FigureError(f"bad input path {path!r}")
        if not isinstance(self.output, str) or not self.output:
            raise FigureError("output must be a non-empty path")
        if self.metric is not None and not isinstance(self.metric, str):
            raise FigureError(f"bad metric filter {self.metric!r}")
        if self.kind == "tradeoff-scatter" and self.metric is not None:
            raise FigureError(
                "tradeoff-scatter pairs the two throughput metrics itself; "
                "leave metric unset"
            )
        if self.panel_titles and len(self.panel_titles) != len(self.inputs):
            raise FigureError(
                f"panel_titles has {len(self.panel_titles)} entries for "
                f"{len(self.inputs)} inputs"
            )
        if not isinstance(self.dpi, int) or self.dpi <= 0:
            raise FigureError(f"dpi must be a positive integer, got {self.dpi!r}")


def _parse_cell(name: str, text: str | None, row_index: int, path: str):
    if text is None or text == "":
        if name in _STRING_COLUMNS:
            raise FigureError(
                f"{path} row {row_index}: column {name!r} is empty"
            )
        return None
    if name in _STRING_COLUMNS:
        return text
    try:
        if name in _INT_COLUMNS:
            return int(text)
        return float(text)
    except ValueError:
        raise FigureError(
            f"{path} row {row_index}: column {name!r} has non-numeric "
            f"value {text!r}"
        ) from None


def read_result_table(path: str) -> list[ResultRecord]:
    """Load a result-table CSV, checking the expected columns are present.

    Raises FigureError when the header is missing required columns or the
    table has no data rows.  Extra columns are ignored.
    """
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise FigureError(f"cannot read result table: {exc}") from None
    with handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames
        if header is None:
            raise FigureError(f"{path}: empty file, no header row")
        missing = [name for name in EXPECTED_COLUMNS if name not in header]
        if missing:
            raise FigureError(
                f"{path}: missing required columns {', '.join(missing)}"
            )
        records = []
        for index, row in enumerate(reader, start=1):
            values = {
                name: _parse_cell(name, row.get(name), index, path)
                for name in EXPECTED_COLUMNS
            }
            records.append(ResultRecord(**values))
    if not records:
        raise FigureError(f"{path}: no data rows")
    return records


def spec_to_dict(spec: FigureSpec) -> dict:
    """Plain-dict form of a spec, suitable for JSON."""
    doc = asdict(spec)
    doc["inputs"] = list(spec.inputs)
    doc["panel_titles"] = list(spec.panel_titles)
    return doc


def spec_from_dict(doc: dict) -> FigureSpec:
    """Build a FigureSpec from a parsed JSON document."""
    if not isinstance(doc, dict):
        raise FigureError(f"spec document must be an object, got {type(doc).__name__}")
    known = {f.name for f in fields(FigureSpec)}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise FigureError(f"unknown spec keys: {', '.join(unknown)}")
    for key in ("inputs", "kind", "output"):
        if key not in doc:
            raise FigureError(f"spec is missing required key {key!r}")
    kwargs = dict(doc)
    if not isinstance(kwargs["inputs"], (list, tuple)):
        raise FigureError("inputs must be a list of paths")
    if "panel_titles" in kwargs and not isinstance(
        kwargs["panel_titles"], (list, tuple)
    ):
        raise FigureError("panel_titles must be a list")
    try:
        return FigureSpec(**kwargs)
    except TypeError as exc:
        raise FigureError(f"bad spec document: {exc}") from None


def load_spec(path: str) -> FigureSpec:
    """Read a figure spec from a JSON file."""
    try:
        with open(path) as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise FigureError(f"cannot read spec file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise FigureError(f"spec file is not valid JSON: {exc}") from None
    return spec_from_dict(doc)
