"""Deterministic figure rendering from result tables.

Rendering is pure: the same spec and the same input tables produce the
same image bytes.  All styling is fixed here, timestamp metadata is
stripped from the output, and nothing is drawn from ambient state.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .spec import FigureError, FigureSpec, ResultRecord, read_result_table

__all__ = ["render"]

# Fixed series palette so colors do not depend on matplotlib defaults.
_COLORS = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#ff7f0e",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
)

_RC = {
    "font.size": 9.0,
    "axes.titlesize": 10.0,
    "axes.labelsize": 9.0,
    "legend.fontsize": 8.0,
    "lines.linewidth": 1.6,
    "figure.dpi": 100.0,
    "svg.hashsalt": "osafig",
}

# Timestamp-bearing metadata keys to suppress, per output format.
_STRIP_METADATA = {
    ".png": {"Software": None},
    ".svg": {"Date": None},
    ".pdf": {"CreationDate": None},
}


def _series_label(protocol: str, sweep_name: str) -> str:
    """Legend label for one series: protocol plus any variant tag."""
    if "@" in sweep_name:
        return f"{protocol} {sweep_name.split('@', 1)[1]}"
    return protocol


def _group_series(records: list[ResultRecord]) -> dict[tuple[str, str], list[ResultRecord]]:
    series: dict[tuple[str, str], list[ResultRecord]] = {}
    for record in records:
        series.setdefault((record.protocol, record.sweep_name), []).append(record)
    return series


def _select_metric(records: list[ResultRecord], metric: str | None, path: str) -> list[ResultRecord]:
    present = sorted({record.metric for record in records})
    if metric is not None:
        subset = [record for record in records if record.metric == metric]
        if not subset:
            raise FigureError(
                f"{path}: no rows with metric {metric!r} "
                f"(table has: {', '.join(present)})"
            )
        return subset
    if len(present) > 1:
        raise FigureError(
            f"{path}: table mixes metrics {', '.join(present)}; "
            "set the spec's metric field to pick one"
        )
    return records


def _sorted_points(rows: list[ResultRecord], key: tuple[str, str], path: str) -> list[ResultRecord]:
    for row in rows:
        if row.sweep_value is None:
            raise FigureError(
                f"{path}: series {key[0]}/{key[1]} has rows without sweep values"
            )
    return sorted(rows, key=lambda row: row.sweep_value)


def _column(rows: list[ResultRecord], name: str) -> tuple[list[float], list[float]]:
    """Sweep values and column values for the rows where the column is set."""
    xs, ys = [], []
    for row in rows:
        value = getattr(row, name)
        if value is not None:
            xs.append(row.sweep_value)
            ys.append(value)
    return xs, ys


def _draw_curve_series(ax, rows, color, label) -> tuple[bool, bool]:
    """Draw one series: analytic line, bound band, simulated markers.

    Returns (drew_anything, drew_bounds).
    """
    remaining_label = label

    def take_label():
        nonlocal remaining_label
        text, remaining_label = remaining_label, None
        return text

    drew = False
    drew_bounds = False

    both = [r for r in rows if r.bound_lower is not None and r.bound_upper is not None]
    if len(both) >= 2:
        xs = [r.sweep_value for r in both]
        ax.fill_between(xs, [r.bound_lower for r in both],
                        [r.bound_upper for r in both],
                        color=color, alpha=0.22, linewidth=0, zorder=1,
                        label=take_label())
        drew = drew_bounds = True
    for name in ("bound_lower", "bound_upper"):
        xs, ys = _column(rows, name)
        if xs:
            ax.plot(xs, ys, color=color, linestyle="--", linewidth=0.9,
                    alpha=0.85, zorder=2, label=take_label())
            drew = drew_bounds = True

    xs, ys = _column(rows, "analytic_value")
    if xs:
        ax.plot(xs, ys, color=color, linestyle="-", zorder=3, label=take_label())
        drew = True

    xs, ys = _column(rows, "simulated_mean")
    if xs:
        errs = [r.simulated_stderr if r.simulated_stderr is not None else 0.0
                for r in rows if r.simulated_mean is not None]
        ax.errorbar(xs, ys, yerr=errs, fmt="o", markersize=4, capsize=2,
                    color=color, linestyle="none", zorder=4, label=take_label())
        drew = True
    return drew, drew_bounds


def _draw_curve_panel(ax, records, spec, path) -> None:
    rows = _select_metric(records, spec.metric, path)
    series = _group_series(rows)
    drew_any = False
    bounds_any = False
    for index, (key, group) in enumerate(series.items()):
        points = _sorted_points(group, key, path)
        color = _COLORS[index % len(_COLORS)]
        drew, drew_bounds = _draw_curve_series(
            ax, points, color, _series_label(*key))
        drew_any = drew_any or drew
        bounds_any = bounds_any or drew_bounds
    if not drew_any:
        raise FigureError(f"{path}: no analytic, bound, or simulated values to draw")
    if spec.kind == "bound-band" and not bounds_any:
        raise FigureError(f"{path}: bound-band figure but no bound columns are populated")


def _draw_tradeoff_panel(ax, records, spec, path) -> None:
    metrics = {record.metric for record in records}
    needed = ("throughput_primary", "throughput_secondary")
    missing = [name for name in needed if name not in metrics]
    if missing:
        raise FigureError(
            f"{path}: tradeoff-scatter needs metrics {needed[0]} and "
            f"{needed[1]}; missing {', '.join(missing)}"
        )
    series = _group_series(records)
    pairs_total = 0
    for index, (key, group) in enumerate(series.items()):
        points = _sorted_points(group, key, path)
        primary: dict[float, tuple[float, float]] = {}
        secondary: dict[float, tuple[float, float]] = {}
        for row in points:
            if row.simulated_mean is not None:
                value, err = row.simulated_mean, row.simulated_stderr or 0.0
            elif row.analytic_value is not None:
                value, err = row.analytic_value, 0.0
            else:
                continue
            if row.metric == needed[0]:
                primary[row.sweep_value] = (value, err)
            elif row.metric == needed[1]:
                secondary[row.sweep_value] = (value, err)
        common = sorted(set(primary) & set(secondary))
        if not common:
            continue
        pairs_total += len(common)
        xs = [primary[v][0] for v in common]
        ys = [secondary[v][0] for v in common]
        color = _COLORS[index % len(_COLORS)]
        ax.plot(xs, ys, color=color, linewidth=1.0, alpha=0.6, zorder=2)
        ax.errorbar(xs, ys,
                    xerr=[primary[v][1] for v in common],
                    yerr=[secondary[v][1] for v in common],
                    fmt="o", markersize=4, capsize=2, color=color,
                    linestyle="none", zorder=3, label=_series_label(*key))
    if pairs_total == 0:
        raise FigureError(
            f"{path}: no sweep value carries both throughput metrics"
        )


def render(spec: FigureSpec, out: str | None = None) -> str:
    """Render a figure spec to an image file and return the written path.

    ``out`` overrides the spec's output path.  Each input table becomes
    one panel.  Raises FigureError when a table is missing, empty, lacks
    the expected columns, or has nothing to draw for the requested kind.
    """
    out_path = out if out is not None else spec.output
    panels = [(path, read_result_table(path)) for path in spec.inputs]
    with matplotlib.rc_context(_RC):
        fig, axes = plt.subplots(
            1, len(panels), figsize=(4.8 * len(panels), 3.6),
            squeeze=False, layout="constrained")
        try:
            for index, (path, records) in enumerate(panels):
                ax = axes[0][index]
                if spec.kind == "tradeoff-scatter":
                    _draw_tradeoff_panel(ax, records, spec, path)
                else:
                    _draw_curve_panel(ax, records, spec, path)
                ax.grid(True, alpha=0.3, linewidth=0.5)
                ax.set_xlabel(spec.x_label)
                if index == 0:
                    ax.set_ylabel(spec.y_label)
                if spec.panel_titles:
                    ax.set_title(spec.panel_titles[index])
                handles, labels = ax.get_legend_handles_labels()
                if labels:
                    ax.legend(framealpha=0.9)
            if spec.title:
                fig.suptitle(spec.title)
            directory = os.path.dirname(out_path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            extension = os.path.splitext(out_path)[1].lower()
            fig.savefig(out_path, dpi=spec.dpi,
                        metadata=_STRIP_METADATA.get(extension))
        finally:
            plt.close(fig)
    return out_path
