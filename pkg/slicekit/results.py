# slicekit/results.py
"""Result rows, CSV emission and SVG line plots."""
from __future__ import annotations

import csv
import logging
import os
from collections import defaultdict
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

logger = logging.getLogger(__name__)

RESULT_FIELDS = ["experiment", "method", "seed", "axis", "value"]
TIMING_FIELDS = ["experiment", "method", "seed", "axis", "seconds", "evaluations"]
SUMMARY_FIELDS = ["experiment", "method", "axis", "mean", "std", "runs"]


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    method: str
    seed: int
    axis: float  # L or flow step
    value: float
    seconds: float = 0.0
    evaluations: int = 0

    def sort_key(self):
        return (self.experiment, self.method, self.seed, self.axis)


def _fmt(value: float) -> str:
    """Locale-independent shortest round-trip text ('.' decimal point)."""
    value = float(value)
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _write(path: str, fields: list[str], rows: list[dict]) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(f, fieldnames=fields, lineterminator="\r\n")
        w.writeheader()
        for r in rows:
            w.writerow(r)


def write_results_csv(path: str, rows: list[ResultRow]) -> None:
    """Deterministic columns only, sorted; reruns produce identical bytes."""
    ordered = sorted(rows, key=ResultRow.sort_key)
    _write(path, RESULT_FIELDS, [
        {"experiment": r.experiment, "method": r.method, "seed": r.seed, "axis": _fmt(r.axis), "value": _fmt(r.value)}
        for r in ordered
    ])


def write_timings_csv(path: str, rows: list[ResultRow]) -> None:
    ordered = sorted(rows, key=ResultRow.sort_key)
    _write(path, TIMING_FIELDS, [
        {"experiment": r.experiment, "method": r.method, "seed": r.seed, "axis": _fmt(r.axis),
         "seconds": f"{r.seconds:.6f}", "evaluations": r.evaluations}
        for r in ordered
    ])


def aggregate(rows: list[ResultRow]) -> dict[tuple[str, str], dict[float, list[float]]]:
    """(experiment, method) -> axis -> values over seeds."""
    buckets: dict[tuple[str, str], dict[float, list[float]]] = defaultdict(lambda: defaultdict(list))
    for r in sorted(rows, key=ResultRow.sort_key):
        buckets[(r.experiment, r.method)][r.axis].append(r.value)
    return buckets


def write_summary_csv(path: str, rows: list[ResultRow]) -> None:
    out = []
    for (experiment, method), series in sorted(aggregate(rows).items()):
        for axis in sorted(series):
            vals = np.asarray(series[axis])
            out.append({"experiment": experiment, "method": method, "axis": _fmt(axis),
                        "mean": _fmt(np.mean(vals)), "std": _fmt(np.std(vals)), "runs": vals.size})
    _write(path, SUMMARY_FIELDS, out)


def loglog_slope(axis: list[float], values: list[float]) -> float:
    """Least-squares slope of log(values) against log(axis)."""
    x = np.log(np.asarray(axis, dtype=np.float64))
    y = np.log(np.asarray(values, dtype=np.float64))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def plot_series(path: str, rows: list[ResultRow], experiment: str, xlabel: str, ylabel: str,
                log_x: bool = False, log_y: bool = False) -> None:
    """One SVG line plot of the seed-mean value against the axis, one line per method."""
    series = {method: s for (exp, method), s in aggregate(rows).items() if exp == experiment}
    if not series:
        return
    plt.rcParams["svg.hashsalt"] = "slicekit"
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for method in sorted(series):
        axis = sorted(series[method])
        means = [float(np.mean(series[method][a])) for a in axis]
        if log_y:
            # Zero metrics (converged flows) cannot be drawn on a log axis
            pairs = [(a, m) for a, m in zip(axis, means) if m > 0]
            if not pairs:
                continue
            axis, means = map(list, zip(*pairs))
        ax.plot(axis, means, marker="o", markersize=3, linewidth=1.2, label=method)
    if log_x:
        ax.set_xscale("log")
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(experiment)
    ax.grid(True, linewidth=0.3, alpha=0.6)
    if ax.lines:
        ax.legend(fontsize=7, ncol=2)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info(f"Wrote plot {path}")
