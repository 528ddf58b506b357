"""Draw mean curves with standard-deviation error bars from a summary CSV.

The input is any CSV with an x column (``alpha`` or ``a``), a ``method``
column, and ``<metric>_mean`` / ``<metric>_std`` columns, i.e. the schema of
the experiment harness's summary.csv and bestf1.csv outputs. Statistics are
taken as-is; nothing is recomputed from long-format rows.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


class PlotError(Exception):
    pass


@dataclass
class CurveSpec:
    csv_path: str
    x: str = "alpha"
    metrics: list[str] = field(default_factory=lambda: ["f1"])
    out_path: str = "fig.png"
    title: str | None = None

    def __post_init__(self):
        if self.x not in ("alpha", "a"):
            raise PlotError(f"x axis must be 'alpha' or 'a', got {self.x!r}")
        if not self.metrics:
            raise PlotError("at least one metric is required")


def _read_rows(spec: CurveSpec) -> tuple[list[dict], list[str]]:
    with open(spec.csv_path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        rows = list(reader)
    if not header or not rows:
        raise PlotError(f"{spec.csv_path}: no data rows")
    required = [spec.x, "method"] + [f"{m}_mean" for m in spec.metrics]
    for col in required:
        if col not in header:
            raise PlotError(f"{spec.csv_path}: missing column {col!r}")
    return rows, header


def build_figure(spec: CurveSpec):
    """Build the matplotlib figure; one errorbar line per (method, metric).

    A (method, x) value appearing twice is ambiguous and rejected.
    """
    rows, header = _read_rows(spec)

    methods = sorted({r["method"] for r in rows})
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for method in methods:
        mine = sorted(((float(r[spec.x]), r) for r in rows
                       if r["method"] == method), key=lambda t: t[0])
        xs = [x for x, _ in mine]
        if len(set(xs)) != len(xs):
            raise PlotError(
                f"{spec.csv_path}: multiple rows per {spec.x} for method "
                f"{method!r}; aggregate first (e.g. plot bestf1.csv)")
        for metric in spec.metrics:
            means = [float(r[f"{metric}_mean"]) for _, r in mine]
            std_col = f"{metric}_std"
            stds = [float(r[std_col]) if std_col in header else 0.0
                    for _, r in mine]
            ax.errorbar(xs, means, yerr=stds, marker="o", capsize=3,
                        label=f"{method} {metric}")
    ax.set_xlabel(spec.x)
    ax.set_ylabel("score")
    ax.set_ylim(-0.05, 1.05)
    ax.grid(True, alpha=0.3)
    ax.legend()
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    return fig, ax


def render(spec: CurveSpec) -> str:
    """Write the figure to spec.out_path and return that path."""
    fig, _ = build_figure(spec)
    fig.savefig(spec.out_path)
    plt.close(fig)
    return spec.out_path
