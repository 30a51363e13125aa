"""Figure rendering for the CLI report paths.

Uses the Agg backend so figures write to files without a display. Every
function takes already-computed data plus a target path and returns the
path it wrote, so the CLI can place figures next to the delimited
outputs they illustrate.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .backtest import BacktestReport
from .ranking import RankingSeries

__all__ = [
    "save_decay_figure",
    "save_rps_curve_figure",
    "save_summary_figure",
    "save_series_figure",
]


def save_decay_figure(
    rows: Sequence[tuple[int, float, float]],
    half_period_days: float,
    path: str | Path,
) -> Path:
    """Smooth half-period decay against the official step decay."""
    path = Path(path)
    days = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(days, [r[1] for r in rows],
            label=f"half period {half_period_days:g} days")
    ax.step(days, [r[2] for r in rows], where="post", linestyle="--",
            label="official step weights")
    ax.set_xlabel("days before the reference date")
    ax.set_ylabel("match weight")
    ax.set_ylim(0, 1.05)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def save_rps_curve_figure(report: BacktestReport, path: str | Path) -> Path:
    """Mean RPS against half period, one line per model class."""
    path = Path(path)
    by_label: dict[str, list[tuple[float, float]]] = {}
    for cell in report.cells:
        if cell.half_period_days is None or not math.isfinite(cell.mean_rps):
            continue
        by_label.setdefault(cell.model_label, []).append(
            (cell.half_period_days, cell.mean_rps)
        )
    fig, ax = plt.subplots(figsize=(7, 4))
    for label in sorted(by_label):
        points = sorted(by_label[label])
        ax.plot([p[0] for p in points], [p[1] for p in points],
                marker="o", label=label)
    ax.set_xlabel("half period (days)")
    ax.set_ylabel("mean rank probability score")
    if by_label:
        ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def save_summary_figure(report: BacktestReport, path: str | Path) -> Path:
    """Best mean RPS per model class, best at the top."""
    path = Path(path)
    scored = [c for c in report.best if math.isfinite(c.mean_rps)]
    fig, ax = plt.subplots(figsize=(7, 0.5 * max(len(scored), 4) + 1.5))
    labels = [c.model_label for c in scored][::-1]
    values = [c.mean_rps for c in scored][::-1]
    ax.barh(labels, values)
    ax.set_xlabel("mean rank probability score (best half period)")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def save_series_figure(
    series: RankingSeries,
    path: str | Path,
    teams: Sequence[str] | None = None,
) -> Path:
    """Position traces over time; position 1 sits at the top."""
    path = Path(path)
    if teams is None:
        teams = sorted({e.team for ranked in series.entries for e in ranked})
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for team in teams:
        trace = series.position_trace(team)
        if not trace:
            continue
        ax.plot([t[0] for t in trace], [t[1] for t in trace],
                marker=".", label=team)
    ax.invert_yaxis()
    ax.set_xlabel("date")
    ax.set_ylabel("position")
    if len(list(teams)) <= 12:
        ax.legend(fontsize="small", ncol=2)
    fig.autofmt_xdate()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
