"""Rolling out-of-sample evaluation with per-block refitting.

Matches are predicted in blocks, one block per calendar date: every match
on a date is forecast from a model fitted only on matches played strictly
before that date, inside a trailing training window, and the fit is
warm-started from the previous block. Mean rank probability score per
(model class, half period) cell summarizes forecast quality, and a grid
search over half periods picks the best decay rate per class.

Seasons are inferred from the schedule itself: a gap between consecutive
match dates longer than ``season_gap_days`` starts a new season, and the
first ``burn_in_rounds`` date blocks of each season are trained on but
never evaluated. The update granularity field distinguishes refitting per
block from refitting per match; because blocks are single calendar dates
and matches within a date carry no ordering, both settings produce the
same predictions here, and the field is kept for forward compatibility
with sub-date fixture ordering.
"""

from __future__ import annotations

import datetime as dt
import enum
import json
import math
import statistics
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .data import Dataset, MatchRecord, OutcomeLabel, outcome_label
from .estimation import (
    EstimationError,
    ModelClass,
    ModelSpec,
    fit,
    predict_match,
    warm_start_vector,
)
from .ordinal import OutcomeDistribution

__all__ = [
    "BacktestError",
    "UpdateGranularity",
    "BacktestConfig",
    "UniformBaseline",
    "PredictionRecord",
    "CellSummary",
    "BlockAudit",
    "BacktestReport",
    "GridResult",
    "rps",
    "run_backtest",
    "grid_search",
    "report_to_json",
    "summary_rows",
    "curve_rows",
    "prediction_rows",
]

RPS_TIE_TOLERANCE = 1e-6


class BacktestError(ValueError):
    """Raised for unusable backtest configurations or empty evaluations."""


class UpdateGranularity(enum.Enum):
    ROUND = "round"
    MATCH = "match"


@dataclass(frozen=True)
class BacktestConfig:
    """Shape of one rolling evaluation run.

    ``training_window_days`` is a hard cutoff on top of the decay weights:
    matches older than the window simply drop out of the fit. The
    ``evaluation_filter`` selects which matches are scored; filtered-out
    matches still feed every training window.
    """

    training_window_days: int
    burn_in_rounds: int = 0
    half_period_grid: tuple[float, ...] = ()
    evaluation_filter: Callable[[MatchRecord], bool] | None = None
    update_granularity: UpdateGranularity = UpdateGranularity.ROUND
    season_gap_days: int = 60

    def __post_init__(self) -> None:
        if self.training_window_days <= 0:
            raise BacktestError(
                f"training window must be positive, got {self.training_window_days}"
            )
        if self.burn_in_rounds < 0:
            raise BacktestError(
                f"burn-in rounds must be nonnegative, got {self.burn_in_rounds}"
            )
        if self.season_gap_days <= 0:
            raise BacktestError(
                f"season gap must be positive, got {self.season_gap_days}"
            )
        grid = tuple(float(h) for h in self.half_period_grid)
        object.__setattr__(self, "half_period_grid", grid)
        if any(h <= 0 for h in grid):
            raise BacktestError("half-period grid entries must be positive")
        if isinstance(self.update_granularity, str):
            object.__setattr__(
                self,
                "update_granularity",
                UpdateGranularity(self.update_granularity.lower()),
            )
        if grid and self.training_window_days < max(grid):
            warnings.warn(
                "training window is shorter than the largest grid half-period; "
                "the window cutoff will dominate the slowest decays",
                stacklevel=2,
            )


@dataclass(frozen=True)
class UniformBaseline:
    """A no-skill reference forecaster: every outcome gets probability 1/3."""

    label: str = "uniform-baseline"

    def distribution(self) -> OutcomeDistribution:
        third = 1.0 / 3.0
        return OutcomeDistribution(third, third, third)


@dataclass(frozen=True)
class PredictionRecord:
    """One out-of-sample forecast with its realized outcome and score."""

    date: dt.date
    home: str
    away: str
    model_label: str
    half_period_days: float | None
    distribution: OutcomeDistribution
    realized: OutcomeLabel
    rps: float


@dataclass(frozen=True)
class CellSummary:
    """Aggregate for one (model, half-period) cell of the report."""

    model_label: str
    half_period_days: float | None
    mean_rps: float
    n_predictions: int
    n_failures: int


@dataclass(frozen=True)
class BlockAudit:
    """Provenance of one evaluation block, for leakage checks."""

    date: dt.date
    season: int
    round_in_season: int
    training_start: dt.date
    n_training_matches: int
    latest_training_date: dt.date | None
    n_evaluated: int


@dataclass(frozen=True)
class BacktestReport:
    """Everything a rolling evaluation produced.

    ``best`` holds one cell per model label, ordered best-first by mean
    RPS; within a label, half-period ties inside ``RPS_TIE_TOLERANCE``
    resolve toward the smaller (more responsive) half-period.
    """

    cells: tuple[CellSummary, ...]
    best: tuple[CellSummary, ...]
    predictions: tuple[PredictionRecord, ...]
    blocks: tuple[BlockAudit, ...]
    notes: tuple[str, ...] = ()

    def cell(self, model_label: str, half_period_days: float | None) -> CellSummary:
        for cell in self.cells:
            if cell.model_label == model_label and _same_period(
                cell.half_period_days, half_period_days
            ):
                return cell
        raise KeyError((model_label, half_period_days))

    def best_for(self, model_label: str) -> CellSummary:
        for cell in self.best:
            if cell.model_label == model_label:
                return cell
        raise KeyError(model_label)

    @property
    def class_ranking(self) -> tuple[str, ...]:
        return tuple(cell.model_label for cell in self.best)


@dataclass(frozen=True)
class GridResult:
    """Outcome of a half-period grid search for one model class."""

    model_class: ModelClass
    best_half_period_days: float
    curve: tuple[CellSummary, ...]
    report: "BacktestReport | None" = field(repr=False, compare=False, default=None)


def _same_period(a: float | None, b: float | None) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return a == b


def rps(pred: OutcomeDistribution, realized: OutcomeLabel) -> float:
    """Rank probability score of a three-way forecast; lower is better.

    Squared distance between the cumulative forecast and the cumulative
    realized indicator over the ordered outcomes (home, draw, away),
    averaged over the two free cumulative steps.
    """
    y_home = 1.0 if realized is OutcomeLabel.HOME_WIN else 0.0
    y_away = 1.0 if realized is OutcomeLabel.AWAY_WIN else 0.0
    return ((pred.p_home - y_home) ** 2 + (pred.p_away - y_away) ** 2) / 2.0


# ---------------------------------------------------------------------------
# Block schedule


@dataclass(frozen=True)
class _Block:
    date: dt.date
    season: int
    round_in_season: int


def _date_blocks(data: Dataset, season_gap_days: int) -> list[_Block]:
    dates = sorted({m.date for m in data.matches})
    blocks = []
    season = 0
    round_in_season = 0
    previous = None
    for date in dates:
        if previous is not None and (date - previous).days > season_gap_days:
            season += 1
            round_in_season = 0
        blocks.append(_Block(date, season, round_in_season))
        round_in_season += 1
        previous = date
    return blocks


class _ModelState:
    """Per-spec mutable state threaded through the block sequence."""

    def __init__(self, entry: ModelSpec | UniformBaseline):
        self.entry = entry
        self.is_baseline = isinstance(entry, UniformBaseline)
        if self.is_baseline:
            self.label = entry.label
            self.half_period: float | None = None
        else:
            self.label = entry.model_class.value
            self.half_period = entry.weights.half_period_days
        self.previous_params = None
        self.rps_values: list[float] = []
        self.failures = 0
        self.notes: list[str] = []

    def key(self) -> tuple[str, float | None]:
        return self.label, self.half_period

    def predict_block(
        self, training: Dataset, date: dt.date, matches: list[MatchRecord]
    ) -> list[PredictionRecord]:
        if self.is_baseline:
            dist = self.entry.distribution()
            return [self._record(m, dist) for m in matches]
        spec = self.entry.with_reference_date(date)
        init = warm_start_vector(spec, training.team_names, self.previous_params)
        try:
            result = fit(spec, training, init=init)
        except EstimationError as exc:
            self.failures += len(matches)
            self.notes.append(f"{date.isoformat()}: fit failed: {exc}")
            return []
        if not result.converged:
            self.failures += len(matches)
            self.notes.append(
                f"{date.isoformat()}: no convergence, block skipped"
            )
            return []
        self.previous_params = result.params
        records = []
        for m in matches:
            try:
                dist = predict_match(
                    result.params, m.home.name, m.away.name, neutral=m.neutral
                )
            except (EstimationError, ValueError) as exc:
                self.failures += 1
                self.notes.append(
                    f"{date.isoformat()}: {m.home.name} vs {m.away.name} "
                    f"not predicted: {exc}"
                )
                continue
            records.append(self._record(m, dist))
        return records

    def _record(self, m: MatchRecord, dist: OutcomeDistribution) -> PredictionRecord:
        realized = outcome_label(m)
        score = rps(dist, realized)
        self.rps_values.append(score)
        return PredictionRecord(
            date=m.date,
            home=m.home.name,
            away=m.away.name,
            model_label=self.label,
            half_period_days=self.half_period,
            distribution=dist,
            realized=realized,
            rps=score,
        )

    def summary(self) -> CellSummary:
        mean = statistics.fmean(self.rps_values) if self.rps_values else math.nan
        return CellSummary(
            model_label=self.label,
            half_period_days=self.half_period,
            mean_rps=mean,
            n_predictions=len(self.rps_values),
            n_failures=self.failures,
        )


def _pick_best(cells: list[CellSummary]) -> CellSummary:
    """Smallest mean RPS; near-ties go to the smaller half-period."""
    scored = [c for c in cells if c.n_predictions > 0]
    if not scored:
        return cells[0]
    floor = min(c.mean_rps for c in scored)
    candidates = [c for c in scored if c.mean_rps < floor + RPS_TIE_TOLERANCE]
    return min(
        candidates,
        key=lambda c: math.inf if c.half_period_days is None else c.half_period_days,
    )


def run_backtest(
    specs: Sequence[ModelSpec | UniformBaseline],
    data: Dataset,
    cfg: BacktestConfig,
) -> BacktestReport:
    """Evaluate every spec over the rolling block schedule of the data.

    Each evaluation block is one calendar date past the per-season
    burn-in. Every spec is refitted on the trailing window ending the day
    before the block (warm-started from its previous fit) and scored on
    the block's matches that pass the evaluation filter. Blocks whose fit
    fails or does not converge are skipped for that spec and counted.
    """
    if not specs:
        raise BacktestError("no model specs to evaluate")
    states = [_ModelState(entry) for entry in specs]
    seen = set()
    for state in states:
        if state.key() in seen:
            raise BacktestError(
                f"duplicate spec for {state.key()!r} would merge its results"
            )
        seen.add(state.key())

    blocks = _date_blocks(data, cfg.season_gap_days)
    eval_blocks = [b for b in blocks if b.round_in_season >= cfg.burn_in_rounds]
    keep = cfg.evaluation_filter or (lambda m: True)
    by_date: dict[dt.date, list[MatchRecord]] = defaultdict(list)
    for m in data.matches:
        by_date[m.date].append(m)
    n_evaluable = sum(
        1 for b in eval_blocks for m in by_date[b.date] if keep(m)
    )
    if n_evaluable == 0:
        raise BacktestError("no matches to evaluate after burn-in and filtering")

    predictions: list[PredictionRecord] = []
    audits: list[BlockAudit] = []
    for block in eval_blocks:
        matches = [m for m in by_date[block.date] if keep(m)]
        start = block.date - dt.timedelta(days=cfg.training_window_days)
        training = data.window(start, block.date)
        if matches:
            for state in states:
                predictions.extend(
                    state.predict_block(training, block.date, matches)
                )
        audits.append(
            BlockAudit(
                date=block.date,
                season=block.season,
                round_in_season=block.round_in_season,
                training_start=start,
                n_training_matches=len(training),
                latest_training_date=(
                    training.matches[-1].date if training.matches else None
                ),
                n_evaluated=len(matches),
            )
        )

    cells = [state.summary() for state in states]
    by_label: dict[str, list[CellSummary]] = defaultdict(list)
    for cell in cells:
        by_label[cell.model_label].append(cell)
    best = [_pick_best(group) for group in by_label.values()]
    best.sort(
        key=lambda c: (math.isnan(c.mean_rps), c.mean_rps, c.model_label)
    )
    notes = tuple(note for state in states for note in state.notes)
    return BacktestReport(
        cells=tuple(cells),
        best=tuple(best),
        predictions=tuple(predictions),
        blocks=tuple(audits),
        notes=notes,
    )


def grid_search(
    model_class: ModelClass | str,
    data: Dataset,
    cfg: BacktestConfig,
    use_importance: bool = True,
) -> GridResult:
    """Backtest one class across the config's half-period grid.

    Returns the best half-period (ties toward the smaller one) together
    with the full RPS curve for plotting.
    """
    if isinstance(model_class, str):
        model_class = ModelClass.from_label(model_class)
    if not cfg.half_period_grid:
        raise BacktestError("half-period grid is empty")
    specs = [
        ModelSpec.for_class(model_class, h, use_importance=use_importance)
        for h in cfg.half_period_grid
    ]
    report = run_backtest(specs, data, cfg)
    curve = tuple(
        sorted(report.cells, key=lambda c: c.half_period_days)
    )
    best = report.best_for(model_class.value)
    return GridResult(
        model_class=model_class,
        best_half_period_days=best.half_period_days,
        curve=curve,
        report=report,
    )


# ---------------------------------------------------------------------------
# Report serialization


def _num(value: float | None):
    if value is None:
        return None
    return value if math.isfinite(value) else None


def report_to_json(report: BacktestReport) -> str:
    payload = {
        "cells": [
            {
                "model_class": c.model_label,
                "half_period_days": c.half_period_days,
                "mean_rps": _num(c.mean_rps),
                "n_predictions": c.n_predictions,
                "n_failures": c.n_failures,
            }
            for c in report.cells
        ],
        "best": [
            {
                "model_class": c.model_label,
                "half_period_days": c.half_period_days,
                "mean_rps": _num(c.mean_rps),
                "n_predictions": c.n_predictions,
                "n_failures": c.n_failures,
            }
            for c in report.best
        ],
        "class_ranking": list(report.class_ranking),
        "n_blocks": len(report.blocks),
        "n_predictions": len(report.predictions),
        "notes": list(report.notes),
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else ""
    return str(value)


def summary_rows(report: BacktestReport) -> list[list[str]]:
    """Best-half-period table, one row per model, ranked best-first."""
    rows = [["model_class", "optimal_half_period_days", "mean_rps",
             "n_predictions", "n_failures"]]
    for c in report.best:
        rows.append([
            c.model_label,
            _fmt(c.half_period_days),
            _fmt(c.mean_rps),
            str(c.n_predictions),
            str(c.n_failures),
        ])
    return rows


def curve_rows(report: BacktestReport) -> list[list[str]]:
    """Every (model, half-period) cell, for RPS-vs-half-period plots."""
    rows = [["model_class", "half_period_days", "mean_rps",
             "n_predictions", "n_failures"]]
    ordered = sorted(
        report.cells,
        key=lambda c: (
            c.model_label,
            c.half_period_days if c.half_period_days is not None else math.inf,
        ),
    )
    for c in ordered:
        rows.append([
            c.model_label,
            _fmt(c.half_period_days),
            _fmt(c.mean_rps),
            str(c.n_predictions),
            str(c.n_failures),
        ])
    return rows


def prediction_rows(report: BacktestReport) -> list[list[str]]:
    """Per-match audit log of every forecast in the report."""
    rows = [["date", "home", "away", "model_class", "half_period_days",
             "p_home", "p_draw", "p_away", "realized", "rps"]]
    for p in report.predictions:
        rows.append([
            p.date.isoformat(),
            p.home,
            p.away,
            p.model_label,
            _fmt(p.half_period_days),
            repr(p.distribution.p_home),
            repr(p.distribution.p_draw),
            repr(p.distribution.p_away),
            p.realized.value,
            repr(p.rps),
        ])
    return rows
