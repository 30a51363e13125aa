"""Rankings from fitted parameters.

Single-strength fits rank directly by strength. Defence/attack fits get
two separate rankings, or a combined one through a deterministic
round-robin: every ordered pair plays once, outcome probabilities come
from the score model, and teams are ordered by expected points
(3 per win, 1 per draw). No sampling is involved anywhere, so rankings
are exactly reproducible.

Ties share the smaller position and are flagged; tied teams are listed
in name order. Tie detection uses exact score equality, which is the
right notion here because symmetric inputs produce bitwise-equal
expected points while genuinely different strengths do not.
"""

from __future__ import annotations

import datetime as dt
import enum
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .data import Dataset, TeamId
from .estimation import (
    EstimationError,
    FitResult,
    ModelSpec,
    ParameterSet,
    fit,
    warm_start_vector,
)
from .poisson import scoring_rates, skellam_outcome

__all__ = [
    "RankingError",
    "ScoreDisplay",
    "RankingEntry",
    "RankingSeries",
    "rank_single",
    "rank_def_att",
    "rank_round_robin",
    "ranking_series",
    "ranking_rows",
    "series_rows",
    "side_by_side_rows",
]


class RankingError(ValueError):
    """Raised when a fit cannot produce the requested ranking."""


class ScoreDisplay(enum.Enum):
    RAW = "raw"
    EXPONENTIATED = "exponentiated"


@dataclass(frozen=True)
class RankingEntry:
    """One line of a ranking table.

    ``team`` is the display name; fitted parameter sets are keyed by name,
    and dataset table indices do not survive window rebuilding.
    """

    position: int
    team: str
    score: float
    tied: bool = False


@dataclass(frozen=True)
class RankingSeries:
    """Date-indexed rankings from sequential warm-started refits.

    ``gaps`` lists requested dates that produced no ranking, with the
    reason (fit failure or non-convergence).
    """

    dates: tuple[dt.date, ...]
    entries: tuple[tuple[RankingEntry, ...], ...]
    gaps: tuple[tuple[dt.date, str], ...] = ()

    def entries_for(self, date: dt.date) -> tuple[RankingEntry, ...]:
        try:
            return self.entries[self.dates.index(date)]
        except ValueError:
            raise KeyError(date) from None

    def position_trace(self, team: str) -> list[tuple[dt.date, int]]:
        """(date, position) points for one team, skipping absent dates."""
        trace = []
        for date, ranked in zip(self.dates, self.entries):
            for entry in ranked:
                if entry.team == team:
                    trace.append((date, entry.position))
                    break
        return trace

    def max_position_jump(self, team: str) -> int:
        """Largest move between consecutive appearances; a smoothness stat."""
        trace = self.position_trace(team)
        if len(trace) < 2:
            return 0
        return max(
            abs(b[1] - a[1]) for a, b in zip(trace, trace[1:])
        )


def _params_of(result: FitResult | ParameterSet) -> ParameterSet:
    return result.params if isinstance(result, FitResult) else result


def _ranked(scored: Sequence[tuple[str, float]]) -> list[RankingEntry]:
    ordered = sorted(scored, key=lambda kv: (-kv[1], kv[0]))
    multiplicity = Counter(score for _, score in ordered)
    entries: list[RankingEntry] = []
    for i, (name, score) in enumerate(ordered):
        if i > 0 and score == ordered[i - 1][1]:
            position = entries[-1].position
        else:
            position = i + 1
        entries.append(
            RankingEntry(position, name, float(score),
                         tied=multiplicity[score] > 1)
        )
    return entries


def rank_single(
    result: FitResult | ParameterSet,
    display: ScoreDisplay | str = ScoreDisplay.RAW,
) -> list[RankingEntry]:
    """Rank a single-strength fit by strength, descending.

    ``display`` controls the reported score only: Exponentiated shows
    exp(strength) on a positive scale. Positions are identical either
    way, since the transform is strictly increasing.
    """
    if isinstance(display, str):
        display = ScoreDisplay(display.lower())
    params = _params_of(result)
    if params.strengths is None:
        raise RankingError(
            "fit has separate attack/defence strengths; use rank_def_att "
            "or rank_round_robin"
        )
    values = params.strengths
    if display is ScoreDisplay.EXPONENTIATED:
        values = np.exp(values)
    return _ranked(list(zip(params.teams, values)))


def rank_def_att(
    result: FitResult | ParameterSet,
) -> tuple[list[RankingEntry], list[RankingEntry]]:
    """Separate attack and defence rankings for a two-strength fit.

    Both sort descending: a larger defence value suppresses opponent
    scoring, so it ranks better just like a larger attack value.
    """
    params = _params_of(result)
    if params.attack is None or params.defence is None:
        raise RankingError(
            "fit has a single strength per team; use rank_single"
        )
    attack = _ranked(list(zip(params.teams, params.attack)))
    defence = _ranked(list(zip(params.teams, params.defence)))
    return attack, defence


def rank_round_robin(
    result: FitResult | ParameterSet,
    neutral: bool = False,
    max_goals: int = 40,
) -> list[RankingEntry]:
    """Rank any score-model fit by expected round-robin points.

    Every ordered pair (i, j), i != j, plays once with i at home (the
    home effect applies unless ``neutral``). Each team collects
    3 * P(win) + 1 * P(draw) per match, computed exactly from the score
    distribution; no simulation.
    """
    params = _params_of(result)
    if not params.model_class.is_poisson:
        raise RankingError(
            f"{params.model_class.value} is not a score model; round-robin "
            "ranking needs scoring rates"
        )
    poisson_params = params.to_poisson_params()
    teams = params.teams
    points = {name: 0.0 for name in teams}
    for i, home in enumerate(teams):
        for j, away in enumerate(teams):
            if i == j:
                continue
            rates = scoring_rates(
                poisson_params, TeamId(i, home), TeamId(j, away), neutral
            )
            dist = skellam_outcome(rates, max_goals=max_goals)
            points[home] += 3.0 * dist.p_home + dist.p_draw
            points[away] += 3.0 * dist.p_away + dist.p_draw
    return _ranked(list(points.items()))


def ranking_series(
    spec: ModelSpec,
    data: Dataset,
    dates: Sequence[dt.date],
    training_window_days: int,
) -> RankingSeries:
    """Refit at each date on its trailing window and rank.

    Fits are warm-started from the previous date. A date whose window
    cannot be fitted (or whose fit does not converge) becomes a gap, not
    a crash. Single-strength classes rank by strength; defence/attack
    classes rank by round-robin expected points, the only total order
    their two parameters support.
    """
    if list(dates) != sorted(set(dates)):
        raise RankingError("dates must be strictly ascending")
    if not dates:
        raise RankingError("no dates requested")
    if training_window_days <= 0:
        raise RankingError("training window must be positive")

    previous = None
    out_dates: list[dt.date] = []
    out_entries: list[tuple[RankingEntry, ...]] = []
    gaps: list[tuple[dt.date, str]] = []
    for date in dates:
        start = date - dt.timedelta(days=training_window_days)
        window = data.window(start, date)
        dated_spec = spec.with_reference_date(date)
        try:
            init = warm_start_vector(dated_spec, window.team_names, previous)
            result = fit(dated_spec, window, init=init)
        except EstimationError as exc:
            gaps.append((date, str(exc)))
            continue
        if not result.converged:
            gaps.append((date, "no convergence"))
            continue
        previous = result.params
        if spec.model_class.is_def_att:
            ranked = rank_round_robin(result)
        else:
            ranked = rank_single(result)
        out_dates.append(date)
        out_entries.append(tuple(ranked))
    if not out_dates:
        raise RankingError(
            "no requested date produced a ranking; first failure: "
            f"{gaps[0][0].isoformat()}: {gaps[0][1]}"
        )
    return RankingSeries(tuple(out_dates), tuple(out_entries), tuple(gaps))


# ---------------------------------------------------------------------------
# Delimited output


def ranking_rows(entries: Sequence[RankingEntry]) -> list[list[str]]:
    rows = [["position", "team", "score", "tied"]]
    for e in entries:
        rows.append([str(e.position), e.team, repr(e.score),
                     "true" if e.tied else "false"])
    return rows


def series_rows(series: RankingSeries) -> list[list[str]]:
    """Long format (date, team, position, score), one row per team-date."""
    rows = [["date", "team", "position", "score"]]
    for date, ranked in zip(series.dates, series.entries):
        for e in ranked:
            rows.append([date.isoformat(), e.team, str(e.position),
                         repr(e.score)])
    return rows


def side_by_side_rows(
    series: RankingSeries,
    team: str,
    external: Mapping[dt.date, int],
    external_label: str = "external_position",
) -> list[list[str]]:
    """One team's trace merged with an externally supplied position series."""
    rows = [["date", "team", "position", external_label]]
    for date, position in series.position_trace(team):
        other = external.get(date)
        rows.append([
            date.isoformat(),
            team,
            str(position),
            "" if other is None else str(other),
        ])
    return rows
