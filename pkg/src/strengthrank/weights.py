"""Per-match weights: recency decay, competition importance, margin of victory.

Each factor multiplies into a single per-match weight that scales that
match's log-likelihood contribution. Recency follows a half-period decay,
importance follows the competition category, and the optional margin
factor grows logarithmically with the winning goal difference.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, ImportanceClass, MatchRecord

__all__ = [
    "WeightConfig",
    "MatchWeights",
    "time_weight",
    "importance_weight",
    "goal_diff_weight",
    "fifa_decay_curve",
    "match_weights",
    "combined_weights",
    "decay_curve_rows",
]

IMPORTANCE_WEIGHTS: dict[ImportanceClass, float] = {
    ImportanceClass.FRIENDLY: 1.0,
    ImportanceClass.QUALIFIER: 2.5,
    ImportanceClass.CONFEDERATION_TOURNAMENT: 3.0,
    ImportanceClass.WORLD_CUP: 4.0,
    ImportanceClass.DOMESTIC_LEAGUE: 1.0,
}

# Step weights applied by the official FIFA scheme to yearly age bands,
# newest first; anything older than the last band gets zero.
FIFA_BAND_WEIGHTS = (1.0, 0.5, 0.3, 0.2)
FIFA_BAND_DAYS = 365


@dataclass(frozen=True)
class WeightConfig:
    """How to weight matches for one fit.

    half_period_days: age at which a match's weight halves.
    reference_date: the "as of" date; match age is counted back from here.
    use_importance: multiply in the competition-importance factor.
    use_goal_diff: multiply in the margin factor (only meaningful for
        win/draw/loss models; score models already see the margin).
    """

    half_period_days: float
    reference_date: dt.date
    use_importance: bool = True
    use_goal_diff: bool = False

    def __post_init__(self) -> None:
        if not self.half_period_days > 0:
            raise ValueError(
                f"half_period_days must be positive, got {self.half_period_days}"
            )


@dataclass(frozen=True)
class MatchWeights:
    """The individual weight factors for one match and their product."""

    time: float
    importance: float
    goal_diff: float
    combined: float


def time_weight(days_back: float, half_period_days: float) -> float:
    """Recency weight: halves every ``half_period_days`` of match age."""
    if half_period_days <= 0:
        raise ValueError(f"half_period_days must be positive, got {half_period_days}")
    if days_back < 0:
        raise ValueError(f"match lies {-days_back} days in the future")
    return 0.5 ** (days_back / half_period_days)


def importance_weight(importance: ImportanceClass) -> float:
    """Competition-importance weight; friendlies and league matches get 1."""
    return IMPORTANCE_WEIGHTS[importance]


def goal_diff_weight(home_goals: int, away_goals: int) -> float:
    """Margin weight: 1 for draws, log2(|goal difference| + 1) otherwise.

    One-goal wins keep weight 1; three-goal wins count double; seven-goal
    wins count triple.
    """
    if home_goals < 0 or away_goals < 0:
        raise ValueError("goal counts must be non-negative")
    diff = abs(home_goals - away_goals)
    if diff == 0:
        return 1.0
    return math.log2(diff + 1)


def fifa_decay_curve(days_back: float) -> float:
    """The step decay used by the pre-2018 official FIFA ranking.

    Full weight for the newest year of matches, then 0.5, 0.3, 0.2 for the
    three years after, and zero beyond four years. Plotted against
    ``time_weight`` this shows how coarse the official scheme is.
    """
    if days_back < 0:
        raise ValueError(f"match lies {-days_back} days in the future")
    band = int(days_back // FIFA_BAND_DAYS)
    if band >= len(FIFA_BAND_WEIGHTS):
        return 0.0
    return FIFA_BAND_WEIGHTS[band]


def match_weights(match: MatchRecord, config: WeightConfig) -> MatchWeights:
    """All weight factors for one match under ``config``.

    The combined weight is the product of exactly the enabled factors;
    disabled factors are reported but enter the product as 1.
    """
    days_back = (config.reference_date - match.date).days
    w_time = time_weight(days_back, config.half_period_days)
    w_imp = importance_weight(match.importance)
    w_gd = goal_diff_weight(match.home_goals, match.away_goals)
    combined = w_time
    if config.use_importance:
        combined *= w_imp
    if config.use_goal_diff:
        combined *= w_gd
    return MatchWeights(w_time, w_imp, w_gd, combined)


_IMPORTANCE_TABLE = np.array(
    [IMPORTANCE_WEIGHTS[imp] for imp in ImportanceClass], dtype=float
)


def combined_weights(dataset: Dataset, config: WeightConfig) -> np.ndarray:
    """Vectorised combined weights for every match in the dataset."""
    arr = dataset.arrays
    days_back = config.reference_date.toordinal() - arr.date_ordinal
    if days_back.size and days_back.min() < 0:
        offender = int(np.argmin(days_back))
        match = dataset.matches[offender]
        raise ValueError(
            f"match on {match.date} lies after the reference date "
            f"{config.reference_date}"
        )
    weights = 0.5 ** (days_back / config.half_period_days)
    if config.use_importance:
        weights = weights * _IMPORTANCE_TABLE[arr.importance_code]
    if config.use_goal_diff:
        diff = np.abs(arr.home_goals - arr.away_goals)
        weights = weights * np.where(diff == 0, 1.0, np.log2(diff + 1))
    return weights


def decay_curve_rows(
    half_period_days: float, max_days: int = 1460, step: int = 1
) -> list[tuple[int, float, float]]:
    """(days_back, half-period weight, FIFA step weight) rows for plotting."""
    if max_days < 0 or step <= 0:
        raise ValueError("max_days must be non-negative and step positive")
    return [
        (d, time_weight(d, half_period_days), fifa_decay_curve(d))
        for d in range(0, max_days + 1, step)
    ]
