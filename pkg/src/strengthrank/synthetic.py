"""Synthetic fixture lists and score simulation for demos and testing.

Scores are drawn from the shared-component construction: each side's goals
are an own Poisson count plus a common Poisson count, so the covariance
parameter is the mean of the shared part. Schedules come from the standard
circle method, giving balanced single or double round-robins.
"""

from __future__ import annotations

import datetime as dt

import numpy as np

from .data import Dataset, ImportanceClass, from_records

__all__ = [
    "round_robin_rounds",
    "simulate_league",
    "simulate_matchups",
]


def round_robin_rounds(n_teams: int, double: bool = True) -> list[list[tuple[int, int]]]:
    """Rounds of (home, away) index pairs via the circle method.

    A single round-robin has n_teams - 1 rounds of n_teams / 2 matches;
    the double version mirrors every pairing in the second half.
    """
    if n_teams < 2 or n_teams % 2:
        raise ValueError("round robin needs an even team count of at least 2")
    ring = list(range(1, n_teams))
    rounds = []
    for turn in range(n_teams - 1):
        table = [0] + ring
        pairs = []
        for k in range(n_teams // 2):
            a, b = table[k], table[n_teams - 1 - k]
            # Alternate venue by turn so home counts stay balanced.
            pairs.append((a, b) if (turn + k) % 2 == 0 else (b, a))
        rounds.append(pairs)
        ring = ring[1:] + ring[:1]
    if double:
        rounds += [[(away, home) for home, away in pairs] for pairs in rounds]
    return rounds


def _draw_scores(
    rng: np.random.Generator,
    rate_home: float,
    rate_away: float,
    covariance: float,
) -> tuple[int, int]:
    shared = rng.poisson(covariance) if covariance > 0 else 0
    return int(rng.poisson(rate_home) + shared), int(rng.poisson(rate_away) + shared)


def simulate_league(
    n_teams: int,
    n_seasons: int,
    *,
    strengths: np.ndarray | None = None,
    home_effect: float = 0.25,
    intercept: float = 0.1,
    covariance: float = 0.0,
    drift_sd: float = 0.0,
    seed: int = 0,
    start: dt.date = dt.date(2008, 8, 16),
    round_interval_days: int = 7,
    season_gap_days: int = 90,
) -> Dataset:
    """A double round-robin league with one calendar date per round.

    Scores follow the shared-component model on single strengths. With
    ``drift_sd`` > 0 every team's strength takes a random-walk step after
    each round (re-centred to sum zero), so older matches genuinely carry
    less information about current strength.
    """
    rng = np.random.default_rng(seed)
    if strengths is None:
        strengths = np.linspace(0.8, -0.8, n_teams)
    strengths = np.asarray(strengths, dtype=float)
    strengths = strengths - strengths.mean()
    names = [f"Team{i:02d}" for i in range(n_teams)]

    rows = []
    date = start
    for _ in range(n_seasons):
        for pairs in round_robin_rounds(n_teams, double=True):
            for home, away in pairs:
                gap = strengths[home] + home_effect - strengths[away]
                rate_home = float(np.exp(intercept + gap))
                rate_away = float(np.exp(intercept - gap))
                hg, ag = _draw_scores(rng, rate_home, rate_away, covariance)
                rows.append(
                    (date, names[home], names[away], hg, ag, False,
                     ImportanceClass.DOMESTIC_LEAGUE)
                )
            if drift_sd > 0:
                strengths = strengths + rng.normal(0.0, drift_sd, n_teams)
                strengths = strengths - strengths.mean()
            date += dt.timedelta(days=round_interval_days)
        date += dt.timedelta(days=season_gap_days)
    return from_records(rows)


def simulate_matchups(
    n_teams: int,
    n_matches: int,
    *,
    strengths: np.ndarray | None = None,
    home_effect: float = 0.25,
    intercept: float = 0.1,
    covariance: float = 0.0,
    seed: int = 0,
    date: dt.date = dt.date(2018, 5, 13),
) -> tuple[Dataset, np.ndarray]:
    """Uniform random pairings all played on one date (every weight is 1).

    Returns the dataset and the true sum-zero strengths used to draw it.
    """
    rng = np.random.default_rng(seed)
    if strengths is None:
        strengths = np.linspace(0.7, -0.7, n_teams)
    strengths = np.asarray(strengths, dtype=float)
    strengths = strengths - strengths.mean()
    names = [f"Team{i:02d}" for i in range(n_teams)]
    rows = []
    for _ in range(n_matches):
        home, away = rng.choice(n_teams, size=2, replace=False)
        gap = strengths[home] + home_effect - strengths[away]
        rate_home = float(np.exp(intercept + gap))
        rate_away = float(np.exp(intercept - gap))
        hg, ag = _draw_scores(rng, rate_home, rate_away, covariance)
        rows.append(
            (date, names[home], names[away], hg, ag, False,
             ImportanceClass.DOMESTIC_LEAGUE)
        )
    dataset = from_records(rows, reference_date=date)
    order = [int(name[4:]) for name in dataset.team_names]
    return dataset, strengths[order]
