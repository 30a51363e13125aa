"""Shared synthetic fixtures for the test suite."""

import datetime as dt

import numpy as np
import pytest

from strengthrank.data import ImportanceClass, from_records
from strengthrank.estimation import ModelClass


def make_mixed_dataset(n_teams=6, n_matches=60, seed=0):
    """Random pairings with varied dates, venues, and importance classes.

    Scores are Poisson-ish with enough draws to keep every outcome kind
    present, which the ordinal likelihoods need.
    """
    rng = np.random.default_rng(seed)
    teams = [f"T{i}" for i in range(n_teams)]
    importances = list(ImportanceClass)
    rows = []
    date = dt.date(2017, 1, 7)
    for m in range(n_matches):
        i, j = (int(v) for v in rng.choice(n_teams, 2, replace=False))
        neutral = bool(rng.random() < 0.2)
        hg = int(rng.poisson(1.4))
        ag = int(rng.poisson(1.1))
        imp = importances[int(rng.integers(0, len(importances)))]
        rows.append((date, teams[i], teams[j], hg, ag, neutral, imp))
        if m % 3 == 2:
            date += dt.timedelta(days=11)
    return from_records(rows, reference_date=date + dt.timedelta(days=30))


@pytest.fixture(scope="session")
def mixed_dataset():
    return make_mixed_dataset()


ALL_MODEL_CLASSES = list(ModelClass)


def central_differences(func, x, step=1e-6):
    """Central finite-difference gradient, the oracle for analytic gradients."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for k in range(x.size):
        bump = np.zeros_like(x)
        bump[k] = step
        grad[k] = (func(x + bump) - func(x - bump)) / (2.0 * step)
    return grad
