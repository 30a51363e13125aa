"""Score models: Poisson rates, joint score distributions, goal-difference outcomes.

Scoring rates are log-linear in team strengths. The joint score
distribution is either a product of two Poissons or a bivariate Poisson
built as (X1 + XC, X2 + XC) with a shared component XC whose mean is the
score covariance. The goal-difference (and hence win/draw/loss)
distribution depends only on the two marginal rate parameters, so outcome
prediction goes through the same truncated-grid aggregation either way.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .data import TeamId
from .ordinal import OutcomeDistribution

__all__ = [
    "PoissonVariant",
    "PoissonParams",
    "ScoringRates",
    "scoring_rates",
    "independent_pmf",
    "bivariate_pmf",
    "skellam_outcome",
    "expected_scores",
    "independent_log_pmf",
    "bivariate_log_pmf",
]

# Rate exponents beyond this indicate a divergent fit, not soccer.
MAX_RATE_EXPONENT = 30.0


class PoissonVariant(enum.Enum):
    INDEPENDENT_SINGLE = "independent-single"
    BIVARIATE_SINGLE = "bivariate-single"
    INDEPENDENT_DEF_ATT = "independent-def-att"
    BIVARIATE_DEF_ATT = "bivariate-def-att"

    @property
    def is_bivariate(self) -> bool:
        return self in (PoissonVariant.BIVARIATE_SINGLE, PoissonVariant.BIVARIATE_DEF_ATT)

    @property
    def is_def_att(self) -> bool:
        return self in (
            PoissonVariant.INDEPENDENT_DEF_ATT,
            PoissonVariant.BIVARIATE_DEF_ATT,
        )


def _check_sum_zero(vec: np.ndarray, label: str) -> None:
    total = float(np.sum(vec))
    if abs(total) > 1e-9:
        raise ValueError(f"{label} must sum to zero, got {total}")


@dataclass(frozen=True)
class PoissonParams:
    """Team-level parameters of one fitted Poisson model.

    Single-strength variants carry ``strengths``; defence/attack variants
    carry ``attack`` and ``defence`` instead (one of each per team).
    ``covariance`` is the shared-component mean, zero for independent
    variants.
    """

    variant: PoissonVariant
    intercept: float
    home_effect: float
    strengths: np.ndarray | None = None
    attack: np.ndarray | None = None
    defence: np.ndarray | None = None
    covariance: float = 0.0

    def __post_init__(self) -> None:
        if self.covariance < 0:
            raise ValueError(f"covariance must be non-negative, got {self.covariance}")
        if not self.variant.is_bivariate and self.covariance != 0.0:
            raise ValueError("independent variants must have zero covariance")
        if self.variant.is_def_att:
            if self.attack is None or self.defence is None:
                raise ValueError(f"{self.variant.value} needs attack and defence vectors")
            if len(self.attack) != len(self.defence):
                raise ValueError("attack and defence vectors differ in length")
            _check_sum_zero(self.attack, "attack strengths")
            _check_sum_zero(self.defence, "defence strengths")
        else:
            if self.strengths is None:
                raise ValueError(f"{self.variant.value} needs a strengths vector")
            _check_sum_zero(self.strengths, "strengths")


@dataclass(frozen=True)
class ScoringRates:
    """Marginal rate parameters for one match plus the shared-component mean.

    Expected scores are ``lambda_home + lambda_c`` and
    ``lambda_away + lambda_c``; for independent models ``lambda_c`` is zero
    and the rates are the score means themselves.
    """

    lambda_home: float
    lambda_away: float
    lambda_c: float = 0.0

    def __post_init__(self) -> None:
        if self.lambda_home <= 0 or self.lambda_away <= 0:
            raise ValueError("rate parameters must be positive")
        if self.lambda_c < 0:
            raise ValueError(f"lambda_c must be non-negative, got {self.lambda_c}")


def scoring_rates(
    params: PoissonParams, home: TeamId, away: TeamId, neutral: bool = False
) -> ScoringRates:
    """Per-match rate parameters from team strengths.

    Single-strength: the home exponent is c + (r_home + h) - r_away and the
    away exponent mirrors it. Defence/attack: each side's attack meets the
    other side's defence. The home bump h is dropped on neutral ground.
    """
    if home.index == away.index:
        raise ValueError(f"{home.name!r} cannot play itself")
    bump = 0.0 if neutral else params.home_effect
    c = params.intercept
    if params.variant.is_def_att:
        exp_home = c + (params.attack[home.index] + bump) - params.defence[away.index]
        exp_away = c + params.attack[away.index] - (params.defence[home.index] + bump)
    else:
        r_home = params.strengths[home.index]
        r_away = params.strengths[away.index]
        exp_home = c + (r_home + bump) - r_away
        exp_away = c + r_away - (r_home + bump)
    worst = max(abs(exp_home), abs(exp_away))
    if worst > MAX_RATE_EXPONENT:
        raise ValueError(
            f"rate exponent {worst:.2f} exceeds {MAX_RATE_EXPONENT}; "
            "the fit has diverged"
        )
    return ScoringRates(float(np.exp(exp_home)), float(np.exp(exp_away)), params.covariance)


def independent_log_pmf(x, y, log_lambda_home, log_lambda_away):
    """Vectorised log pmf of two independent Poisson scores."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    log_l1 = np.asarray(log_lambda_home, dtype=float)
    log_l2 = np.asarray(log_lambda_away, dtype=float)
    return (
        x * log_l1
        - np.exp(log_l1)
        - gammaln(x + 1.0)
        + y * log_l2
        - np.exp(log_l2)
        - gammaln(y + 1.0)
    )


def bivariate_log_pmf(x, y, log_lambda_home, log_lambda_away, log_lambda_c):
    """Vectorised log pmf of the shared-component score model.

    Returns (log_pmf, kbar) where kbar is the posterior mean of the shared
    component given the observed scores; it is the sufficient statistic for
    the gradient with respect to all three log rates.
    """
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    log_l1, log_l2 = np.broadcast_arrays(
        np.asarray(log_lambda_home, dtype=float),
        np.asarray(log_lambda_away, dtype=float),
    )
    base = independent_log_pmf(x, y, log_l1, log_l2)
    if np.isneginf(log_lambda_c):
        return base, np.zeros_like(base)

    lam_c = np.exp(log_lambda_c)
    upper = np.minimum(x, y)
    k_top = int(upper.max()) if upper.size else 0
    k = np.arange(k_top + 1)[(slice(None),) + (None,) * x.ndim]
    mask = k <= upper
    # Clip the masked-out factorial arguments so gammaln stays finite,
    # then drop those terms from the sum.
    xk = np.where(mask, x - k, 0)
    yk = np.where(mask, y - k, 0)
    log_ratio = log_lambda_c - log_l1 - log_l2
    terms = (
        gammaln(x + 1.0)
        + gammaln(y + 1.0)
        - gammaln(k + 1.0)
        - gammaln(xk + 1.0)
        - gammaln(yk + 1.0)
        + k * log_ratio
    )
    terms = np.where(mask, terms, -np.inf)
    log_sum = logsumexp(terms, axis=0)
    post = np.exp(terms - log_sum)
    kbar = np.sum(k * post, axis=0)
    return base - lam_c + log_sum, kbar


def independent_pmf(rates: ScoringRates, x: int, y: int) -> float:
    """Probability of the exact score (x, y) under independent Poissons."""
    if x < 0 or y < 0:
        raise ValueError("scores must be non-negative")
    if rates.lambda_c != 0.0:
        raise ValueError("independent_pmf requires lambda_c = 0; use bivariate_pmf")
    return float(
        np.exp(
            independent_log_pmf(
                x, y, np.log(rates.lambda_home), np.log(rates.lambda_away)
            )
        )
    )


def bivariate_pmf(rates: ScoringRates, x: int, y: int) -> float:
    """Probability of the exact score (x, y) under the shared-component model."""
    if x < 0 or y < 0:
        raise ValueError("scores must be non-negative")
    log_c = np.log(rates.lambda_c) if rates.lambda_c > 0 else -np.inf
    log_pmf, _ = bivariate_log_pmf(
        x, y, np.log(rates.lambda_home), np.log(rates.lambda_away), log_c
    )
    return float(np.exp(log_pmf))


def _score_grid(rates: ScoringRates, max_goals: int) -> np.ndarray:
    """Joint pmf over scores 0..max_goals for the marginal rate parameters."""
    k = np.arange(max_goals + 1, dtype=float)
    log_home = k * np.log(rates.lambda_home) - rates.lambda_home - gammaln(k + 1.0)
    log_away = k * np.log(rates.lambda_away) - rates.lambda_away - gammaln(k + 1.0)
    return np.outer(np.exp(log_home), np.exp(log_away))


def skellam_outcome(rates: ScoringRates, max_goals: int = 30) -> OutcomeDistribution:
    """Win/draw/loss probabilities from the goal-difference distribution.

    The goal difference of the shared-component model is distributed as the
    difference of two independent Poissons with the marginal rates (the
    shared part cancels), so the aggregation below covers both model kinds.
    The joint grid is truncated at max_goals per side; if more than 1e-10
    of probability mass lies beyond the cap the result would be unreliable
    and an error is raised instead.
    """
    if max_goals < 25:
        raise ValueError(f"max_goals must be at least 25, got {max_goals}")
    joint = _score_grid(rates, max_goals)
    total = float(joint.sum())
    deficit = 1.0 - total
    if deficit > 1e-10:
        raise ValueError(
            f"{deficit:.3e} of probability mass lies beyond {max_goals} goals; "
            "increase max_goals"
        )
    p_draw = float(np.trace(joint))
    p_home = float(np.tril(joint, -1).sum())
    p_away = float(np.triu(joint, 1).sum())
    return OutcomeDistribution(p_home / total, p_draw / total, p_away / total)


def expected_scores(rates: ScoringRates) -> tuple[float, float]:
    """Mean home and away scores: marginal rate plus the shared component."""
    return rates.lambda_home + rates.lambda_c, rates.lambda_away + rates.lambda_c
