"""Weighted maximum-likelihood estimation for all ten model classes.

Every class shares one optimization recipe: strengths live in a sum-zero
space (the last team's strength is minus the sum of the others, so only
T-1 per vector are free), positive parameters (draw width, covariance)
are optimized as logs, and the weighted log-likelihood is maximized by
BFGS with analytic gradients. Per-match weights multiply log-likelihood
contributions, which is the log-space form of weighting the likelihood
factors as exponents.

Free vector layouts (T teams):

  ordinal single        [r_0 .. r_{T-2}, h, log d]
  poisson single        [r_0 .. r_{T-2}, h, c]           (+ log lambda_c if bivariate)
  poisson def/att       [o_0 .. o_{T-2}, d_0 .. d_{T-2}, h, c]  (+ log lambda_c)
"""

from __future__ import annotations

import datetime as dt
import enum
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy import optimize
from scipy.special import expit, log_expit, log_ndtr, ndtr

from .data import Dataset, MatchDataError, TeamId
from .ordinal import (
    OutcomeDistribution,
    bt_outcome,
    tie_softmax_probs,
    tm_outcome,
)
from .poisson import (
    PoissonParams,
    PoissonVariant,
    bivariate_log_pmf,
    independent_log_pmf,
    scoring_rates,
    skellam_outcome,
)
from .weights import WeightConfig, combined_weights

__all__ = [
    "ModelClass",
    "ModelSpec",
    "ParameterSet",
    "FitResult",
    "EstimationError",
    "n_free_parameters",
    "embed",
    "extract",
    "weighted_loglik",
    "gradient",
    "fit",
    "warm_start_vector",
    "predict_match",
    "fit_result_to_json",
    "fit_result_from_json",
]

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

GRADIENT_TOLERANCE = 1e-6
MAX_ITERATIONS = 500
STRENGTH_GUARD = 10.0


class EstimationError(ValueError):
    """Raised when a fit cannot be set up or evaluated."""


class ModelClass(enum.Enum):
    """The ten model classes, named as in the CLI."""

    THURSTONE_MOSTELLER = "thurstone-mosteller"
    THURSTONE_MOSTELLER_GD = "thurstone-mosteller+gd"
    BRADLEY_TERRY = "bradley-terry"
    BRADLEY_TERRY_GD = "bradley-terry+gd"
    BRADLEY_TERRY_DAVIDSON = "bradley-terry-davidson"
    BRADLEY_TERRY_DAVIDSON_GD = "bradley-terry-davidson+gd"
    INDEPENDENT_POISSON = "independent-poisson"
    BIVARIATE_POISSON = "bivariate-poisson"
    INDEPENDENT_POISSON_DEF_ATT = "independent-poisson-def-att"
    BIVARIATE_POISSON_DEF_ATT = "bivariate-poisson-def-att"

    @classmethod
    def from_label(cls, label: str) -> "ModelClass":
        try:
            return cls(label.strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise EstimationError(
                f"unknown model class {label!r}; valid classes: {valid}"
            ) from None

    @property
    def is_poisson(self) -> bool:
        return self in (
            ModelClass.INDEPENDENT_POISSON,
            ModelClass.BIVARIATE_POISSON,
            ModelClass.INDEPENDENT_POISSON_DEF_ATT,
            ModelClass.BIVARIATE_POISSON_DEF_ATT,
        )

    @property
    def is_ordinal(self) -> bool:
        return not self.is_poisson

    @property
    def is_bivariate(self) -> bool:
        return self in (
            ModelClass.BIVARIATE_POISSON,
            ModelClass.BIVARIATE_POISSON_DEF_ATT,
        )

    @property
    def is_def_att(self) -> bool:
        return self in (
            ModelClass.INDEPENDENT_POISSON_DEF_ATT,
            ModelClass.BIVARIATE_POISSON_DEF_ATT,
        )

    @property
    def uses_goal_diff(self) -> bool:
        return self in (
            ModelClass.THURSTONE_MOSTELLER_GD,
            ModelClass.BRADLEY_TERRY_GD,
            ModelClass.BRADLEY_TERRY_DAVIDSON_GD,
        )

    @property
    def ordinal_family(self) -> str | None:
        """'probit', 'logistic', or 'tie' for ordinal classes; None for Poisson."""
        if self in (ModelClass.THURSTONE_MOSTELLER, ModelClass.THURSTONE_MOSTELLER_GD):
            return "probit"
        if self in (ModelClass.BRADLEY_TERRY, ModelClass.BRADLEY_TERRY_GD):
            return "logistic"
        if self in (
            ModelClass.BRADLEY_TERRY_DAVIDSON,
            ModelClass.BRADLEY_TERRY_DAVIDSON_GD,
        ):
            return "tie"
        return None

    @property
    def poisson_variant(self) -> PoissonVariant | None:
        return {
            ModelClass.INDEPENDENT_POISSON: PoissonVariant.INDEPENDENT_SINGLE,
            ModelClass.BIVARIATE_POISSON: PoissonVariant.BIVARIATE_SINGLE,
            ModelClass.INDEPENDENT_POISSON_DEF_ATT: PoissonVariant.INDEPENDENT_DEF_ATT,
            ModelClass.BIVARIATE_POISSON_DEF_ATT: PoissonVariant.BIVARIATE_DEF_ATT,
        }.get(self)


@dataclass(frozen=True)
class ModelSpec:
    """A model class plus the weighting scheme and scale convention.

    ``scale`` is the fixed (never estimated) latent-spread constant: the
    normal sigma for the probit family, the logistic scale otherwise.
    """

    model_class: ModelClass
    weights: WeightConfig
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.scale <= 0:
            raise EstimationError(f"scale must be positive, got {self.scale}")
        if self.weights.use_goal_diff != self.model_class.uses_goal_diff:
            raise EstimationError(
                "goal-difference weighting must be enabled exactly for the "
                f"+gd classes; got use_goal_diff={self.weights.use_goal_diff} "
                f"for {self.model_class.value}"
            )

    @classmethod
    def for_class(
        cls,
        model_class: ModelClass | str,
        half_period_days: float,
        reference_date: dt.date | None = None,
        use_importance: bool = True,
        scale: float = 1.0,
    ) -> "ModelSpec":
        """Build a spec with the goal-difference flag derived from the class."""
        if isinstance(model_class, str):
            model_class = ModelClass.from_label(model_class)
        config = WeightConfig(
            half_period_days=half_period_days,
            reference_date=reference_date,
            use_importance=use_importance,
            use_goal_diff=model_class.uses_goal_diff,
        )
        return cls(model_class, config, scale)

    def with_reference_date(self, reference_date: dt.date) -> "ModelSpec":
        return replace(self, weights=replace(self.weights, reference_date=reference_date))

    def with_half_period(self, half_period_days: float) -> "ModelSpec":
        return replace(
            self, weights=replace(self.weights, half_period_days=half_period_days)
        )


@dataclass(frozen=True, eq=False)
class ParameterSet:
    """Fitted parameters in natural coordinates, tied to a team order.

    ``strengths`` (or ``attack``/``defence``) follow the order of
    ``teams`` and sum to zero. ``draw_width`` is the additive draw
    parameter for the probit/logistic families and the multiplicative tie
    parameter for the tie family (both positive). ``covariance`` is the
    shared-component mean of bivariate score models.
    """

    model_class: ModelClass
    teams: tuple[str, ...]
    home_effect: float
    strengths: np.ndarray | None = None
    attack: np.ndarray | None = None
    defence: np.ndarray | None = None
    draw_width: float | None = None
    intercept: float | None = None
    covariance: float | None = None
    scale: float = 1.0

    def team_index(self, name: str) -> int:
        try:
            return self.teams.index(name)
        except ValueError:
            raise EstimationError(f"team {name!r} was not part of this fit") from None

    def to_poisson_params(self) -> PoissonParams:
        variant = self.model_class.poisson_variant
        if variant is None:
            raise EstimationError(
                f"{self.model_class.value} is not a score model"
            )
        return PoissonParams(
            variant=variant,
            intercept=self.intercept,
            home_effect=self.home_effect,
            strengths=self.strengths,
            attack=self.attack,
            defence=self.defence,
            covariance=self.covariance if self.model_class.is_bivariate else 0.0,
        )


def n_free_parameters(model_class: ModelClass, n_teams: int) -> int:
    """Length of the free vector for a class over n_teams teams."""
    if n_teams < 2:
        raise EstimationError("need at least two teams")
    strengths = 2 * (n_teams - 1) if model_class.is_def_att else n_teams - 1
    extras = 2  # h plus (log draw width | intercept)
    if model_class.is_bivariate:
        extras += 1
    return strengths + extras


def embed(
    model_class: ModelClass,
    teams: tuple[str, ...],
    free: np.ndarray,
    scale: float = 1.0,
) -> ParameterSet:
    """Free vector -> natural parameters (sum-zero completion, exp of logs)."""
    free = np.asarray(free, dtype=float)
    expected = n_free_parameters(model_class, len(teams))
    if free.shape != (expected,):
        raise EstimationError(
            f"free vector has length {free.size}, expected {expected} for "
            f"{model_class.value} with {len(teams)} teams"
        )
    t = len(teams)

    def complete(vec: np.ndarray) -> np.ndarray:
        return np.concatenate([vec, [-vec.sum()]])

    if model_class.is_def_att:
        attack = complete(free[: t - 1])
        defence = complete(free[t - 1 : 2 * t - 2])
        h, c = free[2 * t - 2], free[2 * t - 1]
        cov = float(np.exp(free[2 * t])) if model_class.is_bivariate else 0.0
        return ParameterSet(
            model_class,
            teams,
            home_effect=float(h),
            attack=attack,
            defence=defence,
            intercept=float(c),
            covariance=cov if model_class.is_bivariate else None,
            scale=scale,
        )
    strengths = complete(free[: t - 1])
    h = float(free[t - 1])
    if model_class.is_poisson:
        c = float(free[t])
        cov = float(np.exp(free[t + 1])) if model_class.is_bivariate else None
        return ParameterSet(
            model_class,
            teams,
            home_effect=h,
            strengths=strengths,
            intercept=c,
            covariance=cov,
            scale=scale,
        )
    return ParameterSet(
        model_class,
        teams,
        home_effect=h,
        strengths=strengths,
        draw_width=float(np.exp(free[t])),
        scale=scale,
    )


def extract(params: ParameterSet) -> np.ndarray:
    """Natural parameters -> free vector; inverse of embed."""
    cls = params.model_class
    if cls.is_def_att:
        parts = [params.attack[:-1], params.defence[:-1], [params.home_effect],
                 [params.intercept]]
        if cls.is_bivariate:
            if not params.covariance > 0:
                raise EstimationError("covariance must be positive to extract")
            parts.append([math.log(params.covariance)])
        return np.concatenate(parts)
    parts = [params.strengths[:-1], [params.home_effect]]
    if cls.is_poisson:
        parts.append([params.intercept])
        if cls.is_bivariate:
            if not params.covariance > 0:
                raise EstimationError("covariance must be positive to extract")
            parts.append([math.log(params.covariance)])
    else:
        if not params.draw_width > 0:
            raise EstimationError("draw width must be positive to extract")
        parts.append([math.log(params.draw_width)])
    return np.concatenate(parts)


@dataclass(frozen=True, eq=False)
class FitResult:
    """Outcome of one optimization run.

    ``objective`` is the weighted log-likelihood sum at the solution;
    ``gradient_norm`` is the max-abs gradient per unit of total match
    weight, the quantity the convergence test compares against gtol.
    """

    spec: ModelSpec
    params: ParameterSet
    objective: float
    converged: bool
    iterations: int
    gradient_norm: float
    n_matches: int
    diagnostics: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# Design matrix


@dataclass(frozen=True, eq=False)
class _Design:
    teams: tuple[str, ...]
    home: np.ndarray
    away: np.ndarray
    home_goals: np.ndarray
    away_goals: np.ndarray
    outcome: np.ndarray
    home_applied: np.ndarray  # 1.0 where the home bump applies, 0.0 on neutral ground
    weight: np.ndarray

    @property
    def n_teams(self) -> int:
        return len(self.teams)


def _connected_components(n_teams: int, home: np.ndarray, away: np.ndarray) -> int:
    parent = list(range(n_teams))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in zip(home.tolist(), away.tolist()):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
    return len({find(i) for i in range(n_teams)})


def _build_design(dataset: Dataset, config: WeightConfig) -> tuple[_Design, list[str]]:
    if len(dataset) == 0:
        raise EstimationError("no matches to fit")
    if len(dataset.teams) < 2:
        raise EstimationError("need at least two teams")
    arr = dataset.arrays
    counts = np.bincount(arr.home_index, minlength=len(dataset.teams)) + np.bincount(
        arr.away_index, minlength=len(dataset.teams)
    )
    if counts.min() == 0:
        missing = [t.name for t, c in zip(dataset.teams, counts) if c == 0]
        raise EstimationError(
            "disconnected team with no matches in window: " + ", ".join(missing)
        )
    if config.reference_date is None:
        config = replace(config, reference_date=dataset.effective_reference_date)
    weight = combined_weights(dataset, config)
    diagnostics = []
    components = _connected_components(len(dataset.teams), arr.home_index, arr.away_index)
    if components > 1:
        diagnostics.append(
            f"comparison graph has {components} components; strengths are only "
            "identified within components"
        )
    design = _Design(
        teams=dataset.team_names,
        home=arr.home_index,
        away=arr.away_index,
        home_goals=arr.home_goals,
        away_goals=arr.away_goals,
        outcome=arr.outcome_code.astype(np.int64),
        home_applied=np.where(arr.neutral, 0.0, 1.0),
        weight=weight,
    )
    return design, diagnostics


# ---------------------------------------------------------------------------
# Log-likelihood and gradient kernels

# The draw-band log-probability can underflow to -inf at absurd trial
# points. Gradient ratios floor it there to stay finite; the objective
# itself still reports such points as invalid (-inf) so the line search
# backtracks.
_TINY_LOG = -745.0


def _log_band_normal(upper: np.ndarray, lower: np.ndarray) -> np.ndarray:
    """log(ndtr(upper) - ndtr(lower)) without tail cancellation."""
    hi = np.where(lower > 0, -lower, upper)
    lo = np.where(lower > 0, -upper, lower)
    log_hi = log_ndtr(hi)
    log_lo = log_ndtr(lo)
    with np.errstate(divide="ignore"):
        return log_hi + np.log1p(-np.exp(np.minimum(log_lo - log_hi, 0.0)))


def _probit_pieces(z, d, sigma, outcome):
    spread = sigma * _SQRT2
    a = (z - d) / spread
    b = (-z - d) / spread
    upper = (d - z) / spread
    lower = (-d - z) / spread
    log_ph = log_ndtr(a)
    log_pa = log_ndtr(b)
    log_pd = _log_band_normal(upper, lower)
    log_p = np.choose(outcome, [log_ph, log_pd, log_pa])

    log_phi_a = -0.5 * a * a - _LOG_SQRT_2PI
    log_phi_b = -0.5 * b * b - _LOG_SQRT_2PI
    hazard_a = np.exp(log_phi_a - log_ph)
    hazard_b = np.exp(log_phi_b - log_pa)
    log_pd_safe = np.maximum(log_pd, _TINY_LOG)
    ratio_upper = np.exp(log_phi_a - log_pd_safe)  # phi(upper) = phi(a) by symmetry
    ratio_lower = np.exp(log_phi_b - log_pd_safe)
    d_dz = np.choose(
        outcome,
        [hazard_a / spread, (ratio_lower - ratio_upper) / spread, -hazard_b / spread],
    )
    d_dd = np.choose(
        outcome,
        [
            -hazard_a / spread,
            (ratio_upper + ratio_lower) / spread,
            -hazard_b / spread,
        ],
    )
    return log_p, d_dz, d_dd


def _logistic_pieces(z, d, scale, outcome):
    a = (z - d) / scale
    b = (-z - d) / scale
    upper = (z + d) / scale
    lower = (z - d) / scale
    log_ph = log_expit(a)
    log_pa = log_expit(b)
    with np.errstate(divide="ignore"):
        log_pd = (
            log_expit(upper)
            + log_expit(-lower)
            + np.log1p(-np.exp(np.minimum(lower - upper, 0.0)))
        )
    log_p = np.choose(outcome, [log_ph, log_pd, log_pa])

    log_pd_safe = np.maximum(log_pd, _TINY_LOG)
    dens_upper = np.exp(log_expit(upper) + log_expit(-upper) - log_pd_safe)
    dens_lower = np.exp(log_expit(lower) + log_expit(-lower) - log_pd_safe)
    d_dz = np.choose(
        outcome,
        [expit(-a) / scale, (dens_upper - dens_lower) / scale, -expit(-b) / scale],
    )
    d_dd = np.choose(
        outcome,
        [-expit(-a) / scale, (dens_upper + dens_lower) / scale, -expit(-b) / scale],
    )
    return log_p, d_dz, d_dd


def _ordinal_terms(design: _Design, family: str, scale: float, free: np.ndarray):
    t = design.n_teams
    r = np.concatenate([free[: t - 1], [-free[: t - 1].sum()]])
    h = free[t - 1]
    delta = free[t]
    bump = h * design.home_applied
    w = design.weight
    out = design.outcome

    if family == "tie":
        # Softmax over three log-odds terms; the tie logit is the average of
        # the win logits plus the log tie parameter.
        logit_home = (r[design.home] + bump) / scale
        logit_away = r[design.away] / scale
        logit_draw = delta + 0.5 * (logit_home + logit_away)
        logits = np.stack([logit_home, logit_draw, logit_away])
        peak = logits.max(axis=0)
        norm = peak + np.log(np.exp(logits - peak).sum(axis=0))
        log_p = np.choose(out, list(logits)) - norm
        p = np.exp(logits - norm)
        ind = np.zeros_like(p)
        np.put_along_axis(ind, out[None, :], 1.0, axis=0)
        resid = ind - p  # d log_p / d logit_k
        g_home = (resid[0] + 0.5 * resid[1]) / scale
        g_away = (resid[2] + 0.5 * resid[1]) / scale
        g_delta = resid[1]
        loglik = float(np.dot(w, log_p))
        grad_r = np.bincount(design.home, w * g_home, minlength=t) + np.bincount(
            design.away, w * g_away, minlength=t
        )
        grad = np.concatenate(
            [
                grad_r[: t - 1] - grad_r[t - 1],
                [np.dot(w, g_home * design.home_applied)],
                [np.dot(w, g_delta)],
            ]
        )
        return loglik, grad

    d = np.exp(delta)
    z = r[design.home] + bump - r[design.away]
    if family == "probit":
        log_p, d_dz, d_dd = _probit_pieces(z, d, scale, out)
    else:
        log_p, d_dz, d_dd = _logistic_pieces(z, d, scale, out)
    loglik = float(np.dot(w, log_p))
    grad_r = np.bincount(design.home, w * d_dz, minlength=t) - np.bincount(
        design.away, w * d_dz, minlength=t
    )
    grad = np.concatenate(
        [
            grad_r[: t - 1] - grad_r[t - 1],
            [np.dot(w, d_dz * design.home_applied)],
            [np.dot(w, d_dd) * d],
        ]
    )
    return loglik, grad


def _poisson_terms(design: _Design, model_class: ModelClass, free: np.ndarray):
    t = design.n_teams
    w = design.weight
    x = design.home_goals
    y = design.away_goals
    bump_mask = design.home_applied

    if model_class.is_def_att:
        attack = np.concatenate([free[: t - 1], [-free[: t - 1].sum()]])
        defence = np.concatenate(
            [free[t - 1 : 2 * t - 2], [-free[t - 1 : 2 * t - 2].sum()]]
        )
        h, c = free[2 * t - 2], free[2 * t - 1]
        bump = h * bump_mask
        log_l1 = c + attack[design.home] + bump - defence[design.away]
        log_l2 = c + attack[design.away] - defence[design.home] - bump
    else:
        r = np.concatenate([free[: t - 1], [-free[: t - 1].sum()]])
        h, c = free[t - 1], free[t]
        bump = h * bump_mask
        log_l1 = c + r[design.home] + bump - r[design.away]
        log_l2 = c + r[design.away] - r[design.home] - bump

    if model_class.is_bivariate:
        gamma = free[-1]
        log_p, kbar = bivariate_log_pmf(x, y, log_l1, log_l2, gamma)
        lam_c = math.exp(gamma)
        g1 = x - kbar - np.exp(log_l1)
        g2 = y - kbar - np.exp(log_l2)
        g_gamma = float(np.dot(w, kbar - lam_c))
    else:
        log_p = independent_log_pmf(x, y, log_l1, log_l2)
        g1 = x - np.exp(log_l1)
        g2 = y - np.exp(log_l2)
        g_gamma = None

    loglik = float(np.dot(w, log_p))

    if model_class.is_def_att:
        grad_attack = np.bincount(design.home, w * g1, minlength=t) + np.bincount(
            design.away, w * g2, minlength=t
        )
        grad_defence = -np.bincount(design.away, w * g1, minlength=t) - np.bincount(
            design.home, w * g2, minlength=t
        )
        pieces = [
            grad_attack[: t - 1] - grad_attack[t - 1],
            grad_defence[: t - 1] - grad_defence[t - 1],
            [np.dot(w, (g1 - g2) * bump_mask)],
            [np.dot(w, g1 + g2)],
        ]
    else:
        diff = g1 - g2
        grad_r = np.bincount(design.home, w * diff, minlength=t) - np.bincount(
            design.away, w * diff, minlength=t
        )
        pieces = [
            grad_r[: t - 1] - grad_r[t - 1],
            [np.dot(w, diff * bump_mask)],
            [np.dot(w, g1 + g2)],
        ]
    if g_gamma is not None:
        pieces.append([g_gamma])
    return loglik, np.concatenate(pieces)


def _loglik_and_gradient(
    design: _Design, model_class: ModelClass, scale: float, free: np.ndarray
) -> tuple[float, np.ndarray]:
    # Line searches probe absurd points where intermediate ratios overflow;
    # both callers inspect finiteness, so the numpy noise carries no signal.
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if model_class.is_poisson:
            return _poisson_terms(design, model_class, free)
        return _ordinal_terms(design, model_class.ordinal_family, scale, free)


# ---------------------------------------------------------------------------
# Public operations


def _resolved_config(spec: ModelSpec, data: Dataset) -> WeightConfig:
    if spec.weights.reference_date is not None:
        return spec.weights
    return replace(spec.weights, reference_date=data.effective_reference_date)


def weighted_loglik(spec: ModelSpec, data: Dataset, free: np.ndarray) -> float:
    """Weighted log-likelihood of the free parameter vector on the data."""
    design, _ = _build_design(data, _resolved_config(spec, data))
    free = _check_free(spec.model_class, design.n_teams, free)
    value, _ = _loglik_and_gradient(design, spec.model_class, spec.scale, free)
    return value


def gradient(spec: ModelSpec, data: Dataset, free: np.ndarray) -> np.ndarray:
    """Analytic gradient of weighted_loglik with respect to the free vector."""
    design, _ = _build_design(data, _resolved_config(spec, data))
    free = _check_free(spec.model_class, design.n_teams, free)
    _, grad = _loglik_and_gradient(design, spec.model_class, spec.scale, free)
    if not np.all(np.isfinite(grad)):
        raise EstimationError("gradient has non-finite components at this point")
    return grad


def _check_free(model_class: ModelClass, n_teams: int, free: np.ndarray) -> np.ndarray:
    free = np.asarray(free, dtype=float)
    expected = n_free_parameters(model_class, n_teams)
    if free.shape != (expected,):
        raise EstimationError(
            f"free vector has length {free.size}, expected {expected}"
        )
    if not np.all(np.isfinite(free)):
        raise EstimationError("free vector has non-finite entries")
    return free


def fit(
    spec: ModelSpec,
    data: Dataset,
    init: np.ndarray | None = None,
    *,
    gtol: float = GRADIENT_TOLERANCE,
    max_iterations: int = MAX_ITERATIONS,
) -> FitResult:
    """Maximize the weighted log-likelihood by BFGS with analytic gradients.

    The default start is all zeros in free coordinates, which puts the
    strictly positive parameters (draw width, covariance) at 1. Pass the
    previous optimum as ``init`` to warm-start.
    """
    config = _resolved_config(spec, data)
    design, diagnostics = _build_design(data, config)
    if init is None:
        x0 = np.zeros(n_free_parameters(spec.model_class, design.n_teams))
    else:
        x0 = _check_free(spec.model_class, design.n_teams, init)

    # Optimize the objective per unit of total weight so that gtol means
    # the same thing whatever the window size or weight scale; on the raw
    # sum the achievable gradient norm grows with the objective magnitude
    # and large windows would stall just above a fixed tolerance.
    weight_scale = max(float(np.sum(design.weight)), 1e-12)

    def negated(free: np.ndarray) -> tuple[float, np.ndarray]:
        value, grad = _loglik_and_gradient(design, spec.model_class, spec.scale, free)
        if not np.isfinite(value):
            return np.inf, np.zeros_like(free)
        return -value / weight_scale, -grad / weight_scale

    result = optimize.minimize(
        negated,
        x0,
        jac=True,
        method="BFGS",
        options={"gtol": gtol, "maxiter": max_iterations},
    )
    def scaled_norm(grad: np.ndarray) -> float:
        if not np.all(np.isfinite(grad)):
            return np.inf
        return float(np.max(np.abs(grad))) / weight_scale

    iterations = int(result.nit)
    value, grad = _loglik_and_gradient(design, spec.model_class, spec.scale, result.x)
    gradient_norm = scaled_norm(grad)
    if gradient_norm > gtol and iterations < max_iterations and np.isfinite(value):
        # Stale quasi-Newton curvature (typical after a warm start) can
        # stall the line search just short of the tolerance; one restart
        # with a fresh Hessian approximation usually finishes the job.
        retry = optimize.minimize(
            negated,
            result.x,
            jac=True,
            method="BFGS",
            options={"gtol": gtol, "maxiter": max_iterations - iterations},
        )
        iterations += int(retry.nit)
        retry_value, retry_grad = _loglik_and_gradient(
            design, spec.model_class, spec.scale, retry.x
        )
        retry_norm = scaled_norm(retry_grad)
        if retry_value >= value or retry_norm < gradient_norm:
            result, value, gradient_norm = retry, retry_value, retry_norm
    converged = bool(gradient_norm <= gtol)
    if not converged:
        diagnostics = diagnostics + [
            f"no convergence after {iterations} iterations "
            f"(gradient norm {gradient_norm:.3e})"
        ]
    params = embed(
        spec.model_class, design.teams, result.x, spec.scale
    )
    vectors = [
        v for v in (params.strengths, params.attack, params.defence) if v is not None
    ]
    worst = max(float(np.max(np.abs(v))) for v in vectors)
    if worst > STRENGTH_GUARD:
        diagnostics = diagnostics + [
            f"strength magnitude {worst:.2f} exceeds {STRENGTH_GUARD:g}; "
            "the window is likely degenerate (perfect separation)"
        ]
    if spec.model_class.is_bivariate and params.covariance < 1e-6:
        diagnostics = diagnostics + [
            "covariance at boundary; the fit is effectively independent"
        ]
    return FitResult(
        spec=spec,
        params=params,
        objective=float(value),
        converged=converged,
        iterations=iterations,
        gradient_norm=gradient_norm,
        n_matches=len(design.weight),
        diagnostics=tuple(diagnostics),
    )


def warm_start_vector(
    spec: ModelSpec, teams: tuple[str, ...], previous: ParameterSet | None
) -> np.ndarray | None:
    """Map a previous optimum onto a new team table as a starting point.

    Teams absent from the previous fit start at strength zero; strength
    vectors are re-centred to sum-zero. Returns None when there is nothing
    usable to start from (different model class, no overlap).
    """
    if previous is None or previous.model_class != spec.model_class:
        return None

    def aligned(vec: np.ndarray | None) -> np.ndarray | None:
        if vec is None:
            return None
        lookup = {name: vec[i] for i, name in enumerate(previous.teams)}
        out = np.array([lookup.get(name, 0.0) for name in teams])
        return out - out.mean()

    params = ParameterSet(
        model_class=previous.model_class,
        teams=teams,
        home_effect=previous.home_effect,
        strengths=aligned(previous.strengths),
        attack=aligned(previous.attack),
        defence=aligned(previous.defence),
        draw_width=_floored(previous.draw_width),
        intercept=previous.intercept,
        covariance=_floored(previous.covariance),
        scale=previous.scale,
    )
    return extract(params)


def _floored(value: float | None) -> float | None:
    """Keep log-coordinate parameters extractable after boundary collapse."""
    if value is None:
        return None
    return max(value, 1e-12)


def predict_match(
    params: ParameterSet,
    home: str,
    away: str,
    neutral: bool = False,
    max_goals: int = 40,
) -> OutcomeDistribution:
    """Outcome probabilities for a fixture under fitted parameters."""
    i = params.team_index(home)
    j = params.team_index(away)
    cls = params.model_class
    if cls.is_poisson:
        rates = scoring_rates(
            params.to_poisson_params(), TeamId(i, home), TeamId(j, away), neutral
        )
        return skellam_outcome(rates, max_goals=max_goals)
    if cls.ordinal_family == "probit":
        return tm_outcome(
            params.strengths[i],
            params.strengths[j],
            params.home_effect,
            params.draw_width,
            sigma=params.scale,
            neutral=neutral,
        )
    if cls.ordinal_family == "logistic":
        return bt_outcome(
            params.strengths[i],
            params.strengths[j],
            params.home_effect,
            params.draw_width,
            scale=params.scale,
            neutral=neutral,
        )
    # Work on the log scale: separated windows can leave ratings far too
    # large for exponentiation into the star-space kernel.
    s = params.scale
    log_home = (params.strengths[i] + (0.0 if neutral else params.home_effect)) / s
    log_away = params.strengths[j] / s
    log_draw = math.log(params.draw_width) if params.draw_width > 0 else -math.inf
    p_home, p_draw, p_away = tie_softmax_probs(
        log_home, log_draw + 0.5 * (log_home + log_away), log_away
    )
    return OutcomeDistribution(float(p_home), float(p_draw), float(p_away))


# ---------------------------------------------------------------------------
# FitResult serialization


def _vector_field(vec: np.ndarray | None) -> list[float] | None:
    return None if vec is None else [float(v) for v in vec]


def fit_result_to_json(result: FitResult) -> str:
    spec = result.spec
    payload = {
        "model_class": spec.model_class.value,
        "half_period_days": spec.weights.half_period_days,
        "reference_date": (
            spec.weights.reference_date.isoformat()
            if spec.weights.reference_date
            else None
        ),
        "use_importance": spec.weights.use_importance,
        "scale": spec.scale,
        "teams": list(result.params.teams),
        "strengths": _vector_field(result.params.strengths),
        "attack": _vector_field(result.params.attack),
        "defence": _vector_field(result.params.defence),
        "home_effect": result.params.home_effect,
        "draw_width": result.params.draw_width,
        "intercept": result.params.intercept,
        "covariance": result.params.covariance,
        "objective": result.objective,
        "converged": result.converged,
        "iterations": result.iterations,
        "gradient_norm": result.gradient_norm,
        "n_matches": result.n_matches,
        "diagnostics": list(result.diagnostics),
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def fit_result_from_json(text: str | Path) -> FitResult:
    if isinstance(text, Path):
        text = text.read_text(encoding="utf-8")
    payload = json.loads(text)
    model_class = ModelClass.from_label(payload["model_class"])
    reference = payload.get("reference_date")
    spec = ModelSpec.for_class(
        model_class,
        half_period_days=payload["half_period_days"],
        reference_date=dt.date.fromisoformat(reference) if reference else None,
        use_importance=payload.get("use_importance", True),
        scale=payload.get("scale", 1.0),
    )

    def vector(key: str) -> np.ndarray | None:
        value = payload.get(key)
        return None if value is None else np.asarray(value, dtype=float)

    params = ParameterSet(
        model_class=model_class,
        teams=tuple(payload["teams"]),
        home_effect=payload["home_effect"],
        strengths=vector("strengths"),
        attack=vector("attack"),
        defence=vector("defence"),
        draw_width=payload.get("draw_width"),
        intercept=payload.get("intercept"),
        covariance=payload.get("covariance"),
        scale=payload.get("scale", 1.0),
    )
    return FitResult(
        spec=spec,
        params=params,
        objective=payload["objective"],
        converged=payload["converged"],
        iterations=payload["iterations"],
        gradient_norm=payload["gradient_norm"],
        n_matches=payload.get("n_matches", 0),
        diagnostics=tuple(payload.get("diagnostics", ())),
    )
