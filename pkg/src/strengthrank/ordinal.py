"""Win/draw/loss probability kernels driven by a strength gap.

Three kernels share the same shape: the home side's effective strength is
its rating plus a home-advantage bump (dropped on neutral ground), and the
gap to the away rating is pushed through a link with a draw band.

* probit link with additive draw band (paired-comparison model with ties)
* logistic link with additive draw band
* multiplicative draw model: the draw probability is proportional to the
  geometric mean of the two win terms, scaled by a tie parameter
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_ndtr, ndtr

__all__ = [
    "OutcomeDistribution",
    "tm_outcome",
    "bt_outcome",
    "btd_outcome",
    "probit_band_probs",
    "logistic_band_probs",
    "tie_softmax_probs",
    "clamp_diagnostics",
]

_SQRT2 = np.sqrt(2.0)

# Count of draw-band probabilities that came out as tiny negatives from
# floating-point cancellation and were clamped to zero.
_NEGATIVE_BAND_CLAMPS = 0


def clamp_diagnostics() -> int:
    """How many draw probabilities have been clamped to zero so far."""
    return _NEGATIVE_BAND_CLAMPS


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities of home win, draw, and away win for one match."""

    p_home: float
    p_draw: float
    p_away: float

    def __post_init__(self) -> None:
        for label, p in (
            ("p_home", self.p_home),
            ("p_draw", self.p_draw),
            ("p_away", self.p_away),
        ):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{label}={p} outside [0, 1]")
        total = self.p_home + self.p_draw + self.p_away
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"outcome probabilities sum to {total}, not 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.p_home, self.p_draw, self.p_away])


def _band_difference(cdf, upper, lower):
    """cdf(upper) - cdf(lower) for upper >= lower without tail cancellation.

    ``cdf`` must satisfy cdf(-x) = 1 - cdf(x). When both points sit in the
    right tail the difference is taken between the mirrored left-tail
    values, where the cdf is evaluated accurately.
    """
    upper = np.asarray(upper, dtype=float)
    lower = np.asarray(lower, dtype=float)
    direct = cdf(upper) - cdf(lower)
    mirrored = cdf(-lower) - cdf(-upper)
    return np.where(lower > 0.0, mirrored, direct)


def _clamp_band(p_draw):
    """Clamp cancellation-level negatives to zero; reject anything worse."""
    global _NEGATIVE_BAND_CLAMPS
    p_draw = np.asarray(p_draw, dtype=float)
    bad = p_draw < 0.0
    if np.any(bad):
        worst = float(p_draw.min())
        if worst < -1e-14:
            raise ValueError(
                f"draw probability {worst} is negative beyond rounding; "
                "the draw parameter must be non-negative"
            )
        _NEGATIVE_BAND_CLAMPS += int(np.count_nonzero(bad))
        p_draw = np.where(bad, 0.0, p_draw)
    return p_draw


def probit_band_probs(gap, draw_width, sigma=1.0):
    """Vectorised (p_home, p_draw, p_away) for the probit kernel.

    ``gap`` is home effective strength minus away strength (home bump
    already applied); ``draw_width`` is the additive draw parameter.
    """
    gap = np.asarray(gap, dtype=float)
    spread = sigma * _SQRT2
    p_home = ndtr((gap - draw_width) / spread)
    p_away = ndtr((-gap - draw_width) / spread)
    p_draw = _clamp_band(
        _band_difference(ndtr, (draw_width - gap) / spread, (-draw_width - gap) / spread)
    )
    return p_home, p_draw, p_away


def logistic_band_probs(gap, draw_width, scale=1.0):
    """Vectorised (p_home, p_draw, p_away) for the logistic kernel."""
    gap = np.asarray(gap, dtype=float)
    p_home = expit((gap - draw_width) / scale)
    p_away = expit((-gap - draw_width) / scale)
    p_draw = _clamp_band(
        _band_difference(expit, (gap + draw_width) / scale, (gap - draw_width) / scale)
    )
    return p_home, p_draw, p_away


def tie_softmax_probs(log_home, log_tie, log_away):
    """Softmax over the three log-odds terms of the multiplicative-tie model."""
    logits = np.stack(np.broadcast_arrays(log_home, log_tie, log_away), axis=0)
    peak = np.max(logits, axis=0)
    shifted = np.exp(logits - peak)
    total = shifted.sum(axis=0)
    return shifted[0] / total, shifted[1] / total, shifted[2] / total


def _validate_common(sigma_or_scale: float, name: str, draw: float, draw_name: str) -> None:
    if sigma_or_scale <= 0:
        raise ValueError(f"{name} must be positive, got {sigma_or_scale}")
    if draw < 0:
        raise ValueError(f"{draw_name} must be non-negative, got {draw}")


def tm_outcome(
    r_home: float,
    r_away: float,
    home_effect: float = 0.0,
    draw_width: float = 0.0,
    sigma: float = 1.0,
    neutral: bool = False,
) -> OutcomeDistribution:
    """Probit-link outcome probabilities with an additive draw band."""
    _validate_common(sigma, "sigma", draw_width, "draw_width")
    gap = r_home + (0.0 if neutral else home_effect) - r_away
    p_home, p_draw, p_away = probit_band_probs(gap, draw_width, sigma)
    return OutcomeDistribution(float(p_home), float(p_draw), float(p_away))


def bt_outcome(
    r_home: float,
    r_away: float,
    home_effect: float = 0.0,
    draw_width: float = 0.0,
    scale: float = 1.0,
    neutral: bool = False,
) -> OutcomeDistribution:
    """Logistic-link outcome probabilities with an additive draw band."""
    _validate_common(scale, "scale", draw_width, "draw_width")
    gap = r_home + (0.0 if neutral else home_effect) - r_away
    p_home, p_draw, p_away = logistic_band_probs(gap, draw_width, scale)
    return OutcomeDistribution(float(p_home), float(p_draw), float(p_away))


def btd_outcome(
    rstar_home: float,
    rstar_away: float,
    hstar: float = 1.0,
    dstar: float = 0.0,
    neutral: bool = False,
) -> OutcomeDistribution:
    """Multiplicative-tie outcome probabilities on the positive scale.

    Arguments are the exponentiated ratings. The draw term is
    ``dstar * sqrt(hstar * rstar_home * rstar_away)``; on neutral ground
    the home multiplier ``hstar`` is replaced by 1.
    """
    if rstar_home <= 0 or rstar_away <= 0:
        raise ValueError("exponentiated ratings must be positive")
    if hstar <= 0:
        raise ValueError(f"hstar must be positive, got {hstar}")
    if dstar < 0:
        raise ValueError(f"dstar must be non-negative, got {dstar}")
    bump = 1.0 if neutral else hstar
    term_home = bump * rstar_home
    term_draw = dstar * np.sqrt(bump * rstar_home * rstar_away)
    term_away = rstar_away
    total = term_home + term_draw + term_away
    return OutcomeDistribution(
        float(term_home / total), float(term_draw / total), float(term_away / total)
    )
