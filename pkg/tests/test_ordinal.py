"""Win/draw/loss kernels: frozen oracle values and simplex properties."""

import math

import numpy as np
import pytest

from strengthrank.ordinal import (
    OutcomeDistribution,
    bt_outcome,
    btd_outcome,
    tm_outcome,
)

# Frozen from an independent high-precision normal-CDF oracle
# (mpmath.ncdf at 30 digits): Phi(-0.5/sqrt(2)) and 1 - 2*Phi(-0.5/sqrt(2)).
PHI_HALF_BAND = 0.36183680491588153
DRAW_HALF_BAND = 0.27632639016823693


class TestProbitKernel:
    def test_symmetric_no_band(self):
        out = tm_outcome(0.3, 0.3, home_effect=0.0, draw_width=0.0)
        assert out.p_home == pytest.approx(0.5, abs=1e-15)
        assert out.p_draw == pytest.approx(0.0, abs=1e-15)
        assert out.p_away == pytest.approx(0.5, abs=1e-15)

    def test_half_band_oracle(self):
        out = tm_outcome(0.0, 0.0, home_effect=0.0, draw_width=0.5, sigma=1.0)
        assert out.p_home == pytest.approx(PHI_HALF_BAND, abs=1e-14)
        assert out.p_away == pytest.approx(PHI_HALF_BAND, abs=1e-14)
        assert out.p_draw == pytest.approx(DRAW_HALF_BAND, abs=1e-14)

    def test_neutral_drops_home_effect(self):
        neutral = tm_outcome(1.0, 0.0, home_effect=0.2, draw_width=0.3, neutral=True)
        no_bump = tm_outcome(1.0, 0.0, home_effect=0.0, draw_width=0.3, neutral=False)
        assert neutral == no_bump

    def test_negative_band_rejected(self):
        with pytest.raises(ValueError):
            tm_outcome(0.0, 0.0, draw_width=-0.1)

    def test_extreme_gap_stays_valid(self):
        out = tm_outcome(30.0, -30.0, draw_width=0.5)
        assert out.p_home == pytest.approx(1.0, abs=1e-12)
        assert out.p_draw >= 0.0 and out.p_away >= 0.0


class TestLogisticKernel:
    def test_unit_gap(self):
        out = bt_outcome(1.0, 0.0, home_effect=0.0, draw_width=0.0, scale=1.0)
        assert out.p_home == pytest.approx(1.0 / (1.0 + math.exp(-1.0)), abs=1e-15)
        assert out.p_draw == pytest.approx(0.0, abs=1e-15)
        assert out.p_away == pytest.approx(1.0 / (1.0 + math.exp(1.0)), abs=1e-15)

    def test_unit_band(self):
        out = bt_outcome(0.0, 0.0, home_effect=0.0, draw_width=1.0, scale=1.0)
        side = 1.0 / (1.0 + math.e)
        assert out.p_home == pytest.approx(side, abs=1e-15)
        assert out.p_away == pytest.approx(side, abs=1e-15)
        assert out.p_draw == pytest.approx(1.0 - 2.0 * side, abs=1e-15)

    def test_home_effect_enters_gap(self):
        bumped = bt_outcome(0.0, 0.0, home_effect=0.4, draw_width=0.2)
        shifted = bt_outcome(0.4, 0.0, home_effect=0.0, draw_width=0.2)
        assert bumped == shifted


class TestTieKernel:
    def test_all_equal_terms(self):
        out = btd_outcome(1.0, 1.0, hstar=1.0, dstar=1.0)
        for p in (out.p_home, out.p_draw, out.p_away):
            assert p == pytest.approx(1.0 / 3.0, abs=1e-15)

    def test_four_to_one(self):
        out = btd_outcome(4.0, 1.0, hstar=1.0, dstar=1.0)
        assert out.p_home == pytest.approx(4.0 / 7.0, abs=1e-15)
        assert out.p_draw == pytest.approx(2.0 / 7.0, abs=1e-15)
        assert out.p_away == pytest.approx(1.0 / 7.0, abs=1e-15)

    def test_zero_tie_term_is_logistic(self):
        r = 0.7
        out = btd_outcome(math.exp(r), math.exp(0.0), hstar=1.0, dstar=0.0)
        ref = bt_outcome(r, 0.0, home_effect=0.0, draw_width=0.0)
        assert out.p_home == pytest.approx(ref.p_home, abs=1e-12)
        assert out.p_draw == 0.0

    def test_neutral_resets_home_multiplier(self):
        out = btd_outcome(2.0, 1.0, hstar=1.4, dstar=0.5, neutral=True)
        ref = btd_outcome(2.0, 1.0, hstar=1.0, dstar=0.5, neutral=False)
        assert out == ref

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            btd_outcome(0.0, 1.0)
        with pytest.raises(ValueError):
            btd_outcome(1.0, 1.0, hstar=-2.0)
        with pytest.raises(ValueError):
            btd_outcome(1.0, 1.0, dstar=-0.1)


def random_draws(rng, n):
    """Admissible random kernel inputs spanning a wide parameter range."""
    return zip(
        rng.normal(0.0, 2.0, n),     # r_home
        rng.normal(0.0, 2.0, n),     # r_away
        rng.normal(0.0, 0.5, n),     # home effect
        rng.uniform(0.0, 2.0, n),    # draw parameter
        rng.uniform(0.3, 3.0, n),    # scale
        rng.uniform(0.0, 1.0, n) < 0.5,  # neutral
    )


class TestSimplexProperties:
    def test_normalization_within_1e12(self):
        rng = np.random.default_rng(42)
        for rh, ra, h, d, s, neutral in random_draws(rng, 2000):
            for out in (
                tm_outcome(rh, ra, h, d, sigma=s, neutral=neutral),
                bt_outcome(rh, ra, h, d, scale=s, neutral=neutral),
                btd_outcome(
                    math.exp(rh / s), math.exp(ra / s),
                    hstar=math.exp(h / s), dstar=d, neutral=neutral,
                ),
            ):
                total = out.p_home + out.p_draw + out.p_away
                assert abs(total - 1.0) <= 1e-12

    def test_swap_symmetry_on_neutral_ground(self):
        rng = np.random.default_rng(3)
        for rh, ra, h, d, s, _ in random_draws(rng, 300):
            a = tm_outcome(rh, ra, h, d, sigma=s, neutral=True)
            b = tm_outcome(ra, rh, h, d, sigma=s, neutral=True)
            assert a.p_home == pytest.approx(b.p_away, abs=1e-13)
            assert a.p_draw == pytest.approx(b.p_draw, abs=1e-13)
            a = bt_outcome(rh, ra, h, d, scale=s, neutral=True)
            b = bt_outcome(ra, rh, h, d, scale=s, neutral=True)
            assert a.p_home == pytest.approx(b.p_away, abs=1e-13)

    def test_translation_invariance(self):
        rng = np.random.default_rng(5)
        for rh, ra, h, d, s, neutral in random_draws(rng, 200):
            shift = float(rng.normal(0, 3))
            a = tm_outcome(rh, ra, h, d, sigma=s, neutral=neutral)
            b = tm_outcome(rh + shift, ra + shift, h, d, sigma=s, neutral=neutral)
            assert a.p_home == pytest.approx(b.p_home, abs=1e-12)
            scale_up = float(rng.uniform(0.5, 4.0))
            c = btd_outcome(math.exp(rh), math.exp(ra), math.exp(h), d, neutral)
            e = btd_outcome(
                scale_up * math.exp(rh), scale_up * math.exp(ra), math.exp(h), d, neutral
            )
            assert c.p_home == pytest.approx(e.p_home, abs=1e-12)

    def test_monotone_in_gap(self):
        gaps = np.linspace(-3, 3, 41)
        for kernel in (
            lambda g: tm_outcome(g, 0.0, 0.0, 0.4).p_home,
            lambda g: bt_outcome(g, 0.0, 0.0, 0.4).p_home,
            lambda g: btd_outcome(math.exp(g), 1.0, 1.0, 0.4).p_home,
        ):
            values = [kernel(float(g)) for g in gaps]
            assert all(a < b for a, b in zip(values, values[1:]))

    def test_tie_kernel_matches_logistic_at_zero_band(self):
        rng = np.random.default_rng(11)
        for rh, ra, h, _, s, neutral in random_draws(rng, 500):
            davidson = btd_outcome(
                math.exp(rh / s), math.exp(ra / s),
                hstar=math.exp(h / s), dstar=0.0, neutral=neutral,
            )
            logistic = bt_outcome(rh, ra, h, 0.0, scale=s, neutral=neutral)
            assert davidson.p_home == pytest.approx(logistic.p_home, abs=1e-12)
            assert davidson.p_away == pytest.approx(logistic.p_away, abs=1e-12)


class TestOutcomeDistribution:
    def test_rejects_bad_simplex(self):
        with pytest.raises(ValueError):
            OutcomeDistribution(0.7, 0.4, 0.2)
        with pytest.raises(ValueError):
            OutcomeDistribution(-0.1, 0.6, 0.5)

    def test_as_array(self):
        arr = OutcomeDistribution(0.5, 0.3, 0.2).as_array()
        np.testing.assert_allclose(arr, [0.5, 0.3, 0.2])
