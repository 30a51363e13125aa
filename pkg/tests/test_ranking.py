"""Ranking tests, including the exhaustive round-robin oracle."""

import datetime as dt
import itertools
import math

import numpy as np
import pytest

from strengthrank.data import TeamId
from strengthrank.estimation import ModelClass, ModelSpec, ParameterSet, fit
from strengthrank.poisson import scoring_rates, skellam_outcome
from strengthrank.ranking import (
    RankingEntry,
    RankingError,
    ScoreDisplay,
    rank_def_att,
    rank_round_robin,
    rank_single,
    ranking_rows,
    ranking_series,
    series_rows,
    side_by_side_rows,
)
from strengthrank.synthetic import simulate_league


def single_params(strengths, teams=None, home_effect=0.2, intercept=0.05,
                  model_class=ModelClass.INDEPENDENT_POISSON):
    strengths = np.asarray(strengths, dtype=float)
    teams = tuple(teams or [chr(ord("A") + i) for i in range(len(strengths))])
    kwargs = {}
    if model_class.is_poisson:
        kwargs["intercept"] = intercept
    else:
        kwargs["draw_width"] = 0.5
    if model_class.is_bivariate:
        kwargs["covariance"] = 0.1
    return ParameterSet(
        model_class=model_class,
        teams=teams,
        home_effect=home_effect,
        strengths=strengths,
        **kwargs,
    )


class TestRankSingle:
    def test_sorts_by_strength_descending(self):
        params = single_params([0.5, 0.0, -0.5],
                               model_class=ModelClass.BRADLEY_TERRY)
        entries = rank_single(params)
        assert [e.position for e in entries] == [1, 2, 3]
        assert [e.team for e in entries] == ["A", "B", "C"]
        assert not any(e.tied for e in entries)

    def test_positions_survive_increasing_transforms(self):
        params = single_params([0.3, -0.7, 0.9, -0.5],
                               model_class=ModelClass.BRADLEY_TERRY)
        raw = rank_single(params, ScoreDisplay.RAW)
        expo = rank_single(params, "exponentiated")
        assert [(e.position, e.team) for e in raw] == [
            (e.position, e.team) for e in expo
        ]
        for r, x in zip(raw, expo):
            assert x.score == pytest.approx(math.exp(r.score))

    def test_shifting_all_strengths_changes_nothing(self):
        base = single_params([0.4, 0.1, -0.5],
                             model_class=ModelClass.THURSTONE_MOSTELLER)
        shifted = single_params(np.array([0.4, 0.1, -0.5]) + 2.0,
                                model_class=ModelClass.THURSTONE_MOSTELLER)
        assert [(e.position, e.team) for e in rank_single(base)] == [
            (e.position, e.team) for e in rank_single(shifted)
        ]

    def test_a_rising_team_never_drops(self):
        before = single_params([0.2, 0.1, -0.3],
                               model_class=ModelClass.BRADLEY_TERRY)
        after = single_params([0.2, 0.25, -0.3],
                              model_class=ModelClass.BRADLEY_TERRY)
        pos_before = {e.team: e.position for e in rank_single(before)}
        pos_after = {e.team: e.position for e in rank_single(after)}
        assert pos_after["B"] <= pos_before["B"]

    def test_exact_ties_share_the_smaller_position(self):
        params = single_params([0.5, 0.5, -1.0],
                               model_class=ModelClass.BRADLEY_TERRY)
        entries = rank_single(params)
        assert [(e.position, e.team, e.tied) for e in entries] == [
            (1, "A", True), (1, "B", True), (3, "C", False),
        ]

    def test_def_att_fit_is_redirected(self):
        params = ParameterSet(
            model_class=ModelClass.INDEPENDENT_POISSON_DEF_ATT,
            teams=("A", "B"),
            home_effect=0.1,
            attack=np.array([0.2, -0.2]),
            defence=np.array([-0.1, 0.1]),
            intercept=0.0,
        )
        with pytest.raises(RankingError, match="rank_def_att"):
            rank_single(params)


class TestRankDefAtt:
    def make(self, attack, defence):
        return ParameterSet(
            model_class=ModelClass.INDEPENDENT_POISSON_DEF_ATT,
            teams=("A", "B", "C"),
            home_effect=0.1,
            attack=np.asarray(attack, dtype=float),
            defence=np.asarray(defence, dtype=float),
            intercept=0.0,
        )

    def test_opposite_orders(self):
        attack, defence = rank_def_att(self.make([1, 0, -1], [-1, 0, 1]))
        assert [e.team for e in attack] == ["A", "B", "C"]
        assert [e.team for e in defence] == ["C", "B", "A"]

    def test_rankings_are_independent(self):
        base_att, base_def = rank_def_att(self.make([1, 0, -1], [-1, 0, 1]))
        permuted_att, same_def = rank_def_att(self.make([-1, 1, 0], [-1, 0, 1]))
        assert [e.team for e in permuted_att] == ["B", "C", "A"]
        assert [(e.team, e.score) for e in same_def] == [
            (e.team, e.score) for e in base_def
        ]

    def test_symmetric_team_vectors_rank_identically(self):
        attack, defence = rank_def_att(self.make([0.5, 0, -0.5], [0.5, 0, -0.5]))
        assert [(e.position, e.team) for e in attack] == [
            (e.position, e.team) for e in defence
        ]

    def test_single_strength_fit_is_redirected(self):
        params = single_params([0.1, -0.1])
        with pytest.raises(RankingError, match="rank_single"):
            rank_def_att(params)


def enumerate_round_robin(params, neutral=False):
    """Expected points by brute force over all 3**6 outcome assignments."""
    teams = params.teams
    poisson_params = params.to_poisson_params()
    fixtures = []
    for i, home in enumerate(teams):
        for j, away in enumerate(teams):
            if i != j:
                rates = scoring_rates(poisson_params, TeamId(i, home),
                                      TeamId(j, away), neutral)
                fixtures.append((home, away,
                                 skellam_outcome(rates).as_array()))
    expected = {name: 0.0 for name in teams}
    for combo in itertools.product(range(3), repeat=len(fixtures)):
        prob = 1.0
        points = {name: 0 for name in teams}
        for (home, away, dist), outcome in zip(fixtures, combo):
            prob *= dist[outcome]
            if outcome == 0:
                points[home] += 3
            elif outcome == 1:
                points[home] += 1
                points[away] += 1
            else:
                points[away] += 3
        for name in teams:
            expected[name] += prob * points[name]
    return expected


class TestRankRoundRobin:
    def test_matches_exhaustive_enumeration(self):
        params = single_params([0.4, 0.0, -0.4], home_effect=0.2,
                               intercept=0.05)
        oracle = enumerate_round_robin(params)
        entries = rank_round_robin(params)
        assert [e.team for e in entries] == sorted(
            oracle, key=lambda t: -oracle[t]
        )
        for e in entries:
            assert e.score == pytest.approx(oracle[e.team], abs=1e-10)

    def test_identical_teams_tie(self):
        params = single_params([0.0, 0.0], home_effect=0.0)
        entries = rank_round_robin(params)
        assert entries[0].score == entries[1].score
        assert all(e.tied for e in entries)
        assert [e.position for e in entries] == [1, 1]
        assert [e.team for e in entries] == ["A", "B"]

    def test_dominant_team_is_first(self):
        params = single_params([0.9, -0.3, -0.6], home_effect=0.0)
        entries = rank_round_robin(params)
        assert entries[0].team == "A"

    def test_total_points_match_per_match_awards(self):
        params = single_params([0.3, 0.1, -0.1, -0.3], home_effect=0.15)
        entries = rank_round_robin(params)
        poisson_params = params.to_poisson_params()
        total = 0.0
        for i, home in enumerate(params.teams):
            for j, away in enumerate(params.teams):
                if i == j:
                    continue
                dist = skellam_outcome(scoring_rates(
                    poisson_params, TeamId(i, home), TeamId(j, away), False
                ))
                total += 3 * (dist.p_home + dist.p_away) + 2 * dist.p_draw
        assert sum(e.score for e in entries) == pytest.approx(total, abs=1e-9)

    def test_neutral_mode_forgets_venue(self):
        params = single_params([0.2, -0.2], home_effect=0.4)
        entries = rank_round_robin(params, neutral=True)
        # On neutral ground both fixtures mirror each other exactly.
        oracle = enumerate_round_robin(params, neutral=True)
        for e in entries:
            assert e.score == pytest.approx(oracle[e.team], abs=1e-10)

    def test_ordinal_fit_rejected(self):
        params = single_params([0.1, -0.1],
                               model_class=ModelClass.BRADLEY_TERRY)
        with pytest.raises(RankingError, match="score model"):
            rank_round_robin(params)

    def test_works_for_def_att_fits(self):
        params = ParameterSet(
            model_class=ModelClass.INDEPENDENT_POISSON_DEF_ATT,
            teams=("A", "B", "C"),
            home_effect=0.1,
            attack=np.array([0.3, 0.0, -0.3]),
            defence=np.array([-0.2, 0.1, 0.1]),
            intercept=0.0,
        )
        entries = rank_round_robin(params)
        assert sorted(e.team for e in entries) == ["A", "B", "C"]
        oracle = enumerate_round_robin(params)
        for e in entries:
            assert e.score == pytest.approx(oracle[e.team], abs=1e-10)


@pytest.fixture(scope="module")
def data():
    return simulate_league(6, 2, seed=3)


class TestRankingSeries:
    def test_weekly_series_shape_and_no_leakage(self, data):
        spec = ModelSpec.for_class("independent-poisson", 200)
        start = data.matches[0].date + dt.timedelta(days=42)
        dates = [start + dt.timedelta(weeks=k) for k in range(6)]
        series = ranking_series(spec, data, dates, training_window_days=365)
        assert series.dates == tuple(dates)
        assert series.gaps == ()
        for date, ranked in zip(series.dates, series.entries):
            assert sorted(e.team for e in ranked) == sorted(data.team_names)
            # Refit on the visible history only and compare: equality means
            # the series never peeked past the ranking date.
            window = data.window(date - dt.timedelta(days=365), date)
            check = fit(spec.with_reference_date(date), window)
            again = rank_single(check)
            assert [e.team for e in again] == [e.team for e in ranked]

    def test_single_date_degenerates_to_rank_single(self, data):
        spec = ModelSpec.for_class("bradley-terry", 200)
        date = data.matches[-1].date + dt.timedelta(days=1)
        series = ranking_series(spec, data, [date], training_window_days=10000)
        direct = rank_single(fit(spec.with_reference_date(date), data))
        assert list(series.entries_for(date)) == direct

    def test_unfittable_dates_become_gaps(self, data):
        spec = ModelSpec.for_class("independent-poisson", 200)
        hopeless = data.matches[0].date  # nothing to train on yet
        fine = data.matches[0].date + dt.timedelta(days=42)
        series = ranking_series(spec, data, [hopeless, fine],
                                training_window_days=365)
        assert series.dates == (fine,)
        assert len(series.gaps) == 1
        assert series.gaps[0][0] == hopeless

    def test_all_dates_failing_is_an_error(self, data):
        spec = ModelSpec.for_class("independent-poisson", 200)
        with pytest.raises(RankingError, match="no requested date"):
            ranking_series(spec, data, [data.matches[0].date],
                           training_window_days=365)

    def test_requires_ascending_dates(self, data):
        spec = ModelSpec.for_class("independent-poisson", 200)
        d0 = data.matches[0].date
        with pytest.raises(RankingError, match="ascending"):
            ranking_series(spec, data, [d0 + dt.timedelta(days=9), d0],
                           training_window_days=365)
        with pytest.raises(RankingError, match="no dates"):
            ranking_series(spec, data, [], training_window_days=365)

    def test_def_att_series_ranks_by_round_robin(self, data):
        spec = ModelSpec.for_class("independent-poisson-def-att", 200)
        date = data.matches[-1].date + dt.timedelta(days=1)
        series = ranking_series(spec, data, [date], training_window_days=10000)
        direct = rank_round_robin(fit(spec.with_reference_date(date), data))
        assert list(series.entries_for(date)) == direct

    def test_position_trace_and_jump_statistic(self):
        entries_by_date = (
            (RankingEntry(1, "A", 0.5), RankingEntry(2, "B", 0.1)),
            (RankingEntry(1, "B", 0.4), RankingEntry(2, "A", 0.2)),
            (RankingEntry(1, "B", 0.4), RankingEntry(2, "A", 0.2)),
        )
        dates = tuple(dt.date(2020, 1, d) for d in (1, 8, 15))
        from strengthrank.ranking import RankingSeries

        series = RankingSeries(dates, entries_by_date)
        assert series.position_trace("A") == [
            (dates[0], 1), (dates[1], 2), (dates[2], 2),
        ]
        assert series.max_position_jump("A") == 1
        assert series.max_position_jump("missing") == 0


class TestDelimitedOutput:
    def test_ranking_rows(self):
        entries = rank_single(single_params(
            [0.5, -0.5], model_class=ModelClass.BRADLEY_TERRY
        ))
        rows = ranking_rows(entries)
        assert rows[0] == ["position", "team", "score", "tied"]
        assert rows[1][:2] == ["1", "A"]
        assert float(rows[1][2]) == 0.5

    def test_series_rows_long_format(self):
        from strengthrank.ranking import RankingSeries

        dates = (dt.date(2020, 1, 1), dt.date(2020, 1, 8))
        per_date = (
            (RankingEntry(1, "A", 0.5), RankingEntry(2, "B", -0.5)),
            (RankingEntry(1, "B", 0.7), RankingEntry(2, "A", -0.7)),
        )
        rows = series_rows(RankingSeries(dates, per_date))
        assert rows[0] == ["date", "team", "position", "score"]
        assert len(rows) == 5
        assert rows[1] == ["2020-01-01", "A", "1", "0.5"]
        assert rows[4] == ["2020-01-08", "A", "2", "-0.7"]

    def test_side_by_side_rows(self):
        from strengthrank.ranking import RankingSeries

        dates = (dt.date(2020, 1, 1), dt.date(2020, 1, 8))
        per_date = (
            (RankingEntry(1, "A", 0.5),),
            (RankingEntry(1, "A", 0.6),),
        )
        series = RankingSeries(dates, per_date)
        rows = side_by_side_rows(series, "A", {dates[0]: 4},
                                 external_label="fifa_position")
        assert rows[0] == ["date", "team", "position", "fifa_position"]
        assert rows[1] == ["2020-01-01", "A", "1", "4"]
        assert rows[2] == ["2020-01-08", "A", "1", ""]
