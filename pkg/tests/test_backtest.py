"""Backtest tests: RPS arithmetic, block scheduling, and grid search."""

import datetime as dt
import itertools
import math
import statistics

import numpy as np
import pytest

from strengthrank.backtest import (
    BacktestConfig,
    BacktestError,
    CellSummary,
    UniformBaseline,
    UpdateGranularity,
    _pick_best,
    grid_search,
    prediction_rows,
    report_to_json,
    rps,
    run_backtest,
    summary_rows,
)
from strengthrank.data import ImportanceClass, OutcomeLabel, from_records
from strengthrank.estimation import ModelSpec
from strengthrank.ordinal import OutcomeDistribution
from strengthrank.synthetic import simulate_league

UNIFORM = OutcomeDistribution(1 / 3, 1 / 3, 1 / 3)


def spec_for(label, half=200.0):
    return ModelSpec.for_class(label, half_period_days=half)


class TestRps:
    def test_perfect_forecasts_score_zero(self):
        assert rps(OutcomeDistribution(1, 0, 0), OutcomeLabel.HOME_WIN) == 0.0
        assert rps(OutcomeDistribution(0, 1, 0), OutcomeLabel.DRAW) == 0.0
        assert rps(OutcomeDistribution(0, 0, 1), OutcomeLabel.AWAY_WIN) == 0.0

    def test_uniform_forecast_values(self):
        assert rps(UNIFORM, OutcomeLabel.HOME_WIN) == 5 / 18
        assert rps(UNIFORM, OutcomeLabel.AWAY_WIN) == 5 / 18
        assert rps(UNIFORM, OutcomeLabel.DRAW) == 1 / 9

    def test_ordinal_penalty(self):
        # A confident away call on a home win is worse than a confident draw.
        far = rps(OutcomeDistribution(0, 0, 1), OutcomeLabel.HOME_WIN)
        near = rps(OutcomeDistribution(0, 1, 0), OutcomeLabel.HOME_WIN)
        assert far == 1.0
        assert near == 0.5
        assert far > near

    def test_bounded_and_zero_only_at_certainty(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            raw = rng.dirichlet(np.ones(3))
            pred = OutcomeDistribution(*raw)
            for realized in OutcomeLabel:
                value = rps(pred, realized)
                assert 0.0 <= value <= 1.0
                if value == 0.0:
                    assert pred.as_array().max() == pytest.approx(1.0)


def league_dataset(n_teams=6, n_seasons=2, seed=2, drift_sd=0.0):
    return simulate_league(n_teams, n_seasons, seed=seed, drift_sd=drift_sd)


class TestRunBacktest:
    def test_counts_and_block_schedule(self):
        data = league_dataset()
        cfg = BacktestConfig(training_window_days=365, burn_in_rounds=5)
        report = run_backtest([spec_for("independent-poisson")], data, cfg)
        # 6 teams: 10 rounds per season, 3 matches per round, 2 seasons;
        # burn-in drops the first 5 rounds of each season.
        assert len(report.blocks) == 10
        assert {b.season for b in report.blocks} == {0, 1}
        assert all(b.round_in_season >= 5 for b in report.blocks)
        cell = report.cells[0]
        assert cell.n_failures == 0
        assert cell.n_predictions == 30
        assert len(report.predictions) == 30

    def test_no_leakage(self):
        data = league_dataset()
        cfg = BacktestConfig(training_window_days=40, burn_in_rounds=5)
        report = run_backtest([spec_for("bradley-terry")], data, cfg)
        for audit in report.blocks:
            assert audit.latest_training_date is not None
            assert audit.latest_training_date < audit.date
            assert audit.training_start == audit.date - dt.timedelta(days=40)
            # A 40-day window over weekly rounds holds at most 6 rounds.
            assert audit.n_training_matches <= 18

    def test_mean_rps_is_the_mean_of_match_scores(self):
        data = league_dataset()
        cfg = BacktestConfig(training_window_days=365, burn_in_rounds=5)
        report = run_backtest([spec_for("thurstone-mosteller")], data, cfg)
        cell = report.cells[0]
        scores = [p.rps for p in report.predictions
                  if p.model_label == "thurstone-mosteller"]
        assert cell.mean_rps == statistics.fmean(scores)

    def test_uniform_baseline_mixture(self):
        data = league_dataset()
        cfg = BacktestConfig(training_window_days=365, burn_in_rounds=5)
        report = run_backtest([UniformBaseline()], data, cfg)
        cell = report.best_for("uniform-baseline")
        outcomes = [p.realized for p in report.predictions]
        n_draws = sum(1 for o in outcomes if o is OutcomeLabel.DRAW)
        n_decisive = len(outcomes) - n_draws
        expected = (n_decisive * (5 / 18) + n_draws * (1 / 9)) / len(outcomes)
        assert cell.mean_rps == pytest.approx(expected, rel=1e-12)
        assert cell.half_period_days is None
        assert cell.n_failures == 0

    def test_round_and_match_granularity_agree(self):
        data = league_dataset()
        base = dict(training_window_days=365, burn_in_rounds=5)
        by_round = run_backtest(
            [spec_for("bradley-terry")], data,
            BacktestConfig(update_granularity=UpdateGranularity.ROUND, **base),
        )
        by_match = run_backtest(
            [spec_for("bradley-terry")], data,
            BacktestConfig(update_granularity="match", **base),
        )
        assert by_round.predictions == by_match.predictions

    def test_filtered_matches_train_but_are_not_scored(self):
        base = league_dataset()
        labels = itertools.cycle([
            ImportanceClass.DOMESTIC_LEAGUE,
            ImportanceClass.FRIENDLY,
            ImportanceClass.QUALIFIER,
        ])
        rows = [
            (m.date, m.home.name, m.away.name, m.home_goals, m.away_goals,
             m.neutral, next(labels))
            for m in base.matches
        ]
        data = from_records(rows)
        cfg = BacktestConfig(
            training_window_days=365,
            burn_in_rounds=5,
            evaluation_filter=lambda m: m.importance is not ImportanceClass.FRIENDLY,
        )
        report = run_backtest([spec_for("independent-poisson")], data, cfg)
        eval_dates = {b.date for b in report.blocks}
        kept = [m for m in data.matches
                if m.date in eval_dates
                and m.importance is not ImportanceClass.FRIENDLY]
        cell = report.cells[0]
        assert cell.n_failures == 0
        assert cell.n_predictions == len(kept) > 0
        assert sum(b.n_evaluated for b in report.blocks) == len(kept)
        # Training windows still count the friendlies.
        probe = report.blocks[-1]
        in_window = [m for m in data.matches
                     if probe.training_start <= m.date < probe.date]
        assert probe.n_training_matches == len(in_window)
        assert any(m.importance is ImportanceClass.FRIENDLY for m in in_window)

    def test_unfittable_first_block_is_counted_not_imputed(self):
        data = league_dataset()
        cfg = BacktestConfig(training_window_days=365, burn_in_rounds=0)
        report = run_backtest([spec_for("independent-poisson")], data, cfg)
        cell = report.cells[0]
        # The very first date has an empty training window.
        assert cell.n_failures >= 3
        assert any("fit failed" in note for note in report.notes)
        assert cell.n_predictions + cell.n_failures == sum(
            b.n_evaluated for b in report.blocks
        )

    def test_multiple_specs_share_one_schedule(self):
        data = league_dataset()
        cfg = BacktestConfig(training_window_days=365, burn_in_rounds=5)
        specs = [spec_for("independent-poisson", half=100),
                 spec_for("independent-poisson", half=400),
                 spec_for("bradley-terry", half=400)]
        report = run_backtest(specs, data, cfg)
        assert len(report.cells) == 3
        assert {c.n_predictions for c in report.cells} == {30}
        best = report.best_for("independent-poisson")
        assert best.half_period_days in (100.0, 400.0)
        assert set(report.class_ranking) == {"independent-poisson",
                                             "bradley-terry"}

    def test_rejects_duplicates_and_empty_runs(self):
        data = league_dataset()
        cfg = BacktestConfig(training_window_days=365, burn_in_rounds=5)
        with pytest.raises(BacktestError, match="duplicate"):
            run_backtest([spec_for("bradley-terry"),
                          spec_for("bradley-terry")], data, cfg)
        with pytest.raises(BacktestError, match="no model specs"):
            run_backtest([], data, cfg)
        starved = BacktestConfig(training_window_days=365, burn_in_rounds=99)
        with pytest.raises(BacktestError, match="no matches to evaluate"):
            run_backtest([spec_for("bradley-terry")], data, starved)
        rejecting = BacktestConfig(
            training_window_days=365, burn_in_rounds=5,
            evaluation_filter=lambda m: False,
        )
        with pytest.raises(BacktestError, match="no matches to evaluate"):
            run_backtest([spec_for("bradley-terry")], data, rejecting)


class TestConfigValidation:
    def test_rejects_bad_fields(self):
        with pytest.raises(BacktestError, match="window"):
            BacktestConfig(training_window_days=0)
        with pytest.raises(BacktestError, match="burn-in"):
            BacktestConfig(training_window_days=10, burn_in_rounds=-1)
        with pytest.raises(BacktestError, match="grid"):
            BacktestConfig(training_window_days=10, half_period_grid=(0.0,))
        with pytest.raises(ValueError):
            BacktestConfig(training_window_days=10,
                           update_granularity="weekly")

    def test_short_window_warns(self):
        with pytest.warns(UserWarning, match="window"):
            BacktestConfig(training_window_days=100,
                           half_period_grid=(30.0, 400.0))


class TestBestSelection:
    def test_ties_go_to_the_smaller_half_period(self):
        cells = [
            CellSummary("m", 300.0, 0.2000004, 10, 0),
            CellSummary("m", 100.0, 0.2000001, 10, 0),
            CellSummary("m", 200.0, 0.2, 10, 0),
        ]
        assert _pick_best(cells).half_period_days == 100.0

    def test_clear_minimum_wins_regardless_of_order(self):
        cells = [
            CellSummary("m", 100.0, 0.25, 10, 0),
            CellSummary("m", 300.0, 0.21, 10, 0),
            CellSummary("m", 200.0, 0.24, 10, 0),
        ]
        assert _pick_best(cells).half_period_days == 300.0

    def test_unscored_cells_are_ignored_when_possible(self):
        cells = [
            CellSummary("m", 100.0, math.nan, 0, 12),
            CellSummary("m", 300.0, 0.24, 10, 0),
        ]
        assert _pick_best(cells).half_period_days == 300.0


class TestGridSearch:
    def test_degenerate_grid_returns_its_only_point(self):
        data = league_dataset()
        cfg = BacktestConfig(training_window_days=400, burn_in_rounds=5,
                             half_period_grid=(390.0,))
        result = grid_search("independent-poisson", data, cfg)
        assert result.best_half_period_days == 390.0
        assert len(result.curve) == 1
        assert result.curve[0].n_predictions == 30

    def test_empty_grid_rejected(self):
        data = league_dataset()
        cfg = BacktestConfig(training_window_days=365, burn_in_rounds=5)
        with pytest.raises(BacktestError, match="grid is empty"):
            grid_search("independent-poisson", data, cfg)

    def test_curve_is_sorted_and_complete(self):
        data = league_dataset()
        cfg = BacktestConfig(training_window_days=400, burn_in_rounds=5,
                             half_period_grid=(400.0, 100.0, 250.0))
        result = grid_search("bradley-terry", data, cfg)
        periods = [c.half_period_days for c in result.curve]
        assert periods == [100.0, 250.0, 400.0]
        assert result.best_half_period_days in periods
        assert result.report is not None

    def test_drifting_strengths_prefer_an_interior_half_period(self):
        # With a strength random walk, last season's form beats both the
        # full history (stale) and the last fortnight (noisy), so the
        # optimum sits strictly inside a wide grid.
        data = simulate_league(6, 5, drift_sd=0.05, seed=7)
        cfg = BacktestConfig(training_window_days=100000, burn_in_rounds=3,
                             half_period_grid=(30.0, 365.0, 36500.0))
        result = grid_search("bradley-terry", data, cfg)
        assert result.best_half_period_days == 365.0
        by_period = {c.half_period_days: c.mean_rps for c in result.curve}
        assert by_period[365.0] < by_period[30.0]
        assert by_period[365.0] < by_period[36500.0]


@pytest.fixture(scope="module")
def report():
    data = league_dataset()
    cfg = BacktestConfig(training_window_days=365, burn_in_rounds=5)
    specs = [spec_for("independent-poisson"), UniformBaseline()]
    return run_backtest(specs, data, cfg)


class TestReportOutput:
    def test_summary_rows_shape(self, report):
        rows = summary_rows(report)
        assert rows[0] == ["model_class", "optimal_half_period_days",
                           "mean_rps", "n_predictions", "n_failures"]
        assert len(rows) == 3
        assert {r[0] for r in rows[1:]} == {"independent-poisson",
                                            "uniform-baseline"}

    def test_prediction_rows_shape(self, report):
        rows = prediction_rows(report)
        assert len(rows) == len(report.predictions) + 1
        probe = rows[1]
        dt.date.fromisoformat(probe[0])
        assert probe[8] in {"H", "D", "A"}
        assert 0.0 <= float(probe[9]) <= 1.0

    def test_json_is_deterministic(self, report):
        text = report_to_json(report)
        assert text == report_to_json(report)
        assert text.endswith("\n")
        import json

        payload = json.loads(text)
        assert payload["class_ranking"][0] == report.class_ranking[0]
        assert payload["n_predictions"] == len(report.predictions)
