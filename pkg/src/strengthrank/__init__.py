"""Rank soccer teams by current strength.

Fits ten weighted maximum-likelihood rating models (probit, logistic, and
multiplicative-tie ordinal kernels, optionally margin-weighted; independent
and shared-component Poisson score models, single-strength or
defence/attack), evaluates them by rolling rank-probability-score
backtests, and turns fits into rankings and ranking time series.
"""

from .backtest import (
    BacktestConfig,
    BacktestError,
    BacktestReport,
    CellSummary,
    GridResult,
    PredictionRecord,
    UniformBaseline,
    UpdateGranularity,
    grid_search,
    rps,
    run_backtest,
)
from .data import (
    CsvFormatError,
    Dataset,
    ImportanceClass,
    MatchDataError,
    MatchRecord,
    OutcomeLabel,
    TeamId,
    from_records,
    outcome_label,
    parse_csv,
    serialize_csv,
)
from .estimation import (
    EstimationError,
    FitResult,
    ModelClass,
    ModelSpec,
    ParameterSet,
    embed,
    extract,
    fit,
    fit_result_from_json,
    fit_result_to_json,
    gradient,
    predict_match,
    warm_start_vector,
    weighted_loglik,
)
from .ordinal import OutcomeDistribution, bt_outcome, btd_outcome, tm_outcome
from .ranking import (
    RankingEntry,
    RankingError,
    RankingSeries,
    ScoreDisplay,
    rank_def_att,
    rank_round_robin,
    rank_single,
    ranking_series,
)
from .poisson import (
    PoissonParams,
    PoissonVariant,
    ScoringRates,
    bivariate_pmf,
    expected_scores,
    independent_pmf,
    scoring_rates,
    skellam_outcome,
)
from .weights import (
    MatchWeights,
    WeightConfig,
    fifa_decay_curve,
    goal_diff_weight,
    importance_weight,
    match_weights,
    time_weight,
)

__version__ = "0.1.0"
