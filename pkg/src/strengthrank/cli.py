"""Command-line front end for the strengthrank library.

Subcommands: ingest, fit, predict, backtest, grid, rank, series,
plotdata. Report-style subcommands write delimited output plus a PNG
figure next to it (suppress with --no-figure).

Exit codes: 0 success, 1 input parse errors, 2 configuration errors
(including unknown model names), 3 fit did not converge (the result
file is still written). With --json-errors, diagnostics go to stderr
as JSON lines instead of plain text.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .backtest import (
    BacktestConfig,
    BacktestError,
    curve_rows,
    grid_search,
    prediction_rows,
    report_to_json,
    run_backtest,
    summary_rows,
)
from .data import (
    CsvFormatError,
    Dataset,
    ImportanceClass,
    MatchDataError,
    MatchRecord,
    parse_csv,
    serialize_csv,
)
from .estimation import (
    EstimationError,
    ModelClass,
    ModelSpec,
    fit,
    fit_result_from_json,
    fit_result_to_json,
    predict_match,
)
from .ranking import (
    RankingError,
    ranking_rows,
    ranking_series,
    rank_def_att,
    rank_round_robin,
    rank_single,
    series_rows,
    side_by_side_rows,
)
from .weights import decay_curve_rows

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3

_ERROR_KINDS = {
    EXIT_PARSE: "parse",
    EXIT_CONFIG: "config",
    EXIT_NO_CONVERGENCE: "no-convergence",
}

_MODEL_EPILOG = "model classes: " + ", ".join(m.value for m in ModelClass)


class CliError(Exception):
    """A user-facing failure with a specific exit code."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


@dataclass(frozen=True)
class Preset:
    """A canned experimental design: window, burn-in, grid, filter."""

    training_window_days: int
    burn_in_rounds: int
    grid: tuple[float, ...]
    exclude_friendlies: bool


PRESETS = {
    # Domestic league: two-year window, five burn-in rounds per season,
    # half-periods from one month to roughly two years in 30-day steps.
    "premier-league": Preset(730, 5, tuple(float(d) for d in range(30, 731, 30)), False),
    # National teams: eight-year window, no round structure to burn in,
    # half-periods from half a year to six years in half-year steps, and
    # friendlies feed training but are not scored.
    "national-teams": Preset(2920, 0, tuple(float(d) for d in range(182, 2191, 182)), True),
}


def _not_friendly(match: MatchRecord) -> bool:
    return match.importance is not ImportanceClass.FRIENDLY


# ---------------------------------------------------------------------------
# small parsers and writers


def _parse_date(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise CliError(EXIT_CONFIG, f"invalid date {text!r} (expected YYYY-MM-DD)") from None


def _parse_every(text: str) -> int:
    """Step size for series dates: '7', '7d', or '2w'."""
    raw = text.strip().lower()
    factor = 1
    if raw.endswith("d"):
        raw = raw[:-1]
    elif raw.endswith("w"):
        raw, factor = raw[:-1], 7
    try:
        days = int(raw) * factor
    except ValueError:
        raise CliError(EXIT_CONFIG, f"invalid interval {text!r} (use e.g. 7, 7d, 2w)") from None
    if days <= 0:
        raise CliError(EXIT_CONFIG, "interval must be positive")
    return days


def _parse_grid(text: str) -> tuple[float, ...]:
    """A half-period grid: 'a,b,c' or an inclusive 'start:stop:step' range."""
    raw = text.strip()
    try:
        if ":" in raw:
            parts = [float(p) for p in raw.split(":")]
            if len(parts) != 3:
                raise ValueError
            start, stop, step = parts
            if step <= 0 or start <= 0 or stop < start:
                raise ValueError
            values = []
            current = start
            while current <= stop + 1e-9:
                values.append(current)
                current += step
            return tuple(values)
        values = tuple(float(p) for p in raw.split(","))
    except ValueError:
        raise CliError(
            EXIT_CONFIG,
            f"invalid grid {text!r} (use '30,60,90' or '30:730:30')",
        ) from None
    if not values or any(v <= 0 for v in values):
        raise CliError(EXIT_CONFIG, "grid half-periods must be positive")
    return values


def _parse_models(text: str) -> list[ModelClass]:
    labels = [part.strip() for part in text.split(",") if part.strip()]
    if not labels:
        raise CliError(EXIT_CONFIG, "no model classes given")
    return [ModelClass.from_label(label) for label in labels]


def _csv_text(rows: Sequence[Sequence[str]]) -> str:
    buffer = io.StringIO()
    csv.writer(buffer, lineterminator="\n").writerows(rows)
    return buffer.getvalue()


def _write_text(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")


def _note(message: str) -> None:
    sys.stderr.write(message + "\n")


def _load_dataset(args: argparse.Namespace) -> Dataset:
    return parse_csv(Path(args.input))


# ---------------------------------------------------------------------------
# subcommand handlers


def cmd_ingest(args: argparse.Namespace) -> int:
    column_map = {}
    for item in args.column or []:
        key, sep, value = item.partition("=")
        if not sep or not key or not value:
            raise CliError(EXIT_CONFIG, f"invalid column mapping {item!r} (use schema=actual)")
        column_map[key.strip()] = value.strip()
    dataset = parse_csv(
        Path(args.input),
        column_map=column_map or None,
        strict=not args.lenient,
        default_importance=ImportanceClass.from_label(args.default_importance),
    )
    for issue in dataset.skipped:
        _note(f"skipped line {issue.line}: {issue.reason}")
    if dataset.skipped:
        _note(f"skipped {len(dataset.skipped)} of {len(dataset) + len(dataset.skipped)} rows")
    _write_text(serialize_csv(dataset), args.output)
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    model_class = ModelClass.from_label(args.model)
    dataset = _load_dataset(args)
    as_of = args.as_of or dataset.effective_reference_date
    day = dt.timedelta(days=1)
    start = as_of - dt.timedelta(days=args.window_days) if args.window_days else None
    window = dataset.window(start, as_of + day)
    spec = ModelSpec.for_class(
        model_class,
        half_period_days=args.half_period,
        reference_date=as_of,
        use_importance=not args.no_importance,
    )
    result = fit(spec, window, max_iterations=args.max_iterations)
    _write_text(fit_result_to_json(result), args.output)
    _note(f"wrote {args.output}")
    if not result.converged:
        for line in result.diagnostics:
            _note(line)
        raise CliError(EXIT_NO_CONVERGENCE, "fit did not converge; result written with flag")
    return EXIT_OK


def cmd_predict(args: argparse.Namespace) -> int:
    result = fit_result_from_json(Path(args.fit))
    dist = predict_match(
        result.params, args.home, args.away,
        neutral=args.neutral, max_goals=args.max_goals,
    )
    payload = {
        "model_class": result.spec.model_class.value,
        "home": args.home,
        "away": args.away,
        "neutral": args.neutral,
        "p_home": dist.p_home,
        "p_draw": dist.p_draw,
        "p_away": dist.p_away,
    }
    _write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.output)
    return EXIT_OK


def _backtest_config(args: argparse.Namespace, grid: tuple[float, ...]) -> BacktestConfig:
    exclude = args.exclude_friendlies
    preset = PRESETS.get(args.preset) if getattr(args, "preset", None) else None
    if preset is not None:
        exclude = exclude or preset.exclude_friendlies
    window = args.window if args.window is not None else (
        preset.training_window_days if preset else 730
    )
    burn_in = args.burn_in if args.burn_in is not None else (
        preset.burn_in_rounds if preset else 0
    )
    return BacktestConfig(
        training_window_days=window,
        burn_in_rounds=burn_in,
        half_period_grid=grid,
        evaluation_filter=_not_friendly if exclude else None,
        update_granularity=args.granularity,
        season_gap_days=args.season_gap,
    )


def _report_files(report, out_dir: Path, make_figures: bool, with_curve: bool) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_text(_csv_text(summary_rows(report)), out_dir / "summary.csv")
    if with_curve:
        _write_text(_csv_text(curve_rows(report)), out_dir / "curve.csv")
    _write_text(_csv_text(prediction_rows(report)), out_dir / "predictions.csv")
    _write_text(report_to_json(report), out_dir / "report.json")
    if make_figures:
        from . import plots

        plots.save_summary_figure(report, out_dir / "summary.png")
        if with_curve:
            plots.save_rps_curve_figure(report, out_dir / "rps_curve.png")
    for name in ("summary.csv", "predictions.csv", "report.json"):
        _note(f"wrote {out_dir / name}")


def cmd_backtest(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args)
    preset = PRESETS.get(args.preset) if args.preset else None
    if args.preset and preset is None:
        valid = ", ".join(sorted(PRESETS))
        raise CliError(EXIT_CONFIG, f"unknown preset {args.preset!r}; valid presets: {valid}")
    models = _parse_models(args.models) if args.models else list(ModelClass)
    if preset is not None:
        grid = preset.grid
    elif args.half_period is not None:
        grid = (args.half_period,)
    else:
        raise CliError(EXIT_CONFIG, "either --preset or --half-period is required")
    cfg = _backtest_config(args, grid)
    specs = [
        ModelSpec.for_class(model, hp, use_importance=not args.no_importance)
        for model in models
        for hp in grid
    ]
    report = run_backtest(specs, dataset, cfg)
    if args.verbose:
        for note in report.notes:
            _note(note)
    _report_files(report, Path(args.output_dir), not args.no_figure, len(grid) > 1)
    return EXIT_OK


def cmd_grid(args: argparse.Namespace) -> int:
    model_class = ModelClass.from_label(args.model)
    dataset = _load_dataset(args)
    preset = PRESETS.get(args.preset) if args.preset else None
    if args.preset and preset is None:
        valid = ", ".join(sorted(PRESETS))
        raise CliError(EXIT_CONFIG, f"unknown preset {args.preset!r}; valid presets: {valid}")
    if args.grid is not None:
        grid = _parse_grid(args.grid)
    elif preset is not None:
        grid = preset.grid
    else:
        raise CliError(EXIT_CONFIG, "either --preset or --grid is required")
    cfg = _backtest_config(args, grid)
    result = grid_search(
        model_class, dataset, cfg, use_importance=not args.no_importance
    )
    if args.verbose:
        for note in result.report.notes:
            _note(note)
    _report_files(result.report, Path(args.output_dir), not args.no_figure, True)
    best = result.report.best_for(model_class.value)
    sys.stdout.write(
        f"best half-period for {model_class.value}: "
        f"{result.best_half_period_days:g} days (mean RPS {best.mean_rps:.6f})\n"
    )
    return EXIT_OK


def cmd_rank(args: argparse.Namespace) -> int:
    result = fit_result_from_json(Path(args.fit))
    params = result.params
    if args.round_robin:
        entries = rank_round_robin(result, neutral=args.neutral, max_goals=args.max_goals)
        _write_text(_csv_text(ranking_rows(entries)), args.output)
        return EXIT_OK
    if params.attack is not None:
        attack, defence = rank_def_att(result)
        if args.output is None:
            sys.stdout.write("# attack\n")
            sys.stdout.write(_csv_text(ranking_rows(attack)))
            sys.stdout.write("\n# defence\n")
            sys.stdout.write(_csv_text(ranking_rows(defence)))
        else:
            base = Path(args.output)
            attack_path = base.with_name(f"{base.stem}_attack{base.suffix}")
            defence_path = base.with_name(f"{base.stem}_defence{base.suffix}")
            _write_text(_csv_text(ranking_rows(attack)), attack_path)
            _write_text(_csv_text(ranking_rows(defence)), defence_path)
            _note(f"wrote {attack_path}")
            _note(f"wrote {defence_path}")
        return EXIT_OK
    entries = rank_single(result, display=args.display)
    _write_text(_csv_text(ranking_rows(entries)), args.output)
    return EXIT_OK


def _series_dates(args: argparse.Namespace, dataset) -> list[dt.date]:
    step = dt.timedelta(days=_parse_every(args.every))
    if args.start is not None:
        start = args.start
    else:
        # Figure-3 convention: the first ranking lands six weeks after
        # the earliest match, leaving some history to fit on.
        start = dataset.matches[0].date + dt.timedelta(days=42)
    end = args.end or dataset.effective_reference_date
    if end < start:
        raise CliError(EXIT_CONFIG, "series end date precedes start date")
    dates = []
    current = start
    while current <= end:
        dates.append(current)
        current += step
    return dates


def _read_positions(path: Path) -> dict[dt.date, int]:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        fields = [f.strip() for f in reader.fieldnames or []]
        if "date" not in fields or "position" not in fields:
            raise CliError(
                EXIT_PARSE, f"{path}: comparison CSV needs 'date' and 'position' columns"
            )
        positions = {}
        for line_no, row in enumerate(reader, start=2):
            try:
                positions[dt.date.fromisoformat(row["date"].strip())] = int(row["position"])
            except (ValueError, KeyError, TypeError):
                raise CliError(EXIT_PARSE, f"{path}: bad row at line {line_no}") from None
    return positions


def cmd_series(args: argparse.Namespace) -> int:
    model_class = ModelClass.from_label(args.model)
    dataset = _load_dataset(args)
    if len(dataset) == 0:
        raise CliError(EXIT_CONFIG, "no matches in input")
    if args.compare is not None and not args.compare_team:
        raise CliError(EXIT_CONFIG, "--compare requires --compare-team")
    dates = _series_dates(args, dataset)
    spec = ModelSpec.for_class(
        model_class,
        half_period_days=args.half_period,
        use_importance=not args.no_importance,
    )
    series = ranking_series(spec, dataset, dates, args.window)
    for date, reason in series.gaps:
        _note(f"no ranking for {date.isoformat()}: {reason}")
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_text(_csv_text(series_rows(series)), out_dir / "series.csv")
    _note(f"wrote {out_dir / 'series.csv'}")
    if args.compare is not None:
        external = _read_positions(Path(args.compare))
        rows = side_by_side_rows(series, args.compare_team, external)
        _write_text(_csv_text(rows), out_dir / "comparison.csv")
        _note(f"wrote {out_dir / 'comparison.csv'}")
    if not args.no_figure:
        from . import plots

        teams = None
        if args.teams:
            teams = [part.strip() for part in args.teams.split(",") if part.strip()]
        plots.save_series_figure(series, out_dir / "series.png", teams=teams)
    return EXIT_OK


def cmd_plotdata(args: argparse.Namespace) -> int:
    # Only decay data for now; the positional keeps room for more kinds.
    rows = decay_curve_rows(args.half_period, max_days=args.max_days, step=args.step)
    header = ["days_back", "half_period_weight", "fifa_step_weight"]
    table = [header] + [[str(d), repr(w), repr(f)] for d, w, f in rows]
    output = Path(args.output) if args.output else None
    _write_text(_csv_text(table), output)
    if output is not None and not args.no_figure:
        from . import plots

        plots.save_decay_figure(rows, args.half_period, output.with_suffix(".png"))
        _note(f"wrote {output.with_suffix('.png')}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser assembly


def _add_common(sub: argparse.ArgumentParser, suppress: bool = True) -> None:
    # Subparsers copy their whole namespace over the root parser's, so
    # their copies of these flags must not carry a default that would
    # erase a value set before the subcommand.
    default = argparse.SUPPRESS if suppress else False
    sub.add_argument(
        "--json-errors",
        action="store_true",
        default=default,
        help="emit errors to stderr as JSON lines",
    )
    sub.add_argument(
        "--verbose",
        action="store_true",
        default=default,
        help="report per-block notes on stderr",
    )


def _add_backtest_shape(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--preset", help="experimental design: premier-league or national-teams")
    sub.add_argument("--window", type=int, help="training window in days")
    sub.add_argument("--burn-in", type=int, help="rounds skipped at each season start")
    sub.add_argument(
        "--season-gap", type=int, default=60,
        help="calendar gap in days that separates seasons (default 60)",
    )
    sub.add_argument(
        "--granularity", choices=["round", "match"], default="round",
        help="refit cadence (identical results; blocks are calendar dates)",
    )
    sub.add_argument(
        "--exclude-friendlies", action="store_true",
        help="keep friendlies in training but do not score them",
    )
    sub.add_argument("--no-importance", action="store_true", help="drop importance weights")
    sub.add_argument("--no-figure", action="store_true", help="skip the PNG figures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strengthrank",
        description="Rank soccer teams by current strength from match results.",
        epilog=_MODEL_EPILOG,
    )
    # Also on the root parser so the flags work on either side of the
    # subcommand.
    _add_common(parser, suppress=False)
    commands = parser.add_subparsers(dest="subcommand", required=True, metavar="subcommand")

    def register(name: str, help_text: str, handler: Callable) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, help=help_text, description=help_text, epilog=_MODEL_EPILOG)
        sub.set_defaults(handler=handler)
        _add_common(sub)
        return sub

    sub = register("ingest", "normalize a results CSV into the canonical schema", cmd_ingest)
    sub.add_argument("input", help="results CSV")
    sub.add_argument("--output", type=Path, help="canonical CSV path (default stdout)")
    sub.add_argument(
        "--column", action="append", metavar="SCHEMA=ACTUAL",
        help="rename a schema column to the file's header (repeatable)",
    )
    sub.add_argument(
        "--lenient", action="store_true", help="skip bad rows instead of aborting"
    )
    sub.add_argument(
        "--default-importance", default="league",
        choices=[m.value for m in ImportanceClass],
        help="importance for rows without one (default league)",
    )

    sub = register("fit", "fit one model class and write a fit JSON", cmd_fit)
    sub.add_argument("--input", required=True, help="results CSV")
    sub.add_argument("--model", required=True, help="model class label")
    sub.add_argument("--half-period", type=float, required=True, help="decay half-period in days")
    sub.add_argument(
        "--as-of", type=dt.date.fromisoformat, metavar="DATE",
        help="fit as of this date (default: last match date)",
    )
    sub.add_argument(
        "--window-days", type=int,
        help="only use matches within this many days before --as-of",
    )
    sub.add_argument("--no-importance", action="store_true", help="drop importance weights")
    sub.add_argument(
        "--max-iterations", type=int, default=500,
        help="optimizer iteration cap (default 500)",
    )
    sub.add_argument("--output", type=Path, default=Path("fit.json"), help="fit JSON path")

    sub = register("predict", "forecast one fixture from a saved fit", cmd_predict)
    sub.add_argument("--fit", required=True, help="fit JSON from the fit subcommand")
    sub.add_argument("--home", required=True, help="home team name")
    sub.add_argument("--away", required=True, help="away team name")
    sub.add_argument("--neutral", action="store_true", help="no home effect")
    sub.add_argument("--max-goals", type=int, default=40, help="score-grid cap for score models")
    sub.add_argument("--output", type=Path, help="JSON path (default stdout)")

    sub = register("backtest", "rolling-origin evaluation of model classes", cmd_backtest)
    sub.add_argument("--input", required=True, help="results CSV")
    sub.add_argument(
        "--models", help="comma-separated model class labels (default: all ten)"
    )
    sub.add_argument(
        "--half-period", type=float,
        help="single half-period in days (presets sweep a grid instead)",
    )
    _add_backtest_shape(sub)
    sub.add_argument(
        "--output-dir", default="backtest-out",
        help="directory for summary.csv, predictions.csv, report.json, figures",
    )

    sub = register("grid", "half-period grid search for one model class", cmd_grid)
    sub.add_argument("--input", required=True, help="results CSV")
    sub.add_argument("--model", required=True, help="model class label")
    sub.add_argument(
        "--grid", help="half-periods: '30,60,90' or inclusive '30:730:30'"
    )
    _add_backtest_shape(sub)
    sub.add_argument(
        "--output-dir", default="grid-out",
        help="directory for curve.csv, report.json, figures",
    )

    sub = register("rank", "ranking table(s) from a saved fit", cmd_rank)
    sub.add_argument("--fit", required=True, help="fit JSON from the fit subcommand")
    sub.add_argument(
        "--display", choices=["raw", "exponentiated"], default="raw",
        help="score column transform for single-strength fits",
    )
    sub.add_argument(
        "--round-robin", action="store_true",
        help="rank score models by expected points in a full round robin",
    )
    sub.add_argument("--neutral", action="store_true", help="round robin on neutral ground")
    sub.add_argument("--max-goals", type=int, default=40, help="score-grid cap")
    sub.add_argument(
        "--output", type=Path,
        help="CSV path (default stdout; attack/defence fits write _attack/_defence files)",
    )

    sub = register("series", "date-indexed ranking series with sequential refits", cmd_series)
    sub.add_argument("--input", required=True, help="results CSV")
    sub.add_argument("--model", required=True, help="model class label")
    sub.add_argument("--half-period", type=float, required=True, help="decay half-period in days")
    sub.add_argument("--window", type=int, default=730, help="training window in days")
    sub.add_argument(
        "--start", type=dt.date.fromisoformat, metavar="DATE",
        help="first ranking date (default: six weeks after the first match)",
    )
    sub.add_argument(
        "--end", type=dt.date.fromisoformat, metavar="DATE",
        help="last ranking date (default: last match date)",
    )
    sub.add_argument("--every", default="7d", help="spacing between dates (default 7d)")
    sub.add_argument("--teams", help="comma-separated team names to highlight in the figure")
    sub.add_argument(
        "--compare", type=Path,
        help="external position series CSV (date, position) to merge",
    )
    sub.add_argument("--compare-team", help="team whose trace joins the comparison")
    sub.add_argument("--no-importance", action="store_true", help="drop importance weights")
    sub.add_argument("--no-figure", action="store_true", help="skip the PNG figure")
    sub.add_argument(
        "--output-dir", default="series-out",
        help="directory for series.csv, comparison.csv, series.png",
    )

    sub = register("plotdata", "computed plot data (decay curves)", cmd_plotdata)
    sub.add_argument("kind", choices=["decay"], help="which data to compute")
    sub.add_argument("--half-period", type=float, required=True, help="decay half-period in days")
    sub.add_argument("--max-days", type=int, default=1460, help="most days back (default 1460)")
    sub.add_argument("--step", type=int, default=1, help="days between samples (default 1)")
    sub.add_argument(
        "--output", type=Path,
        help="CSV path (default stdout; a .png lands next to it unless --no-figure)",
    )
    sub.add_argument("--no-figure", action="store_true", help="skip the PNG figure")

    return parser


def _fail(args: argparse.Namespace, code: int, message: str) -> int:
    if getattr(args, "json_errors", False):
        payload = {"error": _ERROR_KINDS[code], "exit_code": code, "message": message}
        sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        sys.stderr.write(f"strengthrank: error: {message}\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except CliError as exc:
        return _fail(args, exc.code, exc.message)
    except CsvFormatError as exc:
        return _fail(args, EXIT_PARSE, str(exc))
    except MatchDataError as exc:
        return _fail(args, EXIT_PARSE, str(exc))
    except (EstimationError, BacktestError, RankingError) as exc:
        return _fail(args, EXIT_CONFIG, str(exc))
    except ValueError as exc:
        return _fail(args, EXIT_CONFIG, str(exc))
    except OSError as exc:
        return _fail(args, EXIT_CONFIG, str(exc))


if __name__ == "__main__":
    sys.exit(main())
