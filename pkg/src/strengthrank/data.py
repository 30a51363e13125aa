"""Match results: records, datasets, and CSV input/output.

The CSV schema is one finished match per row with header columns
``date,home,away,home_goals,away_goals`` plus optional ``neutral`` (0/1)
and ``importance``. Dates are ISO-8601 (``YYYY-MM-DD``). Importance labels
are case-insensitive: friendly, qualifier, confederation, worldcup, league.
Missing optional columns default to a non-neutral league match.
"""

from __future__ import annotations

import csv
import datetime as dt
import enum
import io
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "MatchDataError",
    "CsvFormatError",
    "ImportanceClass",
    "OutcomeLabel",
    "TeamId",
    "MatchRecord",
    "ParseIssue",
    "Dataset",
    "parse_csv",
    "serialize_csv",
    "outcome_label",
]

REQUIRED_COLUMNS = ("date", "home", "away", "home_goals", "away_goals")
OPTIONAL_COLUMNS = ("neutral", "importance")


class MatchDataError(ValueError):
    """Raised for invalid match records or malformed datasets."""


class CsvFormatError(MatchDataError):
    """Raised for malformed CSV input; carries the offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.reason = message


class ImportanceClass(enum.Enum):
    """Competition category of a match, used for importance weighting."""

    FRIENDLY = "friendly"
    QUALIFIER = "qualifier"
    CONFEDERATION_TOURNAMENT = "confederation"
    WORLD_CUP = "worldcup"
    DOMESTIC_LEAGUE = "league"

    @classmethod
    def from_label(cls, label: str) -> "ImportanceClass":
        try:
            return cls(label.strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise MatchDataError(
                f"unknown importance label {label!r} (expected one of: {valid})"
            ) from None


class OutcomeLabel(enum.Enum):
    HOME_WIN = "H"
    DRAW = "D"
    AWAY_WIN = "A"


@dataclass(frozen=True)
class TeamId:
    """A team's position in the dataset's team table plus its display name."""

    index: int
    name: str


@dataclass(frozen=True)
class MatchRecord:
    """One finished match."""

    date: dt.date
    home: TeamId
    away: TeamId
    home_goals: int
    away_goals: int
    neutral: bool = False
    importance: ImportanceClass = ImportanceClass.DOMESTIC_LEAGUE

    def __post_init__(self) -> None:
        if self.home_goals < 0 or self.away_goals < 0:
            raise MatchDataError(
                f"negative goal count in {self.home.name} vs {self.away.name}"
            )
        if self.home.index == self.away.index:
            raise MatchDataError(f"team {self.home.name!r} cannot play itself")

    @property
    def goal_diff(self) -> int:
        return self.home_goals - self.away_goals


def outcome_label(match: MatchRecord) -> OutcomeLabel:
    """Classify a finished match as home win, draw, or away win."""
    if match.home_goals > match.away_goals:
        return OutcomeLabel.HOME_WIN
    if match.home_goals < match.away_goals:
        return OutcomeLabel.AWAY_WIN
    return OutcomeLabel.DRAW


@dataclass(frozen=True)
class ParseIssue:
    """A skipped CSV row (lenient mode) with the reason it was rejected."""

    line: int
    reason: str


@dataclass(frozen=True)
class _Arrays:
    """Column-oriented view of a dataset, built once and cached."""

    date_ordinal: np.ndarray
    home_index: np.ndarray
    away_index: np.ndarray
    home_goals: np.ndarray
    away_goals: np.ndarray
    neutral: np.ndarray
    importance_code: np.ndarray
    outcome_code: np.ndarray  # 0 home win, 1 draw, 2 away win


_IMPORTANCE_ORDER = tuple(ImportanceClass)
_IMPORTANCE_CODE = {imp: i for i, imp in enumerate(_IMPORTANCE_ORDER)}


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of matches over a closed team table.

    Matches are sorted by date (stable within a date), and every
    ``TeamId.index`` points at the corresponding entry of ``teams``.
    ``reference_date`` is the "as of" date for recency weighting; when
    None it defaults to the date of the latest match.
    """

    matches: tuple[MatchRecord, ...]
    teams: tuple[TeamId, ...]
    reference_date: dt.date | None = None
    skipped: tuple[ParseIssue, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        for i, team in enumerate(self.teams):
            if team.index != i:
                raise MatchDataError(
                    f"team table corrupt: {team.name!r} at slot {i} has index {team.index}"
                )
        names = [t.name for t in self.teams]
        if len(set(names)) != len(names):
            raise MatchDataError("duplicate team names in team table")
        n = len(self.teams)
        last = None
        for m in self.matches:
            for side in (m.home, m.away):
                if not 0 <= side.index < n or self.teams[side.index] != side:
                    raise MatchDataError(f"match references unknown team {side.name!r}")
            if last is not None and m.date < last:
                raise MatchDataError("matches are not sorted by date")
            last = m.date

    def __len__(self) -> int:
        return len(self.matches)

    def __iter__(self):
        return iter(self.matches)

    @property
    def effective_reference_date(self) -> dt.date:
        if self.reference_date is not None:
            return self.reference_date
        if not self.matches:
            raise MatchDataError("empty dataset has no reference date")
        return self.matches[-1].date

    @property
    def team_names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.teams)

    def team(self, name: str) -> TeamId:
        for t in self.teams:
            if t.name == name:
                return t
        raise MatchDataError(f"unknown team {name!r}")

    @cached_property
    def arrays(self) -> _Arrays:
        """Column arrays for vectorised work; computed once per dataset."""
        m = self.matches
        hg = np.array([r.home_goals for r in m], dtype=np.int64)
        ag = np.array([r.away_goals for r in m], dtype=np.int64)
        return _Arrays(
            date_ordinal=np.array([r.date.toordinal() for r in m], dtype=np.int64),
            home_index=np.array([r.home.index for r in m], dtype=np.int64),
            away_index=np.array([r.away.index for r in m], dtype=np.int64),
            home_goals=hg,
            away_goals=ag,
            neutral=np.array([r.neutral for r in m], dtype=bool),
            importance_code=np.array(
                [_IMPORTANCE_CODE[r.importance] for r in m], dtype=np.int64
            ),
            outcome_code=np.where(hg > ag, 0, np.where(hg == ag, 1, 2)).astype(np.int8),
        )

    def window(self, start: dt.date | None, end: dt.date | None) -> "Dataset":
        """Matches with start <= date < end, over a rebuilt team table."""
        picked = [
            m
            for m in self.matches
            if (start is None or m.date >= start) and (end is None or m.date < end)
        ]
        return from_records(
            (m.date, m.home.name, m.away.name, m.home_goals, m.away_goals,
             m.neutral, m.importance)
            for m in picked
        )

    def outcome_counts(self) -> dict[OutcomeLabel, int]:
        counts = {label: 0 for label in OutcomeLabel}
        for m in self.matches:
            counts[outcome_label(m)] += 1
        return counts


RowTuple = tuple[dt.date, str, str, int, int, bool, ImportanceClass]


def from_records(rows: Iterable[RowTuple], reference_date: dt.date | None = None) -> Dataset:
    """Build a Dataset from (date, home, away, hg, ag, neutral, importance) rows.

    Teams are numbered in order of first appearance; rows are sorted by date.
    """
    rows = sorted(rows, key=lambda r: r[0])
    table: dict[str, TeamId] = {}

    def intern(name: str) -> TeamId:
        team = table.get(name)
        if team is None:
            team = TeamId(len(table), name)
            table[name] = team
        return team

    matches = tuple(
        MatchRecord(date, intern(home), intern(away), hg, ag, neutral, importance)
        for date, home, away, hg, ag, neutral, importance in rows
    )
    return Dataset(matches, tuple(table.values()), reference_date)


def _parse_row(
    row: Mapping[str, str], line: int, default_importance: ImportanceClass
) -> RowTuple:
    def need(key: str) -> str:
        value = (row.get(key) or "").strip()
        if not value:
            raise CsvFormatError(line, f"missing value for {key!r}")
        return value

    try:
        date = dt.date.fromisoformat(need("date"))
    except ValueError as exc:
        raise CsvFormatError(line, f"bad date: {exc}") from None
    home = need("home")
    away = need("away")
    if home == away:
        raise CsvFormatError(line, f"home and away are both {home!r}")
    try:
        hg = int(need("home_goals"))
        ag = int(need("away_goals"))
    except ValueError:
        raise CsvFormatError(line, "goal counts must be integers") from None
    if hg < 0 or ag < 0:
        raise CsvFormatError(line, "goal counts must be non-negative")

    neutral = False
    raw_neutral = (row.get("neutral") or "").strip()
    if raw_neutral:
        if raw_neutral not in ("0", "1"):
            raise CsvFormatError(line, f"neutral must be 0 or 1, got {raw_neutral!r}")
        neutral = raw_neutral == "1"

    importance = default_importance
    raw_importance = (row.get("importance") or "").strip()
    if raw_importance:
        try:
            importance = ImportanceClass.from_label(raw_importance)
        except MatchDataError as exc:
            raise CsvFormatError(line, str(exc)) from None

    return (date, home, away, hg, ag, neutral, importance)


def parse_csv(
    source: str | Path | io.TextIOBase,
    *,
    column_map: Mapping[str, str] | None = None,
    strict: bool = True,
    default_importance: ImportanceClass = ImportanceClass.DOMESTIC_LEAGUE,
    reference_date: dt.date | None = None,
) -> Dataset:
    """Parse a results CSV into a Dataset.

    ``column_map`` renames schema columns to the file's actual headers,
    e.g. ``{"home": "home_team"}``. In strict mode any bad row aborts with
    a CsvFormatError naming the line; in lenient mode bad rows are skipped
    and reported on ``Dataset.skipped``.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as handle:
            return parse_csv(
                handle,
                column_map=column_map,
                strict=strict,
                default_importance=default_importance,
                reference_date=reference_date,
            )

    mapping = dict(column_map) if column_map else {}
    reader = csv.DictReader(source)
    if reader.fieldnames is None:
        raise CsvFormatError(1, "empty input: no header row")
    headers = [h.strip() for h in reader.fieldnames]
    missing = [
        col for col in REQUIRED_COLUMNS if mapping.get(col, col) not in headers
    ]
    if missing:
        raise CsvFormatError(1, f"missing required columns: {', '.join(missing)}")

    def translate(raw: Mapping[str, str]) -> dict[str, str]:
        raw = {(k or "").strip(): (v or "") for k, v in raw.items() if k is not None}
        out = {}
        for col in REQUIRED_COLUMNS + OPTIONAL_COLUMNS:
            actual = mapping.get(col, col)
            if actual in raw:
                out[col] = raw[actual]
        return out

    rows: list[RowTuple] = []
    issues: list[ParseIssue] = []
    for line_no, raw in enumerate(reader, start=2):
        try:
            rows.append(_parse_row(translate(raw), line_no, default_importance))
        except CsvFormatError as exc:
            if strict:
                raise
            issues.append(ParseIssue(exc.line, exc.reason))

    dataset = from_records(rows, reference_date)
    if issues:
        dataset = Dataset(
            dataset.matches, dataset.teams, reference_date, tuple(issues)
        )
    return dataset


def serialize_csv(dataset: Dataset, sink: io.TextIOBase | str | Path | None = None) -> str:
    """Write a Dataset back to canonical CSV; returns the text."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(REQUIRED_COLUMNS + OPTIONAL_COLUMNS)
    for m in dataset.matches:
        writer.writerow(
            [
                m.date.isoformat(),
                m.home.name,
                m.away.name,
                m.home_goals,
                m.away_goals,
                int(m.neutral),
                m.importance.value,
            ]
        )
    text = buffer.getvalue()
    if sink is not None:
        if isinstance(sink, (str, Path)):
            Path(sink).write_text(text, encoding="utf-8")
        else:
            sink.write(text)
    return text
