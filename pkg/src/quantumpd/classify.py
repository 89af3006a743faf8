"""Experimental game data and cooperation rankings.

Quantum ranking is lexicographic: larger N first, then smaller gamma_star,
smaller gamma1, smaller gamma2. The classical baselines rank by ascending
discount-factor bound.
"""
from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cmp_to_key
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .qcore import ConstraintError, PayoffMatrix
from .indicators import IndicatorSet, indicator_set

CSV_HEADER = ("game_id", "experiment", "a", "b", "c", "d", "cp", "observed_rank", "delta")
EXPERIMENTS = ("blonski", "dalbo", "custom")


class DatasetError(ValueError):
    """Malformed dataset file; message carries the line number when known."""


@dataclass(frozen=True)
class GameRecord:
    game_id: str
    experiment: str
    payoff: PayoffMatrix
    cp: float
    observed_rank: int
    delta_continuation: float = 0.75

    @property
    def key(self) -> tuple[str, str]:
        return (self.experiment, self.game_id)

    @property
    def label(self) -> str:
        return f"{self.experiment}:{self.game_id}"


_BUILTIN = [
    # game_id, experiment, a, b, c, d, cp, rank
    ("1", "blonski", 70, 100, 90, 80, 21.4, 3),
    ("2", "blonski", 0, 100, 90, 80, 2.8, 6),
    ("3", "blonski", 30, 130, 90, 70, 15.4, 4),
    ("4", "blonski", 0, 100, 90, 70, 13.4, 5),
    ("5", "blonski", 0, 120, 90, 50, 37.0, 2),
    ("6", "blonski", 0, 140, 90, 30, 37.6, 1),
    ("1", "dalbo", 12, 50, 32, 25, 7.6, 3),
    ("2", "dalbo", 12, 50, 40, 25, 22.1, 2),
    ("3", "dalbo", 12, 50, 48, 25, 28.7, 1),
]

# Published indicator values per game, columns as IndicatorSet.COLUMNS.
EXPECTED_TABLE = {
    ("blonski", "1"): (0.5, 0.667, 0.615, 0.615, 0.685, 19.38),
    ("blonski", "2"): (0.5, 0.9, 0.322, 1.107, 0.866, -48.45),
    ("blonski", "3"): (0.667, 0.8, 0.685, 0.685, 0.785, 0.0),
    ("blonski", "4"): (0.333, 0.8, 0.322, 0.991, 0.785, 0.0),
    ("blonski", "5"): (0.429, 0.667, 0.524, 0.702, 0.685, 77.52),
    ("blonski", "6"): (0.625, 0.786, 0.641, 0.481, 0.615, 155.03),
    ("dalbo", "1"): (0.72, 0.816, 0.759, 0.625, 0.798, -2.91),
    ("dalbo", "2"): (0.4, 0.605, 0.539, 0.625, 0.640, 35.85),
    ("dalbo", "3"): (0.08, 0.395, 0.231, 0.625, 0.487, 74.61),
}
TABLE_TOLERANCE = {
    "delta_lower": 0.001,
    "delta_star": 0.001,
    "gamma2": 0.001,
    "gamma1": 0.001,
    "gamma_star": 0.001,
    "n_value": 0.01,
}


def builtin_datasets() -> list[GameRecord]:
    return [
        GameRecord(gid, exp, PayoffMatrix(a, b, c, d), float(cp), rank, 0.75)
        for gid, exp, a, b, c, d, cp, rank in _BUILTIN
    ]


def validate_records(records: Sequence[GameRecord]) -> None:
    """Observed ranks must be 1..n within each experiment and follow descending cp."""
    seen = set()
    for rec in records:
        if rec.key in seen:
            raise DatasetError(f"duplicate game {rec.label}")
        seen.add(rec.key)
    for exp, group in group_by_experiment(records).items():
        ranks = sorted(r.observed_rank for r in group)
        if ranks != list(range(1, len(group) + 1)):
            raise DatasetError(f"{exp}: observed ranks {ranks} are not a permutation of 1..{len(group)}")
        ordered = sorted(group, key=lambda r: r.observed_rank)
        for hi, lo in zip(ordered, ordered[1:]):
            if not hi.cp > lo.cp:
                raise DatasetError(
                    f"{exp}: rank {hi.observed_rank} (cp={hi.cp}) does not exceed "
                    f"rank {lo.observed_rank} (cp={lo.cp})"
                )


def group_by_experiment(records: Iterable[GameRecord]) -> dict[str, list[GameRecord]]:
    out: dict[str, list[GameRecord]] = defaultdict(list)
    for rec in records:
        out[rec.experiment].append(rec)
    return dict(out)


def _fmt(x: float) -> str:
    return repr(float(x))


def dumps_dataset(records: Iterable[GameRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow(
            [r.game_id, r.experiment, *(_fmt(v) for v in r.payoff.as_tuple()),
             _fmt(r.cp), str(r.observed_rank), _fmt(r.delta_continuation)]
        )
    return buf.getvalue()


def loads_dataset(text: str) -> list[GameRecord]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetError("line 1: empty file, expected header") from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise DatasetError(f"line 1: header must be {','.join(CSV_HEADER)}")
    records = []
    for row in reader:
        lineno = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(CSV_HEADER):
            raise DatasetError(f"line {lineno}: expected {len(CSV_HEADER)} fields, got {len(row)}")
        gid, exp, *rest = (cell.strip() for cell in row)
        if exp not in EXPERIMENTS:
            raise DatasetError(f"line {lineno}: unknown experiment {exp!r}")
        try:
            a, b, c, d, cp = (float(v) for v in rest[:5])
            rank = int(rest[5])
            delta = float(rest[6])
        except ValueError as exc:
            raise DatasetError(f"line {lineno}: {exc}") from None
        if not 0.0 <= cp <= 100.0:
            raise DatasetError(f"line {lineno}: cp={cp} outside [0, 100]")
        if not 0.0 <= delta <= 1.0:
            raise DatasetError(f"line {lineno}: delta={delta} outside [0, 1]")
        try:
            payoff = PayoffMatrix(a, b, c, d)
        except ConstraintError as exc:
            raise DatasetError(f"line {lineno}: {exc}") from None
        records.append(GameRecord(gid, exp, payoff, cp, rank, delta))
    validate_records(records)
    return records


def read_dataset(path) -> list[GameRecord]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from None
    return loads_dataset(text)


def write_dataset(records: Iterable[GameRecord], path) -> None:
    Path(path).write_text(dumps_dataset(records), encoding="utf-8")


@dataclass(frozen=True)
class Tolerances:
    n_value: float = 0.005
    gamma: float = 0.0005
    delta: float = 0.0005


DEFAULT_TOLERANCES = Tolerances()

# (level, attribute, sign): sign +1 means larger values predict more cooperation
QUANTUM_LEVELS = (
    (1, "n_value", +1),
    (2, "gamma_star", -1),
    (3, "gamma1", -1),
    (4, "gamma2", -1),
)


@dataclass(frozen=True)
class Comparison:
    """``order`` is +1 when x is predicted more cooperative than y, -1 when less, 0 when indistinguishable."""

    order: int
    level: Optional[int]
    indicator: Optional[str]

    @property
    def indistinguishable(self) -> bool:
        return self.order == 0


def _gamma_star_key(ind: IndicatorSet) -> float:
    # no zero on [0, pi/2] with N > 0 means the quantum side already wins at gamma = 0
    if ind.gamma_star is None:
        return 0.0 if (ind.gamma_star_sign or 1) > 0 else math.pi / 2
    return ind.gamma_star


def compare_games(x: IndicatorSet, y: IndicatorSet, tol: Tolerances = DEFAULT_TOLERANCES) -> Comparison:
    for level, attr, sign in QUANTUM_LEVELS:
        if attr == "gamma_star":
            vx, vy = _gamma_star_key(x), _gamma_star_key(y)
        else:
            vx, vy = getattr(x, attr), getattr(y, attr)
        limit = tol.n_value if attr == "n_value" else tol.gamma
        if abs(vx - vy) > limit:
            return Comparison(sign if vx > vy else -sign, level, attr)
    return Comparison(0, None, None)


def compare_classical(x: IndicatorSet, y: IndicatorSet, indicator: str, tol: Tolerances = DEFAULT_TOLERANCES) -> Comparison:
    vx, vy = getattr(x, indicator), getattr(y, indicator)
    if abs(vx - vy) > tol.delta:
        return Comparison(1 if vx < vy else -1, 1, indicator)
    return Comparison(0, None, None)


@dataclass
class RankedGame:
    record: GameRecord
    indicators: IndicatorSet
    predicted_rank: int

    @property
    def observed_rank(self) -> int:
        return self.record.observed_rank


@dataclass
class RankingReport:
    method: str
    games: list[RankedGame]
    tie_break_trace: list[dict]
    concordance: Optional[float]
    authoritative: bool = True
    notes: list[str] = field(default_factory=list)

    @property
    def order(self) -> list[str]:
        return [g.record.game_id for g in self.games]

    @property
    def matches_observed(self) -> bool:
        return all(g.predicted_rank == g.observed_rank for g in self.games)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "order": [g.record.label for g in self.games],
            "predicted_rank": {g.record.label: g.predicted_rank for g in self.games},
            "observed_rank": {g.record.label: g.observed_rank for g in self.games},
            "tie_break_trace": self.tie_break_trace,
            "concordance": self.concordance,
            "concordance_defined": self.concordance is not None,
            "authoritative": self.authoritative,
            "notes": self.notes,
        }


def concordance(predicted: Sequence[int], observed: Sequence[int]) -> Optional[float]:
    """(concordant - discordant) / all pairs; None for fewer than two games.

    Pairs tied in either ranking count as neither.
    """
    n = len(predicted)
    if n != len(observed):
        raise ValueError("rank sequences differ in length")
    if n < 2:
        return None
    score = 0
    for i in range(n):
        for j in range(i + 1, n):
            s = (predicted[i] > predicted[j]) - (predicted[i] < predicted[j])
            t = (observed[i] > observed[j]) - (observed[i] < observed[j])
            score += s * t
    return score / (n * (n - 1) // 2)


def compute_indicators(records, **kwargs) -> dict[tuple[str, str], IndicatorSet]:
    return {r.key: indicator_set(r.payoff, **kwargs) for r in records}


def _rank(records, indicators, compare, method, authoritative=True):
    records = list(records)
    if not records:
        raise ValueError("no games to rank")
    if indicators is None:
        indicators = compute_indicators(records)

    def cmp(r1, r2):
        # more cooperative sorts first
        return -compare(indicators[r1.key], indicators[r2.key]).order

    ordered = sorted(records, key=cmp_to_key(cmp))
    games, trace = [], []
    for pos, rec in enumerate(ordered):
        rank = pos + 1
        if pos:
            prev = ordered[pos - 1]
            res = compare(indicators[prev.key], indicators[rec.key])
            trace.append({
                "pair": [prev.label, rec.label],
                "level": res.level,
                "indicator": res.indicator,
                "result": "indistinguishable" if res.indistinguishable else "more_cooperative_first",
            })
            if res.indistinguishable:
                rank = games[-1].predicted_rank
        games.append(RankedGame(rec, indicators[rec.key], rank))
    conc = concordance([g.predicted_rank for g in games], [g.observed_rank for g in games])
    return RankingReport(method, games, trace, conc, authoritative)


def _single_experiment(records):
    exps = {r.experiment for r in records}
    if len(exps) > 1:
        raise ValueError(f"records span several experiments: {sorted(exps)}")


def rank_experiment(
    records: Sequence[GameRecord],
    tol: Tolerances = DEFAULT_TOLERANCES,
    indicators: Optional[Mapping[tuple[str, str], IndicatorSet]] = None,
) -> RankingReport:
    _single_experiment(records)
    report = _rank(records, indicators, lambda x, y: compare_games(x, y, tol), "quantum")
    report.notes.append("gamma2 level ranks smaller gamma2 as more cooperative")
    return report


def classical_rank_experiment(
    records: Sequence[GameRecord],
    indicator: str = "delta_star",
    tol: Tolerances = DEFAULT_TOLERANCES,
    indicators: Optional[Mapping[tuple[str, str], IndicatorSet]] = None,
) -> RankingReport:
    if indicator not in ("delta_lower", "delta_star"):
        raise ValueError(f"unknown classical indicator {indicator!r}")
    _single_experiment(records)
    return _rank(records, indicators, lambda x, y: compare_classical(x, y, indicator, tol), indicator)


def rank_across_experiments(
    records: Sequence[GameRecord],
    tol: Tolerances = DEFAULT_TOLERANCES,
    indicators: Optional[Mapping[tuple[str, str], IndicatorSet]] = None,
) -> RankingReport:
    """Quantum ranking of games pooled from several experiments.

    Observed ranks are not comparable between experiments, so concordance is
    computed against cp and the report is marked non-authoritative.
    """
    report = _rank(records, indicators, lambda x, y: compare_games(x, y, tol), "quantum-pooled", authoritative=False)
    by_cp = sorted(report.games, key=lambda g: -g.record.cp)
    cp_rank = {g.record.key: i + 1 for i, g in enumerate(by_cp)}
    report.concordance = concordance(
        [g.predicted_rank for g in report.games], [cp_rank[g.record.key] for g in report.games]
    )
    report.notes.append("pooled across experiments; concordance is against cp, not observed rank")
    return report


def scatter_inversions(records: Sequence[GameRecord], n_values: Mapping[tuple[str, str], float]) -> dict[str, int]:
    """Per experiment, the number of game pairs where higher N comes with lower cp."""
    out = {}
    for exp, group in group_by_experiment(records).items():
        inv = 0
        for i, r1 in enumerate(group):
            for r2 in group[i + 1:]:
                dn = n_values[r1.key] - n_values[r2.key]
                dc = r1.cp - r2.cp
                if dn * dc < 0:
                    inv += 1
        out[exp] = inv
    return out
