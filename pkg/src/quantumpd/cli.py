"""Command-line front end.

Exit codes: 0 success, 2 constraint or validation error, 3 ``--check``
mismatch, 4 I/O or parse error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

from . import classify
from .classify import DatasetError, EXPECTED_TABLE, TABLE_TOLERANCE
from .equilibria import (
    DEFAULT_NASH_TOL,
    DEFAULT_TOL_GAMMA,
    StrategyGrid,
    nash_scan,
)
from .indicators import (
    IndicatorSet,
    NoRootError,
    delta_star,
    gamma_star,
    indicator_set,
    n_indicator,
    novel_function,
)
from .qcore import (
    NAMED_STRATEGIES,
    ConstraintError,
    ParameterRangeError,
    PayoffMatrix,
    StrategyParams,
    final_state,
    game_payoff,
    outcome_distribution,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CHECK = 3
EXIT_IO = 4

@dataclass(frozen=True)
class RunConfig:
    command: str
    fmt: str
    out: Optional[str]
    grid: StrategyGrid
    tol_gamma: float
    tol: float
    degrees: bool

    def __post_init__(self):
        if self.tol_gamma <= 0 or self.tol <= 0:
            raise ValueError("tolerances must be positive")

    def angle(self, x):
        if x is None:
            return None
        return math.degrees(x) if self.degrees else x

    @property
    def unit(self) -> str:
        return "deg" if self.degrees else "rad"


def _global_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--format", dest="fmt", choices=["json", "csv", "text"], default=None,
                        help="output format (default depends on the command)")
    parent.add_argument("--out", default=None, help="write output to this file instead of stdout")
    parent.add_argument("--tol-gamma", type=float, default=DEFAULT_TOL_GAMMA,
                        help="bisection tolerance for gamma1/gamma2 in radians (default: %(default)g)")
    parent.add_argument("--tol", type=float, default=DEFAULT_NASH_TOL,
                        help="Nash certification tolerance in game units (default: %(default)g)")
    parent.add_argument("--grid", default="181x91", help="strategy grid as NTHETAxNPHI (default: %(default)s)")
    parent.add_argument("--degrees", action="store_true", help="display angles in degrees (input stays in radians)")
    return parent


def _add_payoff_args(p):
    for name, desc in zip("abcd", ("sucker", "temptation", "reward", "punishment")):
        p.add_argument(name, type=float, help=f"{desc} payoff")


def build_parser() -> argparse.ArgumentParser:
    common = _global_options()
    parser = argparse.ArgumentParser(
        prog="quantumpd",
        description="Quantum cooperation indicators for prisoner's-dilemma games.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="indicators for one payoff matrix")
    _add_payoff_args(p)
    p.add_argument("--gamma", type=float, default=None, help="also evaluate N(gamma) here")

    p = sub.add_parser("table", parents=[common], help="indicator table and rankings for a dataset")
    p.add_argument("--dataset", default="builtin", help="'builtin' or a CSV path")
    p.add_argument("--check", action="store_true", help="compare against the published table; exit 3 on mismatch")

    p = sub.add_parser("sweep", parents=[common], help="delta_star, gamma_star and N along one payoff parameter")
    p.add_argument("--param", choices=list("abcd"), default="c")
    p.add_argument("--start", type=float, default=26.0)
    p.add_argument("--stop", type=float, default=49.0)
    p.add_argument("--step", type=float, default=0.5)
    for name, default in zip("abcd", (12.0, 50.0, 40.0, 25.0)):
        p.add_argument(f"--{name}", dest=f"fixed_{name}", type=float, default=default,
                       help=f"fixed value of {name} (default: %(default)g)")

    p = sub.add_parser("scatter", parents=[common], help="N against observed cooperation percentage")
    p.add_argument("--dataset", default="builtin")

    p = sub.add_parser("payoff", parents=[common], help="evaluate the protocol for given strategies")
    _add_payoff_args(p)
    for name in ("theta-a", "phi-a", "theta-b", "phi-b"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)

    p = sub.add_parser("equilibria", parents=[common], help="Nash scan over the named strategies C, D, Q")
    _add_payoff_args(p)
    p.add_argument("--gamma", type=float, required=True)
    return parser


def _config(args, default_fmt) -> RunConfig:
    return RunConfig(
        command=args.command,
        fmt=args.fmt or default_fmt,
        out=args.out,
        grid=StrategyGrid.parse(args.grid),
        tol_gamma=args.tol_gamma,
        tol=args.tol,
        degrees=args.degrees,
    )


def _payoff_from(args) -> PayoffMatrix:
    return PayoffMatrix(args.a, args.b, args.c, args.d)


def _num(x, digits=None):
    if x is None:
        return ""
    if digits is None:
        return repr(float(x))
    return f"{x:.{digits}f}"


def _indicator_json(ind: IndicatorSet, cfg: RunConfig) -> dict:
    full = ind.as_dict()
    rounded = ind.rounded()
    for key in ("gamma1", "gamma2", "gamma_star"):
        full[key] = cfg.angle(full[key])
        if cfg.degrees and rounded[key] is not None:
            rounded[key] = round(math.degrees(getattr(ind, key)), 3)
    return {**full, "rounded": rounded}


def _indicator_text_rows(ind: IndicatorSet, cfg: RunConfig):
    u = cfg.unit
    gs = "no root (N %s)" % ("> 0" if (ind.gamma_star_sign or 0) > 0 else "< 0") if ind.gamma_star is None else _num(cfg.angle(ind.gamma_star), 3)
    return [
        ("delta_lower", _num(ind.delta_lower, 3)),
        ("delta_star", _num(ind.delta_star, 3)),
        (f"gamma2 ({u})", _num(cfg.angle(ind.gamma2), 3) + ("" if ind.gamma2_found else " (never appears)")),
        (f"gamma1 ({u})", _num(cfg.angle(ind.gamma1), 3) + ("" if ind.gamma1_found else " (never dissolves)")),
        (f"gamma_star ({u})", gs),
        ("N", _num(ind.n_value, 2)),
    ]


def _align(rows) -> str:
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows) + "\n"


def cmd_analyze(args) -> tuple[str, int]:
    cfg = _config(args, "text")
    payoff = _payoff_from(args)
    ind = indicator_set(payoff, grid=cfg.grid, tol_gamma=cfg.tol_gamma, tol=cfg.tol)
    n_gamma = None
    if args.gamma is not None:
        n_gamma = novel_function(payoff, args.gamma)
    if cfg.fmt == "json":
        body = {"payoff": dict(zip("abcd", payoff.as_tuple())), "angle_unit": cfg.unit,
                "indicators": _indicator_json(ind, cfg)}
        if n_gamma is not None:
            body["gamma"] = cfg.angle(args.gamma)
            body["novel_function"] = n_gamma
        return json.dumps(body, indent=2) + "\n", EXIT_OK
    if cfg.fmt == "csv":
        cols = list(IndicatorSet.COLUMNS)
        row = [_num(getattr(ind, c) if c in ("delta_lower", "delta_star", "n_value") else cfg.angle(getattr(ind, c)))
               for c in cols]
        if n_gamma is not None:
            cols += ["gamma", "novel_function"]
            row += [_num(cfg.angle(args.gamma)), _num(n_gamma)]
        return ",".join(cols) + "\n" + ",".join(row) + "\n", EXIT_OK
    rows = [("payoff (a, b, c, d)", ", ".join(f"{v:g}" for v in payoff.as_tuple()))]
    rows += _indicator_text_rows(ind, cfg)
    if n_gamma is not None:
        rows.append((f"N(gamma={_num(cfg.angle(args.gamma), 4)})", f"{n_gamma:.6g}"))
    return _align(rows), EXIT_OK


def _load(dataset: str):
    if dataset == "builtin":
        return classify.builtin_datasets()
    return classify.read_dataset(dataset)


def check_table(records, indicators) -> list[str]:
    """Cells that differ from the published table beyond tolerance."""
    problems = []
    for rec in records:
        expected = EXPECTED_TABLE.get(rec.key)
        if expected is None:
            continue
        ind = indicators[rec.key]
        for col, want in zip(IndicatorSet.COLUMNS, expected):
            got = getattr(ind, col)
            if got is None or abs(got - want) > TABLE_TOLERANCE[col]:
                problems.append(f"{rec.label} {col}: got {got!r}, expected {want} +/- {TABLE_TOLERANCE[col]}")
    return problems


def _rankings(records, indicators):
    out = {}
    for exp, group in classify.group_by_experiment(records).items():
        out[exp] = {
            "quantum": classify.rank_experiment(group, indicators=indicators),
            "delta_star": classify.classical_rank_experiment(group, "delta_star", indicators=indicators),
            "delta_lower": classify.classical_rank_experiment(group, "delta_lower", indicators=indicators),
        }
    pooled = None
    if len(out) > 1:
        pooled = classify.rank_across_experiments(records, indicators=indicators)
    return out, pooled


def cmd_table(args) -> tuple[str, int]:
    cfg = _config(args, "text")
    records = _load(args.dataset)
    if not records:
        raise ValueError("no games")
    indicators = classify.compute_indicators(records, grid=cfg.grid, tol_gamma=cfg.tol_gamma, tol=cfg.tol)
    rankings, pooled = _rankings(records, indicators)
    problems = check_table(records, indicators) if args.check else []
    checked = sum(1 for r in records if r.key in EXPECTED_TABLE) * len(IndicatorSet.COLUMNS)

    if cfg.fmt == "json":
        body = {
            "angle_unit": cfg.unit,
            "games": [
                {
                    "game_id": r.game_id,
                    "experiment": r.experiment,
                    "a": r.payoff.a, "b": r.payoff.b, "c": r.payoff.c, "d": r.payoff.d,
                    "cp": r.cp,
                    "observed_rank": r.observed_rank,
                    "delta": r.delta_continuation,
                    **_indicator_json(indicators[r.key], cfg),
                }
                for r in records
            ],
            "rankings": {exp: {k: rep.to_dict() for k, rep in reps.items()} for exp, reps in rankings.items()},
        }
        if pooled is not None:
            body["cross_experiment"] = pooled.to_dict()
        if args.check:
            body["check"] = {"cells": checked, "mismatches": problems}
        text = json.dumps(body, indent=2) + "\n"
    elif cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["experiment", "game_id", "a", "b", "c", "d", "cp", "observed_rank", *IndicatorSet.COLUMNS])
        for r in records:
            ind = indicators[r.key]
            rounded = _indicator_json(ind, cfg)["rounded"]
            w.writerow([r.experiment, r.game_id, *(f"{v:g}" for v in r.payoff.as_tuple()), f"{r.cp:g}",
                        r.observed_rank, *(_num(rounded[c], 2 if c == "n_value" else 3) for c in IndicatorSet.COLUMNS)])
        text = buf.getvalue()
    else:
        text = _table_text(records, indicators, rankings, pooled, cfg)
        if args.check:
            text += f"\ncheck: {checked - len(problems)}/{checked} cells within tolerance\n"
            text += "".join(f"  MISMATCH {p}\n" for p in problems)
    return text, (EXIT_CHECK if problems else EXIT_OK)


def _table_text(records, indicators, rankings, pooled, cfg) -> str:
    u = cfg.unit
    header = ["exp", "game", "a", "b", "c", "d", "Cp%", "rank", "d_low", "d_star",
              f"g2({u})", f"g1({u})", f"g_star({u})", "N"]
    rows = []
    for r in records:
        ind = indicators[r.key]
        gs = "-" if ind.gamma_star is None else _num(cfg.angle(ind.gamma_star), 3)
        rows.append([r.experiment, r.game_id, *(f"{v:g}" for v in r.payoff.as_tuple()), f"{r.cp:g}",
                     str(r.observed_rank), _num(ind.delta_lower, 3), _num(ind.delta_star, 3),
                     _num(cfg.angle(ind.gamma2), 3), _num(cfg.angle(ind.gamma1), 3), gs,
                     _num(ind.n_value, 2)])
    widths = [max(len(header[i]), *(len(row[i]) for row in rows)) for i in range(len(header))]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in rows]
    lines.append("")
    for exp, reps in rankings.items():
        for name, rep in reps.items():
            conc = "undefined" if rep.concordance is None else f"{rep.concordance:.3f}"
            order = rep.games[0].record.game_id
            for prev, g in zip(rep.games, rep.games[1:]):
                sep = " = " if g.predicted_rank == prev.predicted_rank else " > "
                order += sep + g.record.game_id
            lines.append(f"{exp:8s} {name:12s} order {order}   concordance {conc}")
        for t in reps["quantum"].tie_break_trace:
            lines.append(f"{'':8s} {'':12s} {t['pair'][0]} vs {t['pair'][1]}: level {t['level']} ({t['indicator']})")
    if pooled is not None:
        lines.append(f"pooled (non-authoritative) concordance vs cp: {pooled.concordance:.3f}")
    return "\n".join(lines) + "\n"


def _sweep_values(start, stop, step):
    if step <= 0:
        raise ValueError("step must be positive")
    if stop < start:
        raise ValueError("stop must not be below start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def cmd_sweep(args) -> tuple[str, int]:
    cfg = _config(args, "csv")
    fixed = {k: getattr(args, f"fixed_{k}") for k in "abcd"}
    rows = []
    for value in _sweep_values(args.start, args.stop, args.step):
        params = dict(fixed, **{args.param: value})
        try:
            payoff = PayoffMatrix(**params)
        except ConstraintError as exc:
            rows.append((value, None, None, None, "skip: " + "; ".join(exc.violations)))
            continue
        try:
            gs, status = gamma_star(payoff), "ok"
        except NoRootError:
            gs, status = None, "no-root"
        rows.append((value, delta_star(payoff), gs, n_indicator(payoff), status))
    if all(r[4].startswith("skip") for r in rows):
        raise ValueError(f"no valid prisoner's dilemma in the swept range of {args.param}")
    cols = [args.param, "delta_star", "gamma_star", "n_value", "status"]
    if cfg.fmt == "json":
        body = [dict(zip(cols, (v, ds, cfg.angle(gs), n, st))) for v, ds, gs, n, st in rows]
        return json.dumps({"angle_unit": cfg.unit, "fixed": fixed, "rows": body}, indent=2) + "\n", EXIT_OK
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for v, ds, gs, n, st in rows:
        w.writerow([_num(v), _num(ds), _num(cfg.angle(gs)), _num(n), st])
    return buf.getvalue(), EXIT_OK


def cmd_scatter(args) -> tuple[str, int]:
    cfg = _config(args, "csv")
    records = _load(args.dataset)
    if not records:
        raise ValueError("no games")
    # only N is needed, no barrier search
    n_values = {r.key: n_indicator(r.payoff) for r in records}
    inversions = classify.scatter_inversions(records, n_values)
    if cfg.fmt == "json":
        body = {
            "points": [{"experiment": r.experiment, "game_id": r.game_id, "n_value": n_values[r.key], "cp": r.cp}
                       for r in records],
            "inversions": inversions,
        }
        return json.dumps(body, indent=2) + "\n", EXIT_OK
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["experiment", "game_id", "n_value", "cp"])
    for r in records:
        w.writerow([r.experiment, r.game_id, _num(n_values[r.key]), _num(r.cp)])
    buf.write("# inversions " + " ".join(f"{k}={v}" for k, v in inversions.items()) + "\n")
    return buf.getvalue(), EXIT_OK


def _strategy_json(s: StrategyParams, cfg):
    return {"theta": cfg.angle(s.theta), "phi": cfg.angle(s.phi)}


def cmd_payoff(args) -> tuple[str, int]:
    cfg = _config(args, "text")
    payoff = _payoff_from(args)
    ua = StrategyParams(args.theta_a, args.phi_a)
    ub = StrategyParams(args.theta_b, args.phi_b)
    state = final_state(ua, ub, args.gamma)
    dist = outcome_distribution(state)
    pay = game_payoff(payoff, ua, ub, args.gamma)
    if cfg.fmt == "json":
        body = {
            "angle_unit": cfg.unit,
            "strategy_a": _strategy_json(ua, cfg),
            "strategy_b": _strategy_json(ub, cfg),
            "gamma": cfg.angle(args.gamma),
            "amplitudes": [[z.real, z.imag] for z in state.amplitudes],
            "probabilities": dist._asdict(),
            "payoff_a": pay.payoff_a,
            "payoff_b": pay.payoff_b,
        }
        return json.dumps(body, indent=2) + "\n", EXIT_OK
    if cfg.fmt == "csv":
        cols = ["p_cc", "p_cd", "p_dc", "p_dd", "payoff_a", "payoff_b"]
        return ",".join(cols) + "\n" + ",".join(_num(v) for v in (*dist, *pay)) + "\n", EXIT_OK
    rows = [(k, f"{v:.10g}") for k, v in dist._asdict().items()]
    rows += [("payoff_a", f"{pay.payoff_a:.10g}"), ("payoff_b", f"{pay.payoff_b:.10g}")]
    return _align(rows), EXIT_OK


def cmd_equilibria(args) -> tuple[str, int]:
    cfg = _config(args, "text")
    payoff = _payoff_from(args)
    certs = nash_scan(payoff, NAMED_STRATEGIES, args.gamma, cfg.grid, cfg.tol)
    if cfg.fmt == "json":
        body = {
            "gamma": cfg.angle(args.gamma),
            "angle_unit": cfg.unit,
            "profiles": [
                {"profile": a + b, "nash": c.holds, "epsilon": c.epsilon,
                 "best_deviation_a": _strategy_json(c.deviations[0], cfg),
                 "best_deviation_b": _strategy_json(c.deviations[1], cfg)}
                for (a, b), c in certs.items()
            ],
        }
        return json.dumps(body, indent=2) + "\n", EXIT_OK
    if cfg.fmt == "csv":
        lines = ["profile,nash,epsilon"]
        lines += [f"{a}{b},{str(c.holds).lower()},{_num(c.epsilon)}" for (a, b), c in certs.items()]
        return "\n".join(lines) + "\n", EXIT_OK
    rows = [(f"({a},{b})", ("nash    " if c.holds else "not nash") + f"  epsilon {c.epsilon:.3e}")
            for (a, b), c in certs.items()]
    return _align(rows), EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "table": cmd_table,
    "sweep": cmd_sweep,
    "scatter": cmd_scatter,
    "payoff": cmd_payoff,
    "equilibria": cmd_equilibria,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text, code = COMMANDS[args.command](args)
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConstraintError, ParameterRangeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    if code == EXIT_CHECK:
        print("error: table check failed", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
