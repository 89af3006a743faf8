"""Exit criteria. Each test records one PASS/FAIL line, shown in the terminal summary."""
import contextlib
import csv
import io
import math
import time

import numpy as np

from quantumpd.classify import (
    EXPECTED_TABLE,
    TABLE_TOLERANCE,
    builtin_datasets,
    classical_rank_experiment,
    compute_indicators,
    group_by_experiment,
    rank_experiment,
)
from quantumpd.cli import main
from quantumpd.equilibria import is_nash
from quantumpd.indicators import (
    IndicatorSet,
    gamma_star,
    gamma_star_bisection,
    n_indicator,
    n_indicator_quadrature,
    novel_function,
    novel_function_quadrature,
)
from quantumpd.qcore import (
    COOPERATE,
    DEFECT,
    QUANTUM,
    StrategyParams,
    entangler,
    final_state,
    game_payoff,
    outcome_distribution,
    strategy_matrix,
)

from conftest import ACCEPTANCE_LINES, random_pd

HALF_PI = math.pi / 2


@contextlib.contextmanager
def criterion(number, title):
    notes = []
    try:
        yield notes
    except BaseException as exc:
        detail = "; ".join(notes) or str(exc).splitlines()[0]
        ACCEPTANCE_LINES.append(f"FAIL  [{number}] {title}: {detail}")
        raise
    ACCEPTANCE_LINES.append(f"PASS  [{number}] {title}" + (f": {'; '.join(notes)}" if notes else ""))


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, _ = capsys.readouterr()
    return code, out


def test_1_table_reproduction():
    with criterion(1, "Table II reproduction (54 cells, runtime < 60 s)") as notes:
        records = builtin_datasets()
        start = time.perf_counter()
        indicators = compute_indicators(records)
        elapsed = time.perf_counter() - start
        mismatches = []
        for rec in records:
            ind = indicators[rec.key]
            for col, want in zip(IndicatorSet.COLUMNS, EXPECTED_TABLE[rec.key]):
                got = getattr(ind, col)
                if abs(got - want) > TABLE_TOLERANCE[col]:
                    mismatches.append(f"{rec.label} {col} got {got:.4f} want {want}")
        notes.append(f"{54 - len(mismatches)}/54 cells within tolerance in {elapsed:.1f} s")
        notes.extend(mismatches)
        assert elapsed < 60
        assert not mismatches


def test_1_check_gate(capsys):
    with criterion(1, "table --dataset builtin --check exits 0") as notes:
        code, out = run_cli(capsys, "table", "--dataset", "builtin", "--check")
        notes.append(next(line for line in out.splitlines() if line.startswith("check:")))
        assert code == 0


def test_2_closed_form_vs_quadrature():
    with criterion(2, "closed form vs quadrature (500 + 50 samples, < 10 s)") as notes:
        rng = np.random.default_rng(2)
        start = time.perf_counter()
        worst = 0.0
        for _ in range(500):
            p = random_pd(rng)
            g = rng.uniform(0, HALF_PI)
            closed = novel_function(p, g)
            worst = max(worst, abs(closed - novel_function_quadrature(p, g)) / abs(closed))
        worst_n = 0.0
        for _ in range(50):
            p = random_pd(rng)
            closed = n_indicator(p)
            worst_n = max(worst_n, abs(closed - n_indicator_quadrature(p)) / abs(closed))
        elapsed = time.perf_counter() - start
        notes.append(f"max rel err N(gamma) {worst:.1e}, N {worst_n:.1e}, {elapsed:.1f} s")
        assert worst < 1e-8 and worst_n < 1e-8
        assert elapsed < 10


def test_3_root_consistency():
    with criterion(3, "bisection root equals closed-form gamma_star (9 games)") as notes:
        diffs = [abs(gamma_star_bisection(r.payoff) - gamma_star(r.payoff)) for r in builtin_datasets()]
        notes.append(f"max diff {max(diffs):.1e}")
        assert max(diffs) < 1e-8


def test_4_ranking_reproduction(builtin_records, builtin_indicators):
    with criterion(4, "quantum ranking reproduces observed ranks") as notes:
        groups = group_by_experiment(builtin_records)
        blonski = rank_experiment(groups["blonski"], indicators=builtin_indicators)
        dalbo = rank_experiment(groups["dalbo"], indicators=builtin_indicators)
        notes.append(f"blonski {blonski.order} conc {blonski.concordance}")
        notes.append(f"dalbo {dalbo.order} conc {dalbo.concordance}")
        assert blonski.order == ["6", "5", "1", "3", "4", "2"]
        assert blonski.matches_observed and blonski.concordance == 1.0
        tie = next(t for t in blonski.tie_break_trace if t["pair"] == ["blonski:3", "blonski:4"])
        assert tie["level"] == 3 and tie["indicator"] == "gamma1"
        assert all(t["level"] == 1 for t in blonski.tie_break_trace if t is not tie)
        assert dalbo.order == ["3", "2", "1"]
        assert dalbo.matches_observed and dalbo.concordance == 1.0
        assert all(t["level"] == 1 for t in dalbo.tie_break_trace)


def test_5_baseline_comparison(builtin_records, builtin_indicators):
    with criterion(5, "quantum >= delta_star >= delta_lower concordance (Blonski)") as notes:
        blonski = group_by_experiment(builtin_records)["blonski"]
        q = rank_experiment(blonski, indicators=builtin_indicators).concordance
        ds = classical_rank_experiment(blonski, "delta_star", indicators=builtin_indicators).concordance
        dl = classical_rank_experiment(blonski, "delta_lower", indicators=builtin_indicators).concordance
        notes.append(f"{q:.3f} >= {ds:.3f} >= {dl:.3f}")
        assert q >= ds >= dl


def test_6_protocol_invariants():
    with criterion(6, "protocol invariants (>= 1000 cases each, < 5 s)") as notes:
        rng = np.random.default_rng(6)
        n = 1000
        start = time.perf_counter()

        def rand_strategy():
            return StrategyParams(rng.uniform(0, math.pi), rng.uniform(0, HALF_PI))

        for _ in range(n):
            u = strategy_matrix(rand_strategy())
            assert np.abs(u.conj().T @ u - np.eye(2)).max() <= 1e-12
            j = entangler(rng.uniform(0, HALF_PI))
            assert np.abs(j @ j.conj().T - np.eye(4)).max() <= 1e-12
        assert np.array_equal(entangler(0.0), np.eye(4))

        for _ in range(n):
            ua, ub, g = rand_strategy(), rand_strategy(), rng.uniform(0, HALF_PI)
            state = final_state(ua, ub, g)
            assert abs(np.linalg.norm(state.amplitudes) - 1) <= 1e-10
            assert abs(sum(outcome_distribution(state)) - 1) <= 1e-10

        thetas = np.linspace(0, math.pi, 20)
        cases = 0
        for _ in range(3):
            p = random_pd(rng)
            for ta in thetas:
                for tb in thetas:
                    qa, qb = math.cos(ta / 2) ** 2, math.cos(tb / 2) ** 2
                    want = (qa * qb * p.c + qa * (1 - qb) * p.a + (1 - qa) * qb * p.b
                            + (1 - qa) * (1 - qb) * p.d)
                    got = game_payoff(p, StrategyParams(ta, 0), StrategyParams(tb, 0), 0.0).payoff_a
                    assert abs(got - want) <= 1e-10
                    cases += 1

        for _ in range(n):
            p, u, v, g = random_pd(rng), rand_strategy(), rand_strategy(), rng.uniform(0, HALF_PI)
            fwd, back = game_payoff(p, u, v, g), game_payoff(p, v, u, g)
            assert abs(fwd.payoff_a - back.payoff_b) <= 1e-10
            assert abs(fwd.payoff_b - back.payoff_a) <= 1e-10

        elapsed = time.perf_counter() - start
        notes.append(f"{n} cases per property, {cases} classical-reduction cases, {elapsed:.2f} s")
        assert elapsed < 5


def test_7_equilibrium_sanity():
    with criterion(7, "(D,D) Nash and (C,C) eps = b - c at gamma 0; (Q,Q) Nash at pi/2") as notes:
        for rec in builtin_datasets():
            p = rec.payoff
            assert is_nash(p, (DEFECT, DEFECT), 0.0).holds, rec.label
            cc = is_nash(p, (COOPERATE, COOPERATE), 0.0)
            assert not cc.holds and abs(cc.epsilon - (p.b - p.c)) <= 1e-6, rec.label
            assert is_nash(p, (QUANTUM, QUANTUM), HALF_PI).holds, rec.label
        notes.append("9/9 games")


def test_8_figure_data(capsys):
    with criterion(8, "sweep matches Dal Bo rows; scatter has 0 inversions") as notes:
        code, out = run_cli(capsys, "sweep", "--param", "c", "--start", "26", "--stop", "49", "--step", "1",
                            "--a", "12", "--b", "50", "--d", "25")
        assert code == 0
        rows = {float(r["c"]): r for r in csv.DictReader(io.StringIO(out))}
        for c, game in ((32, "1"), (40, "2"), (48, "3")):
            want = dict(zip(IndicatorSet.COLUMNS, EXPECTED_TABLE[("dalbo", game)]))
            assert abs(float(rows[c]["gamma_star"]) - want["gamma_star"]) <= 1e-3
            assert abs(float(rows[c]["delta_star"]) - want["delta_star"]) <= 1e-3
        code, out = run_cli(capsys, "scatter")
        assert code == 0
        summary = out.splitlines()[-1]
        notes.append(summary.lstrip("# "))
        assert summary == "# inversions blonski=0 dalbo=0"
