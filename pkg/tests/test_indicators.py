import math

import numpy as np
import pytest

from quantumpd.indicators import (
    IndicatorSet,
    NoRootError,
    delta_lower,
    delta_star,
    gamma_star,
    gamma_star_bisection,
    n_indicator,
    n_indicator_quadrature,
    novel_function,
    novel_function_quadrature,
)
from quantumpd.qcore import PayoffMatrix

from conftest import GAMES, random_pd

HALF_PI = math.pi / 2


def rel(x, y):
    return abs(x - y) / (1 + abs(x))


class TestNovelFunction:
    def test_game3_at_quarter_pi(self):
        # (pi^2/16) [1 * (-100) + 5 * 20] = 0
        assert novel_function(GAMES["blonski3"], math.pi / 4) == pytest.approx(0.0, abs=1e-12)

    def test_game1_unentangled(self):
        # (pi^2/4)(a - b + c - d) = (pi^2/4)(-20)
        assert novel_function(GAMES["blonski1"], 0.0) == pytest.approx(-49.348022, abs=1e-6)
        assert novel_function(GAMES["blonski1"], 0.0) == pytest.approx(-5 * math.pi**2, rel=1e-14)

    @pytest.mark.parametrize(
        "name, g", [("blonski1", 0.3), ("blonski5", HALF_PI), ("dalbo2", 0.0)]
    )
    def test_quadrature_examples(self, name, g):
        p = GAMES[name]
        assert rel(novel_function(p, g), novel_function_quadrature(p, g)) < 1e-8

    def test_quadrature_random(self, rng):
        for _ in range(30):
            p = random_pd(rng)
            g = rng.uniform(0, HALF_PI)
            assert rel(novel_function(p, g), novel_function_quadrature(p, g)) < 1e-8

    def test_nondecreasing_in_gamma(self, rng):
        gs = np.linspace(0, HALF_PI, 100)
        for _ in range(20):
            p = random_pd(rng)
            vals = np.array([novel_function(p, g) for g in gs])
            assert np.all(np.diff(vals) >= -1e-9)


class TestIntegratedIndicator:
    @pytest.mark.parametrize(
        "name, expected", [("blonski1", 19.38), ("blonski6", 155.03), ("dalbo1", -2.91)]
    )
    def test_table(self, name, expected):
        assert n_indicator(GAMES[name]) == pytest.approx(expected, abs=0.01)

    def test_quadrature_consistency(self, rng):
        for _ in range(20):
            p = random_pd(rng)
            assert rel(n_indicator(p), n_indicator_quadrature(p)) < 1e-8


class TestGammaStar:
    @pytest.mark.parametrize(
        "name, expected", [("blonski1", 0.685), ("blonski3", 0.785), ("dalbo3", 0.487)]
    )
    def test_table(self, name, expected):
        assert gamma_star(GAMES[name]) == pytest.approx(expected, abs=1e-3)

    def test_quarter_pi_when_numerator_vanishes(self):
        assert gamma_star(GAMES["blonski3"]) == pytest.approx(math.pi / 4, abs=1e-15)

    @pytest.mark.parametrize("name", sorted(GAMES))
    def test_is_root(self, name):
        p = GAMES[name]
        assert novel_function(p, gamma_star(p)) == pytest.approx(0.0, abs=1e-8)
        assert gamma_star_bisection(p) == pytest.approx(gamma_star(p), abs=1e-8)

    def test_sign_change(self, rng):
        for _ in range(50):
            p = random_pd(rng)
            try:
                gs = gamma_star(p)
            except NoRootError:
                continue
            for g in np.linspace(0, HALF_PI, 25):
                if g < gs - 1e-9:
                    assert novel_function(p, g) < 1e-9
                elif g > gs + 1e-9:
                    assert novel_function(p, g) > -1e-9

    def test_root_always_exists_for_valid_pd(self, rng):
        # b > c and d > a force N(0) < 0 < N(pi/2)
        for _ in range(200):
            p = random_pd(rng)
            assert novel_function(p, 0.0) < 0 < novel_function(p, HALF_PI)
            assert 0.0 <= gamma_star(p) <= HALF_PI

    def test_no_root_reported(self):
        # only reachable without the PD constraints, so bypass validation
        p = object.__new__(PayoffMatrix)
        for name, value in zip("abcd", (75.0, 90.0, 95.0, 70.0)):
            object.__setattr__(p, name, value)
        with pytest.raises(NoRootError) as err:
            gamma_star(p)
        assert err.value.sign == 1
        with pytest.raises(NoRootError):
            gamma_star_bisection(p)


class TestDiscountBounds:
    @pytest.mark.parametrize(
        "name, expected", [("blonski1", 0.5), ("blonski3", 0.667), ("dalbo3", 0.08)]
    )
    def test_delta_lower(self, name, expected):
        assert delta_lower(GAMES[name]) == pytest.approx(expected, abs=1e-3)

    @pytest.mark.parametrize(
        "name, expected", [("blonski2", 0.9), ("dalbo1", 0.816)]
    )
    def test_delta_star(self, name, expected):
        assert delta_star(GAMES[name]) == pytest.approx(expected, abs=1e-3)

    def test_delta_star_game6_formula(self):
        # printed payoffs (0, 140, 90, 30): (140 - 0 - 90 + 30) / 140
        assert delta_star(GAMES["blonski6"]) == pytest.approx(80 / 140, rel=1e-15)

    @pytest.mark.parametrize("name", sorted(GAMES))
    def test_lower_below_star(self, name):
        p = GAMES[name]
        assert 0 < delta_lower(p) < delta_star(p) < 1


class TestIndicatorSet:
    def test_blonski5(self, builtin_indicators):
        ind = builtin_indicators[("blonski", "5")]
        expected = (0.429, 0.667, 0.524, 0.702, 0.685, 77.52)
        for col, want in zip(IndicatorSet.COLUMNS, expected):
            tol = 0.01 if col == "n_value" else 1e-3
            assert getattr(ind, col) == pytest.approx(want, abs=tol), col

    def test_dalbo2(self, builtin_indicators):
        ind = builtin_indicators[("dalbo", "2")]
        assert ind.rounded() == {
            "delta_lower": 0.4, "delta_star": 0.605, "gamma2": 0.539,
            "gamma1": 0.625, "gamma_star": 0.64, "n_value": 35.85,
        }

    def test_blonski4(self, builtin_indicators):
        ind = builtin_indicators[("blonski", "4")]
        assert ind.n_value == 0.0
        assert ind.gamma_star == pytest.approx(0.785, abs=1e-3)
