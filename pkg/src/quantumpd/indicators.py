"""Cooperation indicators of a PD game.

Closed forms for the novel function, its gamma-integral and zero, and the two
classical discount-factor bounds. Each closed form has a numerical
counterpart (Gauss-Legendre quadrature, bisection) for cross-validation.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.optimize import bisect

from .equilibria import (
    DEFAULT_GRID,
    DEFAULT_NASH_TOL,
    DEFAULT_TOL_GAMMA,
    StrategyGrid,
    gamma1_barrier,
    gamma2_barrier,
)
from .qcore import (
    DEFECT,
    GAMMA_MAX,
    PHI_MAX,
    QUANTUM,
    THETA_MAX,
    PayoffMatrix,
    check_gamma,
    outcome_probabilities,
    strategy_matrix,
    strategy_stack,
)

QUAD_NODES_STRATEGY = 64
QUAD_NODES_GAMMA = 128
# arccos arguments this close outside [-1, 1] are rounding, not a missing root
_ARCCOS_SLACK = 1e-12


class NoRootError(ValueError):
    """The novel function has no zero on [0, pi/2]."""

    def __init__(self, sign: int, argument: float):
        self.sign = sign
        self.argument = argument
        super().__init__(
            f"N(gamma) has no zero on [0, pi/2] (arccos argument {argument:.6g}); "
            f"N(gamma) is {'positive' if sign > 0 else 'negative'} throughout"
        )


def _as_payoff(payoff) -> PayoffMatrix:
    return payoff if isinstance(payoff, PayoffMatrix) else PayoffMatrix(*payoff)


def novel_function(payoff: PayoffMatrix, gamma) -> float:
    """Closed-form N(gamma)."""
    payoff = _as_payoff(payoff)
    gamma = check_gamma(gamma)
    a, b, c, d = payoff.as_tuple()
    c2 = math.cos(2 * gamma)
    return math.pi**2 / 16 * ((1 + 3 * c2) * (a - b) + (5 - c2) * (c - d))


def _gauss_legendre(n, lo, hi):
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1), half * w


def novel_function_quadrature(payoff: PayoffMatrix, gamma, nodes: int = QUAD_NODES_STRATEGY) -> float:
    """N(gamma) as the double integral of the Nash-gap difference.

    Integrand at player A's strategy U:
    [$A(Q,Q) - $A(U,Q)] - [$A(D,D) - $A(U,D)], over [0, pi] x [0, pi/2].
    """
    payoff = _as_payoff(payoff)
    gamma = check_gamma(gamma)
    t, wt = _gauss_legendre(nodes, 0.0, THETA_MAX)
    p, wp = _gauss_legendre(nodes, 0.0, PHI_MAX)
    tt, pp = np.meshgrid(t, p, indexing="ij")
    weights = np.outer(wt, wp)
    devs = strategy_stack(tt, pp)
    pay_a = payoff.weights("A")

    def gap(star):
        star_u = strategy_matrix(star)
        at_star = outcome_probabilities(star_u, star_u, gamma) @ pay_a
        deviated = outcome_probabilities(devs, star_u, gamma) @ pay_a
        return at_star - deviated

    return float(np.sum(weights * (gap(QUANTUM) - gap(DEFECT))))


def n_indicator(payoff: PayoffMatrix) -> float:
    """Integral of N(gamma) over [0, pi/2], closed form."""
    a, b, c, d = _as_payoff(payoff).as_tuple()
    return math.pi**3 / 32 * (a - b + 5 * (c - d))


def n_indicator_quadrature(payoff: PayoffMatrix, nodes: int = QUAD_NODES_GAMMA) -> float:
    payoff = _as_payoff(payoff)
    g, w = _gauss_legendre(nodes, 0.0, GAMMA_MAX)
    return float(sum(wi * novel_function(payoff, gi) for gi, wi in zip(g, w)))


def _gamma_star_argument(payoff: PayoffMatrix) -> float:
    a, b, c, d = payoff.as_tuple()
    return (a - b + 5 * (c - d)) / (3 * (a - b) - c + d)


def gamma_star(payoff: PayoffMatrix) -> float:
    """Zero of N(gamma) on [0, pi/2]; raises NoRootError when there is none."""
    payoff = _as_payoff(payoff)
    arg = _gamma_star_argument(payoff)
    if abs(arg) > 1 + _ARCCOS_SLACK:
        raise NoRootError(1 if novel_function(payoff, 0.0) > 0 else -1, arg)
    arg = min(1.0, max(-1.0, arg))
    return math.pi / 2 - 0.5 * math.acos(arg)


def gamma_star_bisection(payoff: PayoffMatrix, xtol: float = 1e-13) -> float:
    """Zero of N(gamma) by bisection on the closed form."""
    payoff = _as_payoff(payoff)
    lo, hi = novel_function(payoff, 0.0), novel_function(payoff, GAMMA_MAX)
    if lo == 0.0:
        return 0.0
    if hi == 0.0:
        return GAMMA_MAX
    if lo * hi > 0:
        raise NoRootError(1 if lo > 0 else -1, _gamma_star_argument(payoff))
    return bisect(lambda g: novel_function(payoff, g), 0.0, GAMMA_MAX, xtol=xtol, maxiter=200)


def delta_lower(payoff: PayoffMatrix) -> float:
    """Standard lower bound on the discount factor, (b - c) / (b - d)."""
    a, b, c, d = _as_payoff(payoff).as_tuple()
    return (b - c) / (b - d)


def delta_star(payoff: PayoffMatrix) -> float:
    """Discount-factor bound that accounts for the sucker's payoff."""
    a, b, c, d = _as_payoff(payoff).as_tuple()
    return (b - a - c + d) / (b - a)


@dataclass(frozen=True)
class IndicatorSet:
    delta_lower: float
    delta_star: float
    gamma2: float
    gamma1: float
    gamma_star: Optional[float]
    n_value: float
    gamma1_found: bool = True
    gamma2_found: bool = True
    # sign of N(gamma) on the whole interval when gamma_star is None
    gamma_star_sign: Optional[int] = None

    COLUMNS = ("delta_lower", "delta_star", "gamma2", "gamma1", "gamma_star", "n_value")

    def as_dict(self) -> dict:
        return asdict(self)

    def rounded(self) -> dict:
        out = {}
        for name in self.COLUMNS:
            value = getattr(self, name)
            out[name] = None if value is None else round(value, 2 if name == "n_value" else 3)
        return out


def indicator_set(
    payoff: PayoffMatrix,
    grid: StrategyGrid = DEFAULT_GRID,
    tol_gamma: float = DEFAULT_TOL_GAMMA,
    tol: float = DEFAULT_NASH_TOL,
) -> IndicatorSet:
    payoff = _as_payoff(payoff)
    g1 = gamma1_barrier(payoff, grid, tol_gamma, tol)
    g2 = gamma2_barrier(payoff, grid, tol_gamma, tol)
    try:
        gs, sign = gamma_star(payoff), None
    except NoRootError as exc:
        gs, sign = None, exc.sign
    return IndicatorSet(
        delta_lower=delta_lower(payoff),
        delta_star=delta_star(payoff),
        gamma2=g2.gamma,
        gamma1=g1.gamma,
        gamma_star=gs,
        n_value=n_indicator(payoff),
        gamma1_found=g1.found,
        gamma2_found=g2.found,
        gamma_star_sign=sign,
    )
