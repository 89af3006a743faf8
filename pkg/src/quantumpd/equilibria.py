"""Best responses, Nash/dominance certificates and entanglement barriers.

Deviations range over the two-parameter strategy set only. A best response
is a grid scan followed by bounded Nelder-Mead refinement from the best few
grid cells.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .qcore import (
    DEFECT,
    GAMMA_MAX,
    PHI_MAX,
    QUANTUM,
    THETA_MAX,
    PayoffMatrix,
    StrategyParams,
    check_gamma,
    outcome_probabilities,
    strategy_matrix,
    strategy_stack,
)

DEFAULT_NASH_TOL = 1e-6
DEFAULT_TOL_GAMMA = 1e-5
GUARD_POINTS = 64
REFINE_STARTS = 3


class BarrierError(RuntimeError):
    """Nash status is not single-crossing in gamma, so bisection is unsafe."""


@dataclass(frozen=True)
class StrategyGrid:
    """Uniform (theta, phi) grid over [0, pi] x [0, pi/2], endpoints included."""

    n_theta: int = 181
    n_phi: int = 91

    def __post_init__(self):
        if self.n_theta < 2 or self.n_phi < 2:
            raise ValueError("grid needs at least two points per axis")

    @classmethod
    def parse(cls, spec: str) -> "StrategyGrid":
        """Build from ``"181x91"``."""
        try:
            n_theta, n_phi = (int(part) for part in spec.lower().split("x"))
        except ValueError:
            raise ValueError(f"grid must look like 181x91, got {spec!r}") from None
        return cls(n_theta, n_phi)

    @cached_property
    def thetas(self) -> np.ndarray:
        return np.linspace(0.0, THETA_MAX, self.n_theta)

    @cached_property
    def phis(self) -> np.ndarray:
        return np.linspace(0.0, PHI_MAX, self.n_phi)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        # theta-major so argmax ties resolve to lowest theta, then phi
        t, p = np.meshgrid(self.thetas, self.phis, indexing="ij")
        return t.ravel(), p.ravel()

    @cached_property
    def unitaries(self) -> np.ndarray:
        return strategy_stack(*self.mesh)

    @property
    def points(self) -> list[StrategyParams]:
        return [StrategyParams(t, p) for t, p in zip(*self.mesh)]

    def __len__(self):
        return self.n_theta * self.n_phi


DEFAULT_GRID = StrategyGrid()


@dataclass(frozen=True)
class EquilibriumCertificate:
    """Outcome of a Nash or dominance test.

    ``epsilon`` is the largest unilateral gain found over both players;
    ``holds`` is ``epsilon <= tol``.
    """

    profile: tuple[StrategyParams, StrategyParams]
    kind: str
    epsilon: float
    gamma: float
    holds: bool
    player_epsilons: tuple[float, float]
    deviations: tuple[StrategyParams, StrategyParams]


@dataclass(frozen=True)
class Barrier:
    """Entanglement threshold; ``found`` is False when no crossing exists (gamma is pi/2 then)."""

    gamma: float
    found: bool

    def __float__(self):
        return self.gamma


def _responder_payoffs(payoff: PayoffMatrix, fixed: StrategyParams, gamma, responder, stack):
    fixed_u = strategy_matrix(fixed)
    if responder == "A":
        probs = outcome_probabilities(stack, fixed_u, gamma)
    else:
        probs = outcome_probabilities(fixed_u, stack, gamma)
    return probs @ payoff.weights(responder)


def _refine(objective, start):
    res = minimize(
        lambda x: -objective(x[0], x[1]),
        np.asarray(start, dtype=float),
        method="Nelder-Mead",
        bounds=[(0.0, THETA_MAX), (0.0, PHI_MAX)],
        options={"xatol": 1e-10, "fatol": 1e-10, "maxiter": 2000},
    )
    x = np.clip(res.x, [0.0, 0.0], [THETA_MAX, PHI_MAX])
    return x, objective(x[0], x[1])


def best_response(
    payoff: PayoffMatrix,
    opponent: StrategyParams,
    gamma,
    grid: StrategyGrid = DEFAULT_GRID,
    responder: str = "A",
) -> tuple[StrategyParams, float]:
    """Deviation maximizing the responder's payoff against a fixed opponent.

    Returns ``(strategy, payoff)``. The grid maximum is kept unless the
    refinement beats it by more than 1e-12, so ties stay at the lowest
    (theta, phi) grid point.
    """
    gamma = check_gamma(gamma)
    values = _responder_payoffs(payoff, opponent, gamma, responder, grid.unitaries)
    thetas, phis = grid.mesh
    best = int(np.argmax(values))
    best_x = np.array([thetas[best], phis[best]])
    best_val = float(values[best])

    def objective(t, p):
        u = strategy_stack(t, p)
        return float(_responder_payoffs(payoff, opponent, gamma, responder, u))

    # stable sort keeps the lowest-index cell first among equal values
    starts = np.argsort(-values, kind="stable")[:REFINE_STARTS]
    for idx in starts:
        x, val = _refine(objective, (thetas[idx], phis[idx]))
        if val > best_val + 1e-12:
            best_x, best_val = x, val
    return StrategyParams(*best_x), best_val


def _player_gain(payoff, profile, gamma, grid, responder):
    own, other = (profile[0], profile[1]) if responder == "A" else (profile[1], profile[0])
    dev, dev_val = best_response(payoff, other, gamma, grid, responder)
    current = float(
        _responder_payoffs(payoff, other, gamma, responder, strategy_matrix(own))
    )
    return dev_val - current, dev


def is_nash(
    payoff: PayoffMatrix,
    profile: tuple[StrategyParams, StrategyParams],
    gamma,
    grid: StrategyGrid = DEFAULT_GRID,
    tol: float = DEFAULT_NASH_TOL,
) -> EquilibriumCertificate:
    """Certify a profile as a Nash equilibrium up to ``tol`` game units.

    For a symmetric profile player B's problem mirrors player A's (the game
    is symmetric), so only one best response is computed.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    gamma = check_gamma(gamma)
    gain_a, dev_a = _player_gain(payoff, profile, gamma, grid, "A")
    if profile[0] == profile[1]:
        gain_b, dev_b = gain_a, dev_a
    else:
        gain_b, dev_b = _player_gain(payoff, profile, gamma, grid, "B")
    eps = max(gain_a, gain_b)
    return EquilibriumCertificate(
        profile=tuple(profile),
        kind="nash",
        epsilon=eps,
        gamma=gamma,
        holds=eps <= tol,
        player_epsilons=(gain_a, gain_b),
        deviations=(dev_a, dev_b),
    )


def is_dominant(
    payoff: PayoffMatrix,
    profile: tuple[StrategyParams, StrategyParams],
    gamma,
    grid: StrategyGrid = DEFAULT_GRID,
    tol: float = DEFAULT_NASH_TOL,
    opponent_grid: Optional[StrategyGrid] = None,
) -> EquilibriumCertificate:
    """Check that each player's strategy is a best response to every opponent strategy.

    Opponents are sampled on ``opponent_grid`` (19x10 by default); the
    certificate is only as strong as that sampling.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    gamma = check_gamma(gamma)
    opponent_grid = opponent_grid or StrategyGrid(19, 10)
    gains = []
    worst = []
    for responder, own in (("A", profile[0]), ("B", profile[1])):
        own_u = strategy_matrix(own)
        worst_gain, worst_opp = -math.inf, None
        for opp in opponent_grid.points:
            _, dev_val = best_response(payoff, opp, gamma, grid, responder)
            cur = float(_responder_payoffs(payoff, opp, gamma, responder, own_u))
            if dev_val - cur > worst_gain:
                worst_gain, worst_opp = dev_val - cur, opp
        gains.append(worst_gain)
        worst.append(worst_opp)
    eps = max(gains)
    return EquilibriumCertificate(
        profile=tuple(profile),
        kind="dominant",
        epsilon=eps,
        gamma=gamma,
        holds=eps <= tol,
        player_epsilons=tuple(gains),
        deviations=tuple(worst),
    )


def nash_scan(payoff, strategies, gamma, grid=DEFAULT_GRID, tol=DEFAULT_NASH_TOL):
    """Nash certificates for every ordered pair drawn from a dict of named strategies."""
    out = {}
    for name_a, ua in strategies.items():
        for name_b, ub in strategies.items():
            out[(name_a, name_b)] = is_nash(payoff, (ua, ub), gamma, grid, tol)
    return out


def _locate_barrier(status, tol_gamma, guard_points):
    """Find where the boolean ``status(gamma)`` first flips on [0, pi/2].

    A guard scan checks for a single crossing before bisecting inside the
    bracketing guard interval.
    """
    if tol_gamma <= 0:
        raise ValueError("tol_gamma must be positive")
    gammas = np.linspace(0.0, GAMMA_MAX, guard_points)
    flags = [status(g) for g in gammas]
    flips = [i for i in range(1, len(flags)) if flags[i] != flags[i - 1]]
    if len(flips) > 1:
        where = ", ".join(f"{gammas[i]:.4f}" for i in flips)
        raise BarrierError(f"Nash status changes {len(flips)} times (near gamma = {where})")
    if not flips:
        return Barrier(GAMMA_MAX, False)
    lo, hi = float(gammas[flips[0] - 1]), float(gammas[flips[0]])
    start = flags[0]
    while hi - lo > tol_gamma:
        mid = 0.5 * (lo + hi)
        if status(mid) == start:
            lo = mid
        else:
            hi = mid
    return Barrier(0.5 * (lo + hi), True)


def gamma1_barrier(
    payoff: PayoffMatrix,
    grid: StrategyGrid = DEFAULT_GRID,
    tol_gamma: float = DEFAULT_TOL_GAMMA,
    tol: float = DEFAULT_NASH_TOL,
    guard_points: int = GUARD_POINTS,
) -> Barrier:
    """Smallest gamma at which mutual defection stops being a Nash equilibrium."""
    if not isinstance(payoff, PayoffMatrix):
        payoff = PayoffMatrix(*payoff)
    profile = (DEFECT, DEFECT)

    def status(g):
        return is_nash(payoff, profile, g, grid, tol).holds

    if not status(0.0):
        raise BarrierError("(D, D) is not an equilibrium of the unentangled game")
    return _locate_barrier(status, tol_gamma, guard_points)


def gamma2_barrier(
    payoff: PayoffMatrix,
    grid: StrategyGrid = DEFAULT_GRID,
    tol_gamma: float = DEFAULT_TOL_GAMMA,
    tol: float = DEFAULT_NASH_TOL,
    guard_points: int = GUARD_POINTS,
) -> Barrier:
    """Smallest gamma at which (Q, Q) becomes a Nash equilibrium."""
    if not isinstance(payoff, PayoffMatrix):
        payoff = PayoffMatrix(*payoff)
    profile = (QUANTUM, QUANTUM)

    def status(g):
        return is_nash(payoff, profile, g, grid, tol).holds

    if status(0.0):
        raise BarrierError("(Q, Q) is already an equilibrium of the unentangled game")
    return _locate_barrier(status, tol_gamma, guard_points)
