"""Eisert two-player protocol for prisoner's-dilemma games.

Basis ordering is (|CC>, |CD>, |DC>, |DD>) with player A on the left
(most significant) tensor factor. The mixed outcomes carry a minus sign,
``|CD> = (0, -1, 0, 0)`` and ``|DC> = (0, 0, -1, 0)``; probabilities do not
depend on it but amplitude projections do.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

UNITARY_TOL = 1e-12
NORM_TOL = 1e-10

GAMMA_MAX = math.pi / 2
THETA_MAX = math.pi
PHI_MAX = math.pi / 2


class ParameterRangeError(ValueError):
    """An angle lies outside its allowed interval."""


class ConstraintError(ValueError):
    """Payoff parameters do not describe a prisoner's dilemma."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(f"{v} violated" for v in self.violations))


class InvalidStateError(ValueError):
    """A state vector is not normalized."""


@dataclass(frozen=True)
class PayoffMatrix:
    """Symmetric PD payoffs: a sucker, b temptation, c reward, d punishment."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, float(getattr(self, name)))
        problems = self.violations(self.a, self.b, self.c, self.d)
        if problems:
            raise ConstraintError(problems)

    @staticmethod
    def violations(a, b, c, d) -> list[str]:
        """Return the PD inequalities that (a, b, c, d) breaks, in canonical order."""
        out = []
        if not b > c:
            out.append("b > c")
        if not c > d:
            out.append("c > d")
        if not d > a:
            out.append("d > a")
        if not 2 * c > a + b:
            out.append("2c > a + b")
        return out

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    def weights(self, player: str = "A") -> np.ndarray:
        """Payoff weights over (P_CC, P_CD, P_DC, P_DD) for one player."""
        if player == "A":
            return np.array([self.c, self.a, self.b, self.d])
        if player == "B":
            return np.array([self.c, self.b, self.a, self.d])
        raise ValueError(f"unknown player {player!r}")


@dataclass(frozen=True)
class StrategyParams:
    theta: float
    phi: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "phi", float(self.phi))
        if not 0.0 <= self.theta <= THETA_MAX:
            raise ParameterRangeError(f"theta={self.theta!r} outside [0, pi]")
        if not 0.0 <= self.phi <= PHI_MAX:
            raise ParameterRangeError(f"phi={self.phi!r} outside [0, pi/2]")


COOPERATE = StrategyParams(0.0, 0.0)
DEFECT = StrategyParams(math.pi, 0.0)
QUANTUM = StrategyParams(0.0, math.pi / 2)

NAMED_STRATEGIES = {"C": COOPERATE, "D": DEFECT, "Q": QUANTUM}


class OutcomeDistribution(NamedTuple):
    p_cc: float
    p_cd: float
    p_dc: float
    p_dd: float

    @classmethod
    def from_array(cls, probs) -> "OutcomeDistribution":
        probs = np.asarray(probs, dtype=float)
        if probs.shape != (4,):
            raise ValueError("expected four outcome probabilities")
        if np.any(probs < -NORM_TOL) or np.any(probs > 1 + NORM_TOL):
            raise ValueError(f"probabilities outside [0, 1]: {probs}")
        if abs(probs.sum() - 1.0) > NORM_TOL:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        return cls(*(float(p) for p in np.clip(probs, 0.0, 1.0)))


class PayoffPair(NamedTuple):
    payoff_a: float
    payoff_b: float

    def swapped(self) -> "PayoffPair":
        return PayoffPair(self.payoff_b, self.payoff_a)


class QuantumState:
    """Normalized two-qubit pure state; the amplitude array is read-only."""

    __slots__ = ("_amplitudes",)

    def __init__(self, amplitudes):
        amps = np.array(amplitudes, dtype=complex)
        if amps.shape != (4,):
            raise InvalidStateError("a two-player state has four amplitudes")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidStateError(f"state norm {norm!r} differs from 1")
        amps.setflags(write=False)
        self._amplitudes = amps

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amplitudes

    def __repr__(self):
        return f"QuantumState({self._amplitudes!r})"


# Signed computational basis, rows in outcome order CC, CD, DC, DD.
BASIS = np.array(
    [
        [1, 0, 0, 0],
        [0, -1, 0, 0],
        [0, 0, -1, 0],
        [0, 0, 0, 1],
    ],
    dtype=complex,
)
KET_CC = BASIS[0]


def check_gamma(gamma) -> float:
    gamma = float(gamma)
    if not 0.0 <= gamma <= GAMMA_MAX:
        raise ParameterRangeError(f"gamma={gamma!r} outside [0, pi/2]")
    return gamma


def strategy_matrix(params: StrategyParams) -> np.ndarray:
    """Two-parameter strategy unitary U(theta, phi)."""
    if not isinstance(params, StrategyParams):
        params = StrategyParams(*params)
    ct = math.cos(params.theta / 2)
    st = math.sin(params.theta / 2)
    ep = complex(math.cos(params.phi), math.sin(params.phi))
    return np.array([[ep * ct, st], [-st, ep.conjugate() * ct]], dtype=complex)


def entangler(gamma) -> np.ndarray:
    """Entangling gate J = exp(i gamma/2 D(x)D) written out explicitly."""
    gamma = check_gamma(gamma)
    c = math.cos(gamma / 2)
    s = 1j * math.sin(gamma / 2)
    return np.array(
        [
            [c, 0, 0, s],
            [0, c, -s, 0],
            [0, -s, c, 0],
            [s, 0, 0, c],
        ],
        dtype=complex,
    )


def initial_state(gamma) -> QuantumState:
    return QuantumState(entangler(gamma) @ KET_CC)


def final_state(ua: StrategyParams, ub: StrategyParams, gamma) -> QuantumState:
    """State before measurement, J^dagger (U_A x U_B) J |CC>."""
    j = entangler(gamma)
    local = np.kron(strategy_matrix(ua), strategy_matrix(ub))
    return QuantumState(j.conj().T @ local @ j @ KET_CC)


def outcome_distribution(state: QuantumState) -> OutcomeDistribution:
    if not isinstance(state, QuantumState):
        state = QuantumState(state)
    overlaps = BASIS.conj() @ state.amplitudes
    return OutcomeDistribution.from_array(np.abs(overlaps) ** 2)


def expected_payoffs(payoff: PayoffMatrix, dist: OutcomeDistribution) -> PayoffPair:
    p = np.asarray(dist, dtype=float)
    return PayoffPair(float(p @ payoff.weights("A")), float(p @ payoff.weights("B")))


def game_payoff(payoff: PayoffMatrix, ua: StrategyParams, ub: StrategyParams, gamma) -> PayoffPair:
    return expected_payoffs(payoff, outcome_distribution(final_state(ua, ub, gamma)))


# Batched evaluation used by the equilibrium search and quadrature.


def strategy_stack(theta, phi) -> np.ndarray:
    """Stack of strategy unitaries with shape ``theta.shape + (2, 2)``.

    No domain check; callers pass arrays already confined to the domain.
    """
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    ct = np.cos(theta / 2)
    st = np.sin(theta / 2)
    ep = np.exp(1j * phi)
    out = np.empty(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = ep * ct
    out[..., 0, 1] = st
    out[..., 1, 0] = -st
    out[..., 1, 1] = np.conj(ep) * ct
    return out


def outcome_probabilities(ua_stack, ub_stack, gamma) -> np.ndarray:
    """Outcome probabilities for broadcastable stacks of strategy unitaries.

    Uses (U_A x U_B) vec(M) = vec(U_A M U_B^T) on the 2x2 reshaping of the
    initial state, so no 4x4 Kronecker products are formed.
    """
    gamma = check_gamma(gamma)
    psi0 = np.array(
        [[math.cos(gamma / 2), 0.0], [0.0, 1j * math.sin(gamma / 2)]], dtype=complex
    )
    ua_stack = np.asarray(ua_stack)
    ub_stack = np.asarray(ub_stack)
    mid = ua_stack @ psi0 @ np.swapaxes(ub_stack, -1, -2)
    vec = mid.reshape(mid.shape[:-2] + (4,))
    # row-wise J^dagger @ v, i.e. v @ conj(J)
    psi_f = vec @ entangler(gamma).conj()
    return np.abs(psi_f) ** 2
