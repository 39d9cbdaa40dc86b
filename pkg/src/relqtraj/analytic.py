"""Closed-form trajectory ensembles used as solver oracles.

Four families: boosted straight-line (quantum inertial) motion, the
exponential-weight ensemble at rest with a constant time-contraction rate,
and two hyperbolic families that solve the evolution equations exactly but
are singular (light-cone trajectories), so they are flagged non-viable and
serve only as sampled comparison data, never as initial conditions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .state import EnsembleState, SpatialGrid


def _broadcast4(t, x, u0, u1):
    t, x, u0, u1 = np.broadcast_arrays(
        np.asarray(t, dtype=float),
        np.asarray(x, dtype=float),
        np.asarray(u0, dtype=float),
        np.asarray(u1, dtype=float),
    )
    return t.copy(), x.copy(), u0.copy(), u1.copy()


@dataclass(frozen=True)
class AnalyticEnsemble:
    """A closed-form map (T, C) -> (t, x, u0, u1) plus metadata."""

    kind: str
    params: dict
    viable: bool
    evaluate: Callable


def inertial_ensemble(beta0: float, c: float) -> AnalyticEnsemble:
    """Uniformly boosted parallel straight lines; |beta0| < 1."""
    if not abs(beta0) < 1:
        raise ValueError(f"boost must satisfy |beta0| < 1, got {beta0}")
    G = 1.0 / math.sqrt(1.0 - beta0 ** 2)

    def evaluate(T, C):
        T = np.asarray(T, dtype=float)
        C = np.asarray(C, dtype=float)
        t = G * (T + beta0 * C / c)
        x = G * (C + beta0 * c * T)
        return _broadcast4(t, x, G * c, G * beta0 * c)

    return AnalyticEnsemble("inertial", {"beta0": beta0, "c": c}, True, evaluate)


def exponential_ensemble(kappa: float, mass: float, hbar: float, c: float) -> AnalyticEnsemble:
    """Rest-frame ensemble with exponential weight: x = C, t advances at the
    constant contraction rate exp[(1/2)(hbar kappa / m c)^2]."""
    rate = math.exp(0.5 * (hbar * kappa / (mass * c)) ** 2)

    def evaluate(T, C):
        T = np.asarray(T, dtype=float)
        C = np.asarray(C, dtype=float)
        return _broadcast4(rate * T, C, c, 0.0)

    return AnalyticEnsemble(
        "exponential", {"kappa": kappa, "mass": mass, "hbar": hbar, "c": c}, True, evaluate
    )


def exponential_time_rate(kappa: float, mass: float, hbar: float, c: float) -> float:
    """dt/dT for the exponential ensemble."""
    return math.exp(0.5 * (hbar * kappa / (mass * c)) ** 2)


def hyperbolic_gamma_one_ensemble(B: float, c: float) -> AnalyticEnsemble:
    """Constant-acceleration family with unit slice metric:
    t = (C/c) sinh(c B T), x = C cosh(c B T).  Singular at C = 0."""
    if B == 0:
        raise ValueError("B must be nonzero")

    def evaluate(T, C):
        T = np.asarray(T, dtype=float)
        C = np.asarray(C, dtype=float)
        if np.any(C == 0):
            raise ValueError("C = 0 is a singular point of this family")
        t = (C / c) * np.sinh(c * B * T)
        x = C * np.cosh(c * B * T)
        # dt/dT = B C cosh and dx/dT = c B C sinh give dtau/dT = B C, so
        # dividing the slice velocity by B C leaves the unit four-velocity:
        return _broadcast4(t, x, c * np.cosh(c * B * T), c * np.sinh(c * B * T))

    return AnalyticEnsemble("hyperbolic_gamma_one", {"B": B, "c": c}, False, evaluate)


def hyperbolic_gamma_one_Q(B: float, C, mass: float, c: float):
    """Closed-form quantum potential of the unit-metric hyperbolic family."""
    C = np.asarray(C, dtype=float)
    if np.any(B * C <= 0):
        raise ValueError("Q is defined where B*C > 0")
    return -mass * c ** 2 * np.log(B * C)


def hyperbolic_gamma_one_tau(B: float, C):
    """dtau/dT of the unit-metric hyperbolic family: B*C."""
    return B * np.asarray(C, dtype=float)


def hyperbolic_gamma_T_ensemble(A: float, c: float) -> AnalyticEnsemble:
    """Straight-line fan through the origin: t = T cosh(A C), x = c T sinh(A C).
    Slice metric c^2 A^2 T^2 is uniform in C; degenerate at T = 0."""
    if A == 0:
        raise ValueError("A must be nonzero")

    def evaluate(T, C):
        T = np.asarray(T, dtype=float)
        C = np.asarray(C, dtype=float)
        if np.any(T == 0):
            raise ValueError("T = 0 is a degenerate slice of this family")
        t = T * np.cosh(A * C)
        x = c * T * np.sinh(A * C)
        return _broadcast4(t, x, c * np.cosh(A * C), c * np.sinh(A * C))

    return AnalyticEnsemble("hyperbolic_gamma_T", {"A": A, "c": c}, False, evaluate)


def eval_inertial(beta0: float, T, C, c: float):
    return inertial_ensemble(beta0, c).evaluate(T, C)


def eval_exponential(kappa: float, T, C, mass: float, hbar: float, c: float):
    return exponential_ensemble(kappa, mass, hbar, c).evaluate(T, C)


def eval_hyperbolic_gamma_one(B: float, T, C, c: float):
    return hyperbolic_gamma_one_ensemble(B, c).evaluate(T, C)


def eval_hyperbolic_gamma_T(A: float, T, C, c: float):
    return hyperbolic_gamma_T_ensemble(A, c).evaluate(T, C)


def sample_state(ens: AnalyticEnsemble, grid: SpatialGrid, T: float) -> EnsembleState:
    """Sample a closed-form ensemble onto a grid as an EnsembleState."""
    t, x, u0, u1 = ens.evaluate(T, grid.nodes)
    return EnsembleState(float(T), t, x, u0, u1)
