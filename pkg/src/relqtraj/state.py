"""Core data model: label grids, trajectory weights, ensemble states, run config.

The weight function f(C) is carried in closed form through ln f and
d ln f / dC.  The quantum potential depends on f only through logarithmic
derivatives of f^(1/2), so the log form sidesteps underflow in the far
tails and makes the dynamics exactly independent of any normalization
constant of f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

UNIFORMITY_TOL = 1e-12  # relative node-spacing wobble tolerated in a grid
MIN_POINTS = 9          # widest stencil pair (two nested 5-point windows)


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid of trajectory labels C."""

    c_min: float
    c_max: float
    n_points: int
    nodes: np.ndarray

    def __post_init__(self):
        if not (math.isfinite(self.c_min) and math.isfinite(self.c_max)):
            raise ValueError("grid bounds must be finite")
        if self.n_points < MIN_POINTS:
            raise ValueError(f"n_points must be >= {MIN_POINTS}, got {self.n_points}")
        if self.c_max <= self.c_min:
            raise ValueError("c_max must exceed c_min")
        d = np.diff(self.nodes)
        if np.any(d <= 0):
            raise ValueError("grid nodes must be strictly increasing")
        h = (self.c_max - self.c_min) / (self.n_points - 1)
        if np.max(np.abs(d - h)) > UNIFORMITY_TOL * max(abs(h), 1.0):
            raise ValueError("grid nodes must be uniformly spaced")
        self.nodes.setflags(write=False)

    @property
    def spacing(self) -> float:
        return (self.c_max - self.c_min) / (self.n_points - 1)


def make_grid(c_min: float, c_max: float, n_points: int) -> SpatialGrid:
    c_min, c_max, n_points = float(c_min), float(c_max), int(n_points)
    if not (math.isfinite(c_min) and math.isfinite(c_max)):
        raise ValueError("grid bounds must be finite")
    nodes = np.linspace(c_min, c_max, n_points)
    return SpatialGrid(c_min, c_max, n_points, nodes)


@dataclass(frozen=True)
class WeightFunction:
    """Per-trajectory probability weight f(C), held as ln f and its C-derivative.

    ``kind`` is one of "gaussian", "exponential", "uniform" for the built-in
    families; diagnostic code may construct instances with other callables.
    """

    kind: str
    log_f: Callable[[np.ndarray], np.ndarray]
    dlog_f: Callable[[np.ndarray], np.ndarray]
    params: tuple = ()

    def __call__(self, C):
        return np.exp(self.log_f(np.asarray(C, dtype=float)))


def gaussian_weight(a: float) -> WeightFunction:
    """f(C) = exp(-a C^2), unnormalized."""
    if not (a > 0 and math.isfinite(a)):
        raise ValueError("gaussian width parameter must be positive and finite")
    return WeightFunction(
        kind="gaussian",
        log_f=lambda C: -a * np.asarray(C, dtype=float) ** 2,
        dlog_f=lambda C: -2.0 * a * np.asarray(C, dtype=float),
        params=(a,),
    )


def exponential_weight(kappa: float) -> WeightFunction:
    """f(C) = exp(-2 kappa C)."""
    if not math.isfinite(kappa):
        raise ValueError("kappa must be finite")
    return WeightFunction(
        kind="exponential",
        log_f=lambda C: -2.0 * kappa * np.asarray(C, dtype=float),
        dlog_f=lambda C: np.full_like(np.asarray(C, dtype=float), -2.0 * kappa),
        params=(kappa,),
    )


def uniform_weight() -> WeightFunction:
    """f(C) = 1."""
    return WeightFunction(
        kind="uniform",
        log_f=lambda C: np.zeros_like(np.asarray(C, dtype=float)),
        dlog_f=lambda C: np.zeros_like(np.asarray(C, dtype=float)),
        params=(),
    )


def weight_log_derivative(w: WeightFunction, C):
    """d ln f / dC, evaluated in closed form (never by differencing f)."""
    C = np.asarray(C, dtype=float)
    if not np.all(np.isfinite(C)):
        raise ValueError("C must be finite")
    return w.dlog_f(C)


class StateValidationError(ValueError):
    """An ensemble state violates a structural invariant."""


@dataclass(frozen=True)
class EnsembleState:
    """Per-node trajectory data on one simultaneity submanifold.

    tau_ensemble is the ensemble proper time T of the slice; t, x are
    inertial coordinates of each trajectory; u0, u1 the four-velocity
    components for x^alpha = (c t, x).
    """

    tau_ensemble: float
    t: np.ndarray
    x: np.ndarray
    u0: np.ndarray
    u1: np.ndarray

    def __post_init__(self):
        n = self.t.shape[0]
        for name in ("t", "x", "u0", "u1"):
            arr = getattr(self, name)
            if arr.shape != (n,):
                raise StateValidationError(f"field {name} has shape {arr.shape}, want ({n},)")
            if not np.all(np.isfinite(arr)):
                raise StateValidationError(f"non-finite values in field {name}")
            arr.setflags(write=False)  # states are immutable value data
        if np.any(self.u0 <= 0):
            raise StateValidationError("u0 must be positive (forward-in-time propagation)")
        if np.any(np.diff(self.x) <= 0):
            k = int(np.argmin(np.diff(self.x)))
            raise StateValidationError(
                f"trajectory ordering lost between nodes {k} and {k + 1} "
                f"(x = {self.x[k]:.6g}, {self.x[k + 1]:.6g}): ensemble degeneration"
            )

    @property
    def n_points(self) -> int:
        return self.t.shape[0]

    def norm_violation(self, c: float) -> np.ndarray:
        """|eta_ab U^a U^b + c^2| / c^2 per node."""
        return np.abs(-self.u0 ** 2 + self.u1 ** 2 + c ** 2) / c ** 2


def validate_state(state: EnsembleState, grid: SpatialGrid, c: float, norm_tol: float) -> None:
    """Check grid length and four-velocity normalization at a diagnostic tolerance."""
    if state.n_points != grid.n_points:
        raise StateValidationError(
            f"state has {state.n_points} nodes, grid has {grid.n_points}"
        )
    worst = float(np.max(state.norm_violation(c)))
    if worst > norm_tol:
        k = int(np.argmax(state.norm_violation(c)))
        raise StateValidationError(
            f"four-velocity normalization off by {worst:.3e} (> {norm_tol:.1e}) "
            f"at node {k}, T = {state.tau_ensemble:.6g}"
        )


@dataclass(frozen=True)
class SimConfig:
    """Physical constants, grid, integrator step and tolerances for one run."""

    mass: float
    hbar: float
    c: float
    weight: WeightFunction
    grid: SpatialGrid
    t_final: float
    dt: float
    stencil_order: int = 4
    residual_tol: float = 1e-5
    invariant_tol: float = 1e-8
    interp_tol: float = 1e-5

    def __post_init__(self):
        for name in ("mass", "hbar", "c", "dt"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v}")
        if not (self.t_final >= 0 and math.isfinite(self.t_final)):
            raise ValueError(f"t_final must be nonnegative and finite, got {self.t_final}")
        if self.stencil_order not in (2, 4):
            raise ValueError(f"stencil_order must be 2 or 4, got {self.stencil_order}")
        for name in ("residual_tol", "invariant_tol", "interp_tol"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v}")
