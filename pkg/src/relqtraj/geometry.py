"""Metric quantities of the co-moving ensemble frame.

On each constant-T slice the induced spatial metric reduces to the scalar
gamma = x_C^2 - c^2 t_C^2, which must stay positive for the slice to remain
spacelike.  The time-space block g01 = eta_ab x^a_T x^b_C vanishes for an
orthogonal trajectory/slice foliation; it is monitored as a residual, never
projected away, so drift stays visible as a correctness signal.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .state import EnsembleState, SpatialGrid
from .stencils import StencilPlan, d_dC


class GeometryError(RuntimeError):
    """Degenerate slice geometry (gamma <= 0): trajectories are colliding."""


@dataclass(frozen=True)
class GeometryFields:
    t_C: np.ndarray
    x_C: np.ndarray
    gamma: np.ndarray
    g01_residual: Optional[np.ndarray] = None


def compute_geometry(
    state: EnsembleState,
    grid: SpatialGrid,
    plan: StencilPlan,
    c: float,
    tau_T: Optional[np.ndarray] = None,
) -> GeometryFields:
    """Slice derivatives and spatial metric for one ensemble state.

    The g01 residual needs the proper-time rate tau_T, which itself derives
    from the quantum potential computed *from* this geometry; callers supply
    it afterwards (see attach_g01) to keep the pipeline acyclic.
    """
    t_C = d_dC(state.t, grid, plan)
    x_C = d_dC(state.x, grid, plan)
    gamma = x_C ** 2 - c ** 2 * t_C ** 2
    if np.any(gamma <= 0) or not np.all(np.isfinite(gamma)):
        k = int(np.argmin(gamma))
        raise GeometryError(
            f"non-positive spatial metric gamma = {gamma[k]:.6g} at node {k} "
            f"(T = {state.tau_ensemble:.6g}): slice is no longer spacelike"
        )
    geom = GeometryFields(t_C=t_C, x_C=x_C, gamma=gamma)
    if tau_T is not None:
        geom = attach_g01(geom, state, tau_T, c)
    return geom


def attach_g01(
    geom: GeometryFields, state: EnsembleState, tau_T: np.ndarray, c: float
) -> GeometryFields:
    """Fill in the time-space metric residual eta_ab x^a_T x^b_C.

    Uses x^0_T = tau_T u0 and x^1_T = tau_T u1 from the evolution equations.
    """
    t_T = tau_T * state.u0 / c
    x_T = tau_T * state.u1
    g01 = -c ** 2 * t_T * geom.t_C + x_T * geom.x_C
    return replace(geom, g01_residual=g01)


def g00_from_tau(tau_T: np.ndarray) -> np.ndarray:
    """Time-time metric component in ensemble coordinates: g00 = -(dtau/dT)^2."""
    tau_T = np.asarray(tau_T, dtype=float)
    if np.any(tau_T <= 0) or not np.all(np.isfinite(tau_T)):
        raise ValueError("tau_T must be positive and finite")
    return -(tau_T ** 2)
