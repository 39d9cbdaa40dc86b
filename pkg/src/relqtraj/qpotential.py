"""Quantum potential of a trajectory ensemble, evaluated in log space.

The operator is

    Q = -(hbar^2 / 2m) * (gamma^(-1/4) f^(-1/2))
        * d_dC[ gamma^(-1/2) * d_dC( f^(1/2) gamma^(-1/4) ) ]

With A = f^(1/2) gamma^(-1/4) and L = ln A = (ln f)/2 - (ln gamma)/4 the
same quantity expands to

    Q = -(hbar^2 / 2m) * [ gamma^(-1/2) * (gamma^(-1/2))' * L'
                           + gamma^(-1) * (L'^2 + L'') ]

which is how it is computed here: the weight enters only through its exact
log-derivative, so a constant rescaling of f leaves Q bitwise unchanged, and
weights that are tiny at the grid edges never underflow.  Both second
derivatives arise as two successive stencil applications.
"""

from __future__ import annotations

import numpy as np

from .state import SpatialGrid
from .stencils import StencilPlan, d_dC


def log_form_Q(
    dlogf: np.ndarray,
    gamma: np.ndarray,
    grid: SpatialGrid,
    plan: StencilPlan,
    hbar: float,
    mass: float,
) -> np.ndarray:
    """Quantum potential from the closed-form weight log-derivative and the
    (numerically computed) spatial metric gamma on the slice."""
    if np.any(gamma <= 0):
        raise ValueError("gamma must be positive")
    ln_gamma = np.log(gamma)
    Lp = 0.5 * dlogf - 0.25 * d_dC(ln_gamma, grid, plan)
    Lpp = d_dC(Lp, grid, plan)
    inv_sqrt_gamma = gamma ** -0.5
    Gp = d_dC(inv_sqrt_gamma, grid, plan)
    Q = -(hbar ** 2 / (2.0 * mass)) * (
        inv_sqrt_gamma * Gp * Lp + (Lp ** 2 + Lpp) / gamma
    )
    if not np.all(np.isfinite(Q)):
        raise FloatingPointError("non-finite quantum potential")
    return Q
