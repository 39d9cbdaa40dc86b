"""Finite-difference stencils and local polynomial interpolation.

First derivatives use centered stencils of the configured order in the
interior and matching-order one-sided stencils at the edges (no boundary
condition is imposed; edge rows simply use the widest available window).
Nested second derivatives are always formed by applying the first-derivative
operator twice, never by a dedicated second-derivative stencil.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .state import SpatialGrid


def fornberg_weights(xs: np.ndarray, x0: float, deriv: int) -> np.ndarray:
    """Finite-difference weights for the deriv-th derivative at x0 from nodes xs.

    Standard Fornberg recursion; exact for polynomials up to degree
    len(xs) - 1.
    """
    n = len(xs)
    if deriv >= n:
        raise ValueError("need more nodes than derivative order")
    w = np.zeros((deriv + 1, n))
    w[0, 0] = 1.0
    c1 = 1.0
    c4 = xs[0] - x0
    for i in range(1, n):
        mn = min(i, deriv)
        c2 = 1.0
        c5 = c4
        c4 = xs[i] - x0
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    w[k, i] = c1 * (k * w[k - 1, i - 1] - c5 * w[k, i - 1]) / c2
                w[0, i] = -c1 * c5 * w[0, i - 1] / c2
            for k in range(mn, 0, -1):
                w[k, j] = ((xs[i] - x0) * w[k, j] - k * w[k - 1, j]) / c3
            w[0, j] = (xs[i] - x0) * w[0, j] / c3
        c1 = c2
    return w[deriv]


@dataclass(frozen=True)
class StencilPlan:
    """First-derivative plan for a uniform grid: row coefficients and the
    assembled dense operator matrix."""

    order: int
    n_points: int
    interior_row: np.ndarray            # centered coefficients, width order+1
    left_rows: tuple                    # one-sided rows for nodes 0..order/2-1
    right_rows: tuple                   # one-sided rows for the last order/2 nodes
    matrix: np.ndarray                  # (n, n) dense derivative operator

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def interior(self) -> slice:
        """Node range covered by the centered stencil."""
        half = self.order // 2
        return slice(half, self.n_points - half)


def build_plan(grid: SpatialGrid, order: int = 4) -> StencilPlan:
    if order not in (2, 4):
        raise ValueError(f"stencil order must be 2 or 4, got {order}")
    nodes = grid.nodes
    n = grid.n_points
    half = order // 2
    width = order + 1
    D = np.zeros((n, n))
    left = []
    right = []
    interior_row = None
    for i in range(n):
        if i < half:
            lo = 0
        elif i >= n - half:
            lo = n - width
        else:
            lo = i - half
        row = fornberg_weights(nodes[lo:lo + width], nodes[i], 1)
        D[i, lo:lo + width] = row
        if i < half:
            left.append(row.copy())
        elif i >= n - half:
            right.append(row.copy())
        elif interior_row is None:
            interior_row = row.copy()
    return StencilPlan(order, n, interior_row, tuple(left), tuple(right), D)


def d_dC(values: np.ndarray, grid: SpatialGrid, plan: StencilPlan) -> np.ndarray:
    """First derivative of nodal values with respect to the label C."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.n_points,):
        raise ValueError(
            f"values shape {values.shape} does not match grid ({grid.n_points},)"
        )
    return plan.matrix @ values


def interpolate(values: np.ndarray, grid: SpatialGrid, c_query: float) -> float:
    """Cubic 4-point Lagrange interpolation of nodal values at c_query.

    Exact for polynomials up to degree 3; the query must lie inside the grid.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.n_points,):
        raise ValueError(
            f"values shape {values.shape} does not match grid ({grid.n_points},)"
        )
    nodes = grid.nodes
    if not (nodes[0] <= c_query <= nodes[-1]):
        raise ValueError(f"query {c_query} outside grid [{nodes[0]}, {nodes[-1]}]")
    k = int(np.searchsorted(nodes, c_query)) - 1
    j = min(max(k - 1, 0), grid.n_points - 4)
    xs = nodes[j:j + 4]
    ys = values[j:j + 4]
    out = 0.0
    for i in range(4):
        li = 1.0
        for jj in range(4):
            if jj != i:
                li *= (c_query - xs[jj]) / (xs[i] - xs[jj])
        out += ys[i] * li
    return float(out)
