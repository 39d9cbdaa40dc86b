"""Ensemble-time evolution: quantum force, time-dilation factor, RK4 driver.

The first-order system advanced in the ensemble proper time T is

    dt/dT  = tau_T u0 / c          dU0/dT = tau_T f0 / m
    dx/dT  = tau_T u1              dU1/dT = tau_T f1 / m

with tau_T = exp(-Q / m c^2) and the force components (for x^alpha = (ct, x))

    f0 = -(c t_C / gamma) dQ/dC        f1 = -(x_C / gamma) dQ/dC

so the force is the slice-restricted gradient of the quantum potential mapped
back to inertial components, always orthogonal to the four-velocity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import GeometryFields, GeometryError, attach_g01, compute_geometry
from .qpotential import log_form_Q
from .state import (
    EnsembleState,
    SimConfig,
    SpatialGrid,
    StateValidationError,
    WeightFunction,
)
from .stencils import StencilPlan, build_plan, d_dC

ABORT_FACTOR = 10.0  # rk4_step aborts when norm drift exceeds this times invariant_tol


@dataclass(frozen=True)
class QuantumFields:
    Q: np.ndarray
    Q_C: np.ndarray
    f0: np.ndarray
    f1: np.ndarray
    tau_T: np.ndarray


@dataclass(frozen=True)
class StateDerivative:
    dt_dT: np.ndarray
    dx_dT: np.ndarray
    du0_dT: np.ndarray
    du1_dT: np.ndarray


@dataclass(frozen=True)
class Snapshot:
    tau_ensemble: float
    state: EnsembleState
    geometry: GeometryFields
    quantum: QuantumFields


@dataclass
class SnapshotSeries:
    config: SimConfig
    snapshots: list

    def __iter__(self):
        return iter(self.snapshots)

    def __len__(self):
        return len(self.snapshots)

    @property
    def times(self):
        return [s.tau_ensemble for s in self.snapshots]


class IntegrationError(RuntimeError):
    """Evolution aborted; carries whatever snapshots were completed."""

    def __init__(self, message: str, series: Optional[SnapshotSeries] = None):
        super().__init__(message)
        self.series = series


def compute_Q(
    geom: GeometryFields,
    w: WeightFunction,
    grid: SpatialGrid,
    plan: StencilPlan,
    hbar: float,
    mass: float,
):
    """Quantum potential and its label-derivative on one slice."""
    dlogf = w.dlog_f(grid.nodes)
    Q = log_form_Q(dlogf, geom.gamma, grid, plan, hbar, mass)
    Q_C = d_dC(Q, grid, plan)
    return Q, Q_C


def compute_force(geom: GeometryFields, Q_C: np.ndarray, c: float):
    """Inertial components (f0, f1) of the quantum force, f0 for the ct slot."""
    f0 = -c * geom.t_C / geom.gamma * Q_C
    f1 = -geom.x_C / geom.gamma * Q_C
    return f0, f1


def tau_factor(Q: np.ndarray, mass: float, c: float) -> np.ndarray:
    """Local rate of proper time against ensemble time, exp(-Q / m c^2)."""
    return np.exp(-np.asarray(Q, dtype=float) / (mass * c ** 2))


def _fields(state: EnsembleState, config: SimConfig, plan: StencilPlan):
    geom = compute_geometry(state, config.grid, plan, config.c)
    Q, Q_C = compute_Q(geom, config.weight, config.grid, plan, config.hbar, config.mass)
    tau = tau_factor(Q, config.mass, config.c)
    f0, f1 = compute_force(geom, Q_C, config.c)
    geom = attach_g01(geom, state, tau, config.c)
    return geom, QuantumFields(Q=Q, Q_C=Q_C, f0=f0, f1=f1, tau_T=tau)


def eom_rhs(
    state: EnsembleState, config: SimConfig, plan: Optional[StencilPlan] = None
) -> StateDerivative:
    """Right-hand side of the ensemble-time evolution equations."""
    if plan is None:
        plan = build_plan(config.grid, config.stencil_order)
    _, qf = _fields(state, config, plan)
    return StateDerivative(
        dt_dT=qf.tau_T * state.u0 / config.c,
        dx_dT=qf.tau_T * state.u1,
        du0_dT=qf.tau_T * qf.f0 / config.mass,
        du1_dT=qf.tau_T * qf.f1 / config.mass,
    )


def _rhs_arrays(y, T, config: SimConfig, plan: StencilPlan):
    state = EnsembleState(T, y[0], y[1], y[2], y[3])
    d = eom_rhs(state, config, plan)
    return np.stack([d.dt_dT, d.dx_dT, d.du0_dT, d.du1_dT])


def rk4_step(
    state: EnsembleState, config: SimConfig, plan: Optional[StencilPlan] = None
) -> EnsembleState:
    """One classical four-stage Runge-Kutta step of size config.dt."""
    if plan is None:
        plan = build_plan(config.grid, config.stencil_order)
    dt = config.dt
    T = state.tau_ensemble
    y = np.stack([state.t, state.x, state.u0, state.u1])
    try:
        k1 = _rhs_arrays(y, T, config, plan)
        k2 = _rhs_arrays(y + 0.5 * dt * k1, T + 0.5 * dt, config, plan)
        k3 = _rhs_arrays(y + 0.5 * dt * k2, T + 0.5 * dt, config, plan)
        k4 = _rhs_arrays(y + dt * k3, T + dt, config, plan)
    except (GeometryError, StateValidationError, FloatingPointError) as exc:
        raise IntegrationError(f"step from T = {T:.6g} failed: {exc}") from exc
    y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    try:
        new = EnsembleState(T + dt, y[0], y[1], y[2], y[3])
    except StateValidationError as exc:
        raise IntegrationError(f"state invalid after step to T = {T + dt:.6g}: {exc}") from exc
    worst = float(np.max(new.norm_violation(config.c)))
    if worst > ABORT_FACTOR * config.invariant_tol:
        raise IntegrationError(
            f"four-velocity norm drift {worst:.3e} exceeds "
            f"{ABORT_FACTOR:g} x invariant_tol = {ABORT_FACTOR * config.invariant_tol:.1e} "
            f"after step to T = {T + dt:.6g}"
        )
    return new


def gaussian_initial_state(config: SimConfig) -> EnsembleState:
    """Stationary wavepacket start: t = 0, x = C, four-velocity at rest.

    With these data the initial slice has gamma = 1, so dt/dT at T = 0 equals
    the time-dilation factor of the initial quantum potential while dx/dT = 0.
    """
    if config.weight.kind != "gaussian":
        raise ValueError(
            f"gaussian initial state requires a gaussian weight, got {config.weight.kind!r}"
        )
    return rest_initial_state(config)


def rest_initial_state(config: SimConfig) -> EnsembleState:
    """Ensemble at rest on the t = 0 slice with labels C as positions."""
    n = config.grid.n_points
    return EnsembleState(
        tau_ensemble=0.0,
        t=np.zeros(n),
        x=config.grid.nodes.copy(),
        u0=np.full(n, config.c),
        u1=np.zeros(n),
    )


def _snapshot(state: EnsembleState, config: SimConfig, plan: StencilPlan) -> Snapshot:
    geom, qf = _fields(state, config, plan)
    return Snapshot(state.tau_ensemble, state, geom, qf)


def integrate(
    config: SimConfig,
    initial_state: Optional[EnsembleState] = None,
    cadence: float = 1.0,
) -> SnapshotSeries:
    """Fixed-step RK4 from T = 0 to t_final, recording snapshots every
    `cadence` units of T plus the final state.

    On failure raises IntegrationError with the partial series attached.
    """
    plan = build_plan(config.grid, config.stencil_order)
    if initial_state is None:
        if config.weight.kind == "gaussian":
            state = gaussian_initial_state(config)
        else:
            state = rest_initial_state(config)
    else:
        state = initial_state
    n_steps = int(round(config.t_final / config.dt))
    stride = max(1, int(round(cadence / config.dt)))
    series = SnapshotSeries(config=config, snapshots=[])
    snap_error = None
    for k in range(n_steps + 1):
        T = k * config.dt
        state = EnsembleState(T, state.t, state.x, state.u0, state.u1)
        if k % stride == 0 or k == n_steps:
            try:
                series.snapshots.append(_snapshot(state, config, plan))
            except (GeometryError, FloatingPointError) as exc:
                raise IntegrationError(
                    f"field evaluation failed at T = {T:.6g}: {exc}", series
                ) from exc
        if k == n_steps:
            break
        try:
            state = rk4_step(state, config, plan)
        except IntegrationError as exc:
            raise IntegrationError(str(exc), series) from exc
    return series
