"""Relativistic quantum trajectory ensembles in 1+1 spacetime dimensions.

A quantum state is represented by an ensemble of non-crossing timelike
worldlines (t(T,C), x(T,C)), one per label C, advanced in the ensemble
proper time T.  The inter-trajectory coupling enters through a quantum
potential built from spatial derivatives of the trajectory density on
each simultaneity submanifold; the same potential sets the local rate
dtau/dT of proper time against ensemble time.
"""

from .state import (
    SpatialGrid,
    EnsembleState,
    WeightFunction,
    SimConfig,
    make_grid,
    gaussian_weight,
    exponential_weight,
    uniform_weight,
    weight_log_derivative,
)
from .stencils import StencilPlan, build_plan, d_dC, interpolate
from .geometry import GeometryFields, compute_geometry, attach_g01, g00_from_tau
from .dynamics import (
    QuantumFields,
    StateDerivative,
    Snapshot,
    SnapshotSeries,
    IntegrationError,
    compute_Q,
    compute_force,
    tau_factor,
    eom_rhs,
    rk4_step,
    gaussian_initial_state,
    rest_initial_state,
    integrate,
)
from .nonrel import NonRelState, nonrel_Q, nonrel_rhs, nonrel_integrate
from .analytic import (
    AnalyticEnsemble,
    inertial_ensemble,
    exponential_ensemble,
    hyperbolic_gamma_one_ensemble,
    hyperbolic_gamma_T_ensemble,
    sample_state,
)
from .diagnostics import (
    DerivedFields,
    InvariantRecord,
    InvariantReport,
    derived_fields,
    evaluate_invariants,
    pde_residual,
    probability_conservation_check,
    support_truncated,
    inertial_limit_metric,
)
from .snapshot_io import (
    ConfigError,
    parse_config,
    config_to_text,
    write_snapshots,
    read_snapshots,
    write_report,
)

__version__ = "0.1.0"
