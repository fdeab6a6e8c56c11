"""Implicit finite-difference solvers for the driven, damped sine-Gordon lattice."""

__version__ = "0.1.0"

from .model import (
    DriveSpec,
    LatticeState,
    ModelParams,
    ValidationError,
    band_gap_edge,
    continuum_threshold,
    dispersion_omega2,
    nonlinear_ratio,
    nonlinear_ratio_dplus,
    potential,
    sponge_gamma,
    uniform_equilibrium,
)
from .integrator import (
    DegenerateBoundaryError,
    NewtonDivergenceError,
    Scheme,
    SimulationError,
    SimulationResult,
    SnapshotRecorder,
    SolverConfig,
    SolverError,
    ZeroPivotError,
    crout_solve,
    ghost_update,
    jacobian_tridiagonal,
    residual,
    simulate,
    simulate_ensemble,
    step,
)
from .energy import (
    AuditPreconditionError,
    AuditReport,
    EnergyLedger,
    EnergyRecorder,
    audit_trajectory,
    rate_rhs,
    rate_terms,
    site_hamiltonian,
    total_energy,
)
from .stability import StabilityReport, eigenvalues, predicates, scan, symbols
from .supratransmission import (
    SweepSpec,
    ThresholdResult,
    detect_threshold,
    frequency_diagram,
    scheme_cross_check,
    sweep,
)
