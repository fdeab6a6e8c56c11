"""Implicit three-level schemes for the driven lattice.

Both schemes are solved one step at a time: the unknown level ``u^{k+1}``
satisfies a nonlinear system with a tridiagonal Jacobian, handled by Newton
iteration and a Crout factorization. The driven ghost ``u_0`` is eliminated
analytically so only the ``N`` interior unknowns enter the linear solves.

Every array function accepts leading batch dimensions. An ensemble of
lattices sharing one :class:`~sglattice.model.ModelParams` is advanced
with the same arithmetic, member by member, as a single lattice would be.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numba import njit

from .model import (
    DriveSpec,
    LatticeState,
    ModelParams,
    ValidationError,
    nonlinear_ratio,
    nonlinear_ratio_and_slope,
    nonlinear_ratio_dplus,
)

class Scheme(str, enum.Enum):
    """``S1`` averages the Laplacian over levels k±1; ``S2`` uses the 1-2-1 average."""

    S1 = "s1"
    S2 = "s2"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, Scheme):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValidationError(f"unknown scheme {value!r}; expected s1 or s2") from None


class SolverError(RuntimeError):
    """Base class for failures inside a time step."""


class DegenerateBoundaryError(SolverError):
    """The driven boundary cannot be eliminated because ``c = beta = 0``."""


class ZeroPivotError(SolverError):
    pass


class NewtonDivergenceError(SolverError):
    pass


class SimulationError(SolverError):
    """A step failed; ``step`` is the equation index ``k`` at which it happened."""

    def __init__(self, step: int, cause: Exception):
        super().__init__(f"step {step}: {cause}")
        self.step = step
        self.cause = cause


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 0.05
    steps: int = 1000
    scheme: Scheme = Scheme.S1
    newton_tol: float = 1e-5
    newton_tol_audit: float = 1e-12
    newton_max_iter: int = 50

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if not self.dt > 0:
            raise ValidationError(f"dt must be > 0, got {self.dt}")
        if not (isinstance(self.steps, (int, np.integer)) and self.steps >= 0):
            raise ValidationError(f"steps must be a non-negative integer, got {self.steps!r}")
        if not self.newton_tol > 0 or not self.newton_tol_audit > 0:
            raise ValidationError("Newton tolerances must be > 0")
        if not self.newton_max_iter >= 1:
            raise ValidationError("newton_max_iter must be >= 1")

    def for_audit(self) -> "SolverConfig":
        """Copy whose working tolerance is the tight audit tolerance."""
        return SolverConfig(self.dt, self.steps, self.scheme, self.newton_tol_audit,
                            self.newton_tol_audit, self.newton_max_iter)


@dataclass
class StepDiagnostics:
    newton_iters: int
    final_update_norm: float
    jacobian_min_dominance: float


@functools.lru_cache(maxsize=128)
def _damping(params: ModelParams) -> np.ndarray:
    g = params.site_damping()
    g.setflags(write=False)
    return g


def laplacian(u):
    """Second difference over sites 1..N of a ghosted array."""
    return u[..., 2:] - 2.0 * u[..., 1:-1] + u[..., :-2]


def ghost_update(params: ModelParams, dt: float, u_prev, u_next, phi_k):
    """Left ghost ``u_0^{k+1}`` from the driven boundary relation.

    The relation ``c^2 (g^{k+1} + g^{k-1}) + beta (g^{k+1} - g^{k-1}) / dt = 2 phi_k``
    on the gap ``g = u_0 - u_1`` does not involve ``u^{k+1}`` beyond ``u_1``,
    so the ghost is ``u_1^{k+1}`` plus a known offset.
    """
    a = params.boundary_weight(dt)
    if not a > 0:
        raise DegenerateBoundaryError("boundary elimination needs c**2 + beta/dt > 0")
    b = params.c**2 - params.beta / dt
    gap_prev = u_prev[..., 0] - u_prev[..., 1]
    return u_next[..., 1] + (2.0 * np.asarray(phi_k) - b * gap_prev) / a


def _fill_ghosts(params: ModelParams, dt: float, u_prev, u_next, phi_k):
    if params.boundary_weight(dt) > 0:
        u_next[..., 0] = ghost_update(params, dt, u_prev, u_next, phi_k)
    else:
        # c = beta = 0: the ghost is decoupled and only a zero drive is admissible
        if np.any(np.asarray(phi_k) != 0):
            raise DegenerateBoundaryError("cannot drive a lattice with c = beta = 0")
        u_next[..., 0] = u_next[..., 1]
    u_next[..., -1] = u_next[..., -2]
    return u_next


def _coupling(scheme: Scheme, params: ModelParams, dt: float, lap_prev, lap_curr, lap_next):
    c2 = params.c**2
    if scheme is Scheme.S1:
        elastic = 0.5 * c2 * (lap_next + lap_prev)
    else:
        elastic = 0.25 * c2 * (lap_next + 2.0 * lap_curr + lap_prev)
    viscous = params.beta / (2.0 * dt) * (lap_next - lap_prev)
    return elastic + viscous


def residual(scheme, params: ModelParams, dt: float, u_prev, u_curr, u_next_guess, phi_k):
    """Scheme equations at sites 1..N for a candidate ``u^{k+1}``.

    The ghosts of ``u_next_guess`` are overwritten (on a copy) from the
    boundary relations, so the result depends only on its interior.
    """
    scheme = Scheme.parse(scheme)
    u_next = _fill_ghosts(params, dt, u_prev, np.array(u_next_guess, dtype=float), phi_k)
    up, uc, un = u_prev[..., 1:-1], u_curr[..., 1:-1], u_next[..., 1:-1]
    gamma_n = _damping(params)
    coupling = _coupling(scheme, params, dt, laplacian(u_prev), laplacian(u_curr), laplacian(u_next))
    return ((un - 2.0 * uc + up) / dt**2
            - coupling
            + gamma_n / (2.0 * dt) * (un - up)
            + 0.5 * params.m2 * (un + up)
            + nonlinear_ratio(un, up)
            - params.J)


def _off_weight(scheme: Scheme, params: ModelParams, dt: float) -> float:
    c2 = params.c**2
    w = 0.5 * c2 if scheme is Scheme.S1 else 0.25 * c2
    return w + params.beta / (2.0 * dt)


def jacobian_tridiagonal(scheme, params: ModelParams, dt: float, u_prev, u_next_guess):
    """Bands ``(lower, diag, upper)`` of d(residual)/d(u^{k+1}), each of length N.

    ``lower[..., 0]`` and ``upper[..., -1]`` are zero. Both ghosts are slaved
    to their neighbours with unit slope, which removes one neighbour from
    rows 1 and N.
    """
    scheme = Scheme.parse(scheme)
    N = params.N
    w = _off_weight(scheme, params, dt)
    neighbours = np.full(N, 2.0)
    neighbours[0] -= 1.0
    neighbours[-1] -= 1.0
    base = 1.0 / dt**2 + w * neighbours + _damping(params) / (2.0 * dt) + 0.5 * params.m2
    diag = base + nonlinear_ratio_dplus(u_next_guess[..., 1:-1], u_prev[..., 1:-1])
    off = np.full(diag.shape, -w)
    lower = off.copy()
    upper = off
    lower[..., 0] = 0.0
    upper[..., -1] = 0.0
    return lower, diag, upper


def dense_from_bands(lower, diag, upper) -> np.ndarray:
    """Assemble a single (unbatched) tridiagonal matrix, mainly for checks."""
    return np.diag(diag) + np.diag(lower[1:], -1) + np.diag(upper[:-1], 1)


@njit(cache=True)
def _crout_kernel(lower, diag, upper, rhs, out):
    # rows of the 2-D views are independent systems
    B, n = diag.shape
    z = np.empty(n)
    v = np.empty(n)
    for b in range(B):
        l = diag[b, 0]
        if abs(l) < 1e-14:
            return b
        v[0] = upper[b, 0] / l
        z[0] = rhs[b, 0] / l
        for i in range(1, n):
            l = diag[b, i] - lower[b, i] * v[i - 1]
            if abs(l) < 1e-14:
                return b
            v[i] = upper[b, i] / l
            z[i] = (rhs[b, i] - lower[b, i] * z[i - 1]) / l
        out[b, n - 1] = z[n - 1]
        for i in range(n - 2, -1, -1):
            out[b, i] = z[i] - v[i] * out[b, i + 1]
    return -1


def crout_solve(bands, rhs):
    """Solve a tridiagonal system by Crout factorization, without pivoting.

    ``bands`` is ``(lower, diag, upper)`` as returned by
    :func:`jacobian_tridiagonal`; extra leading dimensions solve a batch.
    """
    lower, diag, upper = (np.asarray(b, dtype=float) for b in bands)
    rhs = np.asarray(rhs, dtype=float)
    shape = np.broadcast_shapes(lower.shape, diag.shape, upper.shape, rhs.shape)
    n = shape[-1]
    flat = [np.ascontiguousarray(np.broadcast_to(a, shape)).reshape(-1, n)
            for a in (lower, diag, upper, rhs)]
    out = np.empty_like(flat[3])
    bad = _crout_kernel(*flat, out)
    if bad >= 0:
        raise ZeroPivotError(f"zero pivot in Crout factorization (system {bad})")
    return out.reshape(shape)


class _StepSystem:
    """Residual and Jacobian of one step with the known levels folded in.

    Algebraically the same as :func:`residual` and
    :func:`jacobian_tridiagonal`, but the parts that depend only on
    ``u^{k-1}`` and ``u^k`` are assembled once per step.
    """

    def __init__(self, scheme: Scheme, params: ModelParams, dt: float, u_prev, u_curr):
        c2 = params.c**2
        gamma_n = _damping(params)
        self.w = _off_weight(scheme, params, dt)
        self.params = params
        up = u_prev[..., 1:-1]
        lap_prev = laplacian(u_prev)
        if scheme is Scheme.S1:
            known = 0.5 * c2 * lap_prev
        else:
            known = 0.25 * c2 * (2.0 * laplacian(u_curr) + lap_prev)
        known = known - params.beta / (2.0 * dt) * lap_prev
        self.const = ((up - 2.0 * u_curr[..., 1:-1]) / dt**2 - known
                      + (0.5 * params.m2 - gamma_n / (2.0 * dt)) * up - params.J)
        self.self_coef = 1.0 / dt**2 + gamma_n / (2.0 * dt) + 0.5 * params.m2
        neighbours = np.full(params.N, 2.0)
        neighbours[0] -= 1.0
        neighbours[-1] -= 1.0
        self.base_diag = self.self_coef + self.w * neighbours
        self.up = up

    def evaluate(self, u):
        un = u[..., 1:-1]
        ratio, slope = nonlinear_ratio_and_slope(un, self.up)
        F = self.self_coef * un - self.w * laplacian(u) + self.const + ratio
        diag = self.base_diag + slope
        off = np.full(diag.shape, -self.w)
        lower = off.copy()
        lower[..., 0] = 0.0
        off[..., -1] = 0.0
        return F, (lower, diag, off)


def step(state: LatticeState, scheme, params: ModelParams, config: SolverConfig, phi_k,
         tol: Optional[float] = None):
    """Advance one level; returns a new state and the step diagnostics.

    Newton starts from the extrapolation ``2u^k - u^{k-1}`` and stops once the
    largest update over the sites falls below ``tol`` (``config.newton_tol``
    by default). Batched members that converge are frozen individually.
    """
    scheme = Scheme.parse(scheme)
    dt = config.dt
    tol = config.newton_tol if tol is None else tol
    u_prev, u_curr = state.u_prev, state.u_curr
    u = 2.0 * u_curr - u_prev
    _fill_ghosts(params, dt, u_prev, u, phi_k)
    system = _StepSystem(scheme, params, dt, u_prev, u_curr)

    batch = u.shape[:-1]
    active = np.ones(batch, dtype=bool)
    norms = np.full(batch, np.inf)
    dominance = np.inf
    for it in range(1, config.newton_max_iter + 1):
        F, bands = system.evaluate(u)
        lower, diag, upper = bands
        dominance = min(dominance, float(np.min(np.abs(diag) - np.abs(lower) - np.abs(upper))))
        delta = crout_solve(bands, F)
        if batch:
            delta[~active] = 0.0
        u[..., 1:-1] -= delta
        _fill_ghosts(params, dt, u_prev, u, phi_k)
        size = np.max(np.abs(delta), axis=-1)
        norms = np.where(active, size, norms)
        active &= ~(size < tol)
        if not np.any(active):
            break
    else:
        raise NewtonDivergenceError(
            f"Newton did not converge in {config.newton_max_iter} iterations "
            f"(update norm {float(np.max(norms)):.3e})")

    new = LatticeState(u_curr, u, u, state.k + 1, dt)
    return new, StepDiagnostics(it, float(np.max(norms)), dominance)


class Recorder:
    """Hook called as ``record(step, before, after, phi)`` every ``stride`` steps.

    ``before`` holds levels ``k - 1`` and ``k``; ``after.u_curr`` is ``u^{k+1}``.
    """

    stride: int = 1

    def record(self, step: int, before: LatticeState, after: LatticeState, phi) -> None:
        raise NotImplementedError


class SnapshotRecorder(Recorder):
    """Stores ``u^{k+1}`` over sites 1..N."""

    def __init__(self, stride: int = 100):
        self.stride = stride
        self.steps: list[int] = []
        self.frames: list[np.ndarray] = []

    def record(self, step, before, after, phi):
        self.steps.append(step)
        self.frames.append(after.u_curr[..., 1:-1].copy())


@dataclass
class SimulationResult:
    params: ModelParams
    config: SolverConfig
    drives: Sequence[DriveSpec]
    state: LatticeState
    recorders: Sequence[Recorder] = ()
    max_newton_iters: int = 0
    min_dominance: float = math.inf
    iteration_counts: list = field(default_factory=list)

    @property
    def drive(self) -> DriveSpec:
        return self.drives[0]


def _check_drivable(params: ModelParams, config: SolverConfig, drives: Sequence[DriveSpec]):
    if any(d.attached for d in drives) and not params.boundary_weight(config.dt) > 0:
        raise ValidationError("a drive needs c**2 + beta/dt > 0 at the boundary")


def _run(params, config, drives, phi_of, state, recorders, tol, keep_iterations):
    scheme = config.scheme
    max_iters = 0
    min_dom = math.inf
    counts = []
    for s in range(1, config.steps + 1):
        phi = phi_of(state.k)
        try:
            new, diag = step(state, scheme, params, config, phi, tol=tol)
        except SolverError as exc:
            raise SimulationError(state.k, exc) from exc
        for rec in recorders:
            if s % rec.stride == 0:
                rec.record(s, state, new, phi)
        state = new
        max_iters = max(max_iters, diag.newton_iters)
        min_dom = min(min_dom, diag.jacobian_min_dominance)
        if keep_iterations:
            counts.append(diag.newton_iters)
    return SimulationResult(params, config, list(drives), state, list(recorders),
                            max_iters, min_dom, counts)


def simulate(params: ModelParams, drive: DriveSpec, config: SolverConfig,
             recorders: Sequence[Recorder] = (), state: Optional[LatticeState] = None,
             tol: Optional[float] = None, keep_iterations: bool = False) -> SimulationResult:
    """Integrate from rest (or from ``state``) for ``config.steps`` steps.

    The forcing of the step centred at level ``k`` is ``drive.phi(k, dt)``.
    """
    _check_drivable(params, config, [drive])
    if state is None:
        state = LatticeState.at_rest(params.N, config.dt)
    return _run(params, config, [drive], lambda k: drive.phi(k, config.dt),
                state, recorders, tol, keep_iterations)


def simulate_ensemble(params: ModelParams, drives: Sequence[DriveSpec], config: SolverConfig,
                      recorders: Sequence[Recorder] = (), tol: Optional[float] = None
                      ) -> SimulationResult:
    """Run one lattice per drive, vectorized along a leading batch axis.

    Each member follows exactly the arithmetic of its own :func:`simulate`
    call, so results do not depend on how drives are grouped.
    """
    drives = list(drives)
    _check_drivable(params, config, drives)
    dt = config.dt
    state = LatticeState.at_rest(params.N, dt, batch=(len(drives),))

    def phi_of(k):
        return np.array([d.phi(k, dt) for d in drives])

    return _run(params, config, drives, phi_of, state, recorders, tol, False)
