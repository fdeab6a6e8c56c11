"""Discrete energies of both schemes and their exact rate-of-change identities.

``E_k`` is built from the level pair ``(u^k, u^{k+1})``. The rate identity
relates ``(E_k - E_{k-1}) / dt`` to boundary work and the two dissipation
sums, all evaluated from the three levels ``k - 1, k, k + 1``; it holds to
rounding for any exact solution of the corresponding scheme.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .integrator import Recorder, Scheme, SimulationResult, _damping
from .model import ModelParams, potential


class AuditPreconditionError(ValueError):
    """The trajectory cannot be audited against the uniform-damping identities."""


def _onsite(params: ModelParams, u_curr, u_next):
    a, b = u_curr[..., 1:-1], u_next[..., 1:-1]
    return (0.5 * params.m2 * 0.5 * (b**2 + a**2)
            + 0.5 * (potential(b) + potential(a))
            - params.J * 0.5 * (b + a))


def site_hamiltonians(scheme, params: ModelParams, dt: float, u_curr, u_next):
    """Local energies ``H_n^k`` for sites 1..N (ghosts must be filled)."""
    scheme = Scheme.parse(scheme)
    c2 = params.c**2
    kinetic = 0.5 * ((u_next[..., 1:-1] - u_curr[..., 1:-1]) / dt) ** 2
    if scheme is Scheme.S1:
        def bonds(u):
            centre = u[..., 1:-1]
            return (u[..., 2:] - centre) ** 2 + (u[..., :-2] - centre) ** 2
        elastic = c2 / 8.0 * (bonds(u_next) + bonds(u_curr))
    else:
        m = 0.5 * (u_next + u_curr)
        centre = m[..., 1:-1]
        elastic = c2 / 4.0 * ((m[..., 2:] - centre) ** 2 + (m[..., :-2] - centre) ** 2)
    return kinetic + elastic + _onsite(params, u_curr, u_next)


def site_hamiltonian(scheme, params: ModelParams, dt: float, u_curr, u_next, n: int):
    """Energy of site ``n`` (1-based) between levels k and k+1."""
    if not 1 <= n <= params.N:
        raise IndexError(f"site {n} outside 1..{params.N}")
    return site_hamiltonians(scheme, params, dt, u_curr, u_next)[..., n - 1]


def boundary_energy(scheme, params: ModelParams, u_curr, u_next):
    """Energy stored in the bond between the driven ghost and site 1."""
    scheme = Scheme.parse(scheme)
    c2 = params.c**2
    if scheme is Scheme.S1:
        g1 = u_next[..., 1] - u_next[..., 0]
        g0 = u_curr[..., 1] - u_curr[..., 0]
        return c2 / 4.0 * 0.5 * (g1**2 + g0**2)
    m = 0.5 * (u_next + u_curr)
    return c2 / 4.0 * (m[..., 1] - m[..., 0]) ** 2


def total_energy(scheme, params: ModelParams, dt: float, u_curr, u_next):
    """Total discrete energy ``E_k`` of the level pair ``(u^k, u^{k+1})``."""
    H = site_hamiltonians(scheme, params, dt, u_curr, u_next)
    return np.sum(H, axis=-1) + boundary_energy(scheme, params, u_curr, u_next)


@dataclass
class RateTerms:
    """Right-hand side of the rate identity, split into its parts."""

    boundary_flux: np.ndarray
    dissipation_beta: np.ndarray
    dissipation_gamma: np.ndarray

    @property
    def rate_rhs(self):
        return self.boundary_flux - self.dissipation_beta - self.dissipation_gamma


def rate_terms(scheme, params: ModelParams, dt: float, u_prev, u_curr, u_next,
               gamma_n=None) -> RateTerms:
    """Boundary work and dissipation over one step.

    ``gamma_n`` defaults to the per-site damping of ``params``; with uniform
    damping this is ``gamma`` times the velocity sum.
    """
    scheme = Scheme.parse(scheme)
    v = (u_next - u_prev) / (2.0 * dt)  # includes both ghosts
    vn = v[..., 1:-1]
    dv = vn - v[..., :-2]  # v_n - v_{n-1}, n = 1..N
    diss_beta = params.beta * (np.sum(dv**2, axis=-1) + (v[..., 1] - v[..., 0]) * v[..., 0])
    if gamma_n is None:
        gamma_n = _damping(params)
    diss_gamma = np.sum(gamma_n * vn**2, axis=-1)
    if scheme is Scheme.S1:
        avg = 0.5 * ((u_next[..., 0] + u_prev[..., 0]) - (u_next[..., 1] + u_prev[..., 1]))
    else:
        def wide(i):
            return u_next[..., i] + 2.0 * u_curr[..., i] + u_prev[..., i]
        avg = 0.25 * (wide(0) - wide(1))
    flux = params.c**2 * avg * v[..., 0]
    return RateTerms(flux, diss_beta, diss_gamma)


def rate_rhs(scheme, params: ModelParams, dt: float, u_prev, u_curr, u_next):
    return rate_terms(scheme, params, dt, u_prev, u_curr, u_next).rate_rhs


@dataclass
class EnergyLedger:
    """Per-record energy bookkeeping; one row per recorded step."""

    step: list = field(default_factory=list)
    time: list = field(default_factory=list)
    E: list = field(default_factory=list)
    rate_lhs: list = field(default_factory=list)
    rate_rhs: list = field(default_factory=list)
    boundary_flux: list = field(default_factory=list)
    dissipation_beta: list = field(default_factory=list)
    dissipation_gamma: list = field(default_factory=list)
    output_current: list = field(default_factory=list)
    site_energies: Optional[list] = None

    COLUMNS = ("step", "time", "E", "rate_lhs", "rate_rhs", "boundary_flux",
               "dissipation_beta", "dissipation_gamma", "output_current")

    def as_arrays(self) -> dict:
        return {name: np.asarray(getattr(self, name)) for name in self.COLUMNS}

    def __len__(self):
        return len(self.step)


class EnergyRecorder(Recorder):
    """Fills an :class:`EnergyLedger` every ``stride`` steps of a single lattice."""

    def __init__(self, scheme, params: ModelParams, dt: float, stride: int = 1,
                 keep_sites: bool = False):
        self.scheme = Scheme.parse(scheme)
        self.params = params
        self.dt = dt
        self.stride = stride
        self.ledger = EnergyLedger(site_energies=[] if keep_sites else None)

    def record(self, step, before, after, phi):
        p, dt, sch = self.params, self.dt, self.scheme
        u_prev, u_curr, u_next = before.u_prev, before.u_curr, after.u_curr
        E_new = total_energy(sch, p, dt, u_curr, u_next)
        E_old = total_energy(sch, p, dt, u_prev, u_curr)
        terms = rate_terms(sch, p, dt, u_prev, u_curr, u_next)
        current = (u_next[..., -2] - u_prev[..., -2]) / (2.0 * dt) * p.inv_R
        led = self.ledger
        led.step.append(step)
        led.time.append(before.k * dt)
        led.E.append(float(E_new))
        led.rate_lhs.append(float((E_new - E_old) / dt))
        led.rate_rhs.append(float(terms.rate_rhs))
        led.boundary_flux.append(float(terms.boundary_flux))
        led.dissipation_beta.append(float(terms.dissipation_beta))
        led.dissipation_gamma.append(float(terms.dissipation_gamma))
        led.output_current.append(float(current))
        if led.site_energies is not None:
            led.site_energies.append(site_hamiltonians(sch, p, dt, u_curr, u_next))


@dataclass
class AuditReport:
    max_identity_defect: float
    max_scaled_defect: float
    shutoff_drift: Optional[float] = None
    shutoff_nonincreasing: Optional[bool] = None
    telescoped_flux_error: Optional[float] = None
    final_energy: float = 0.0

    def identity_ok(self, rel: float = 1e-7) -> bool:
        return self.max_scaled_defect <= rel


def _ledger_of(record) -> tuple:
    if isinstance(record, SimulationResult):
        for rec in record.recorders:
            if isinstance(rec, EnergyRecorder):
                return rec.ledger, record.params, record.drive
        raise AuditPreconditionError("simulation carries no energy recorder")
    ledger, params, drive = record
    return ledger, params, drive


def audit_trajectory(record, cutoff_step: Optional[int] = None) -> AuditReport:
    """Check the discrete energy balance along a recorded trajectory.

    ``record`` is a :class:`SimulationResult` with an :class:`EnergyRecorder`
    at stride 1, or a ``(ledger, params, drive)`` triple. ``cutoff_step``
    defaults to the drive's cutoff; after it the undamped energy should stay
    flat and the damped energy should not grow.
    """
    ledger, params, drive = _ledger_of(record)
    if not params.has_uniform_damping():
        raise AuditPreconditionError("per-site damping varies (sponge or finite R)")
    steps = np.asarray(ledger.step)
    if steps.size == 0 or np.any(np.diff(steps) != 1) or steps[0] != 1:
        raise AuditPreconditionError("the ledger must hold every step from the first")
    E = np.asarray(ledger.E)
    defect = np.abs(np.asarray(ledger.rate_lhs) - np.asarray(ledger.rate_rhs))
    scaled = defect / np.maximum(1.0, np.abs(E))
    report = AuditReport(float(defect.max()), float(scaled.max()), final_energy=float(E[-1]))

    dt = ledger.time[1] - ledger.time[0] if len(ledger.time) > 1 else None
    if cutoff_step is None and drive is not None:
        cutoff_step = drive.cutoff_step
    if cutoff_step is not None:
        # equation index k of a row is time/dt; rows with k > cutoff carry no forcing
        k = np.rint(np.asarray(ledger.time) / dt).astype(int) if dt else steps
        after = np.nonzero(k > cutoff_step)[0]
        if after.size:
            E_after = E[after]
            if params.beta == 0 and params.gamma == 0:
                report.shutoff_drift = float(np.max(np.abs(E_after - E_after[0])))
            report.shutoff_nonincreasing = bool(np.all(np.diff(E_after) <= 0.0))
    if params.beta == 0 and params.gamma == 0 and dt:
        work = dt * np.cumsum(ledger.boundary_flux)
        report.telescoped_flux_error = float(abs(E[-1] - work[-1]) / max(1.0, abs(E[-1])))
    return report
