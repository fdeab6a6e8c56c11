"""Physical parameters, drive, lattice state and closed-form model quantities.

The lattice carries ``N`` junctions at sites ``1..N`` plus two ghost nodes
(index ``0`` on the driven end and ``N + 1`` on the free end). Arrays of
displacements always have length ``N + 2``; leading batch dimensions are
allowed everywhere so an ensemble of independent lattices can be advanced
together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

SPONGE_MODES = ("off", "verbatim", "ramp")

# series switch for sinc and its derivative
_SINC_SERIES = 1e-4


class ValidationError(ValueError):
    """Raised when a parameter set violates a physical invariant."""


@dataclass(frozen=True)
class ModelParams:
    """Constants of the damped, driven sine-Gordon lattice.

    ``R`` may be ``math.inf`` (the default), meaning no output load.
    ``m2`` is the squared mass and may be negative.
    """

    c: float = 5.0
    beta: float = 0.0
    gamma: float = 0.0
    m2: float = 0.0
    J: float = 0.0
    R: float = math.inf
    N: int = 200
    N0: int = 50
    sponge_mode: str = "off"

    def __post_init__(self):
        if not self.c >= 0:
            raise ValidationError(f"coupling c must be >= 0, got {self.c}")
        if not self.beta >= 0:
            raise ValidationError(f"internal damping beta must be >= 0, got {self.beta}")
        if not self.gamma >= 0:
            raise ValidationError(f"external damping gamma must be >= 0, got {self.gamma}")
        if not (isinstance(self.N, (int, np.integer)) and self.N >= 1):
            raise ValidationError(f"N must be an integer >= 1, got {self.N!r}")
        if not (isinstance(self.N0, (int, np.integer)) and 1 <= self.N0 <= self.N):
            raise ValidationError(f"N0 must satisfy 1 <= N0 <= N, got N0={self.N0}, N={self.N}")
        if not self.R > 0:
            raise ValidationError(f"R must be positive or inf, got {self.R}")
        if self.sponge_mode not in SPONGE_MODES:
            raise ValidationError(f"sponge_mode must be one of {SPONGE_MODES}, got {self.sponge_mode!r}")
        for name in ("m2", "J"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")

    @property
    def inv_R(self) -> float:
        return 0.0 if math.isinf(self.R) else 1.0 / self.R

    @property
    def gap_edge(self) -> float:
        return band_gap_edge(self.m2)

    def site_damping(self) -> np.ndarray:
        """Per-site external damping ``gamma_n`` for sites 1..N."""
        n = np.arange(1, self.N + 1)
        g = self.gamma + sponge_gamma(n, self.N, self.N0, self.sponge_mode)
        g = np.asarray(g, dtype=float)
        g[-1] += self.inv_R
        return g

    def has_uniform_damping(self) -> bool:
        return self.sponge_mode == "off" and self.inv_R == 0.0

    def boundary_weight(self, dt: float) -> float:
        """``c**2 + beta/dt``; the driven ghost can be eliminated only when positive."""
        return self.c**2 + self.beta / dt

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class DriveSpec:
    """Harmonic boundary forcing ``A sin(Omega t)``.

    ``ramp_steps`` scales the forcing at step ``k`` by ``min(k / ramp_steps, 1)``.
    ``cutoff_step`` switches the forcing off for every step index beyond it.
    """

    A: float = 0.0
    Omega: float = 0.8
    ramp_steps: int = 0
    cutoff_step: Optional[int] = None

    def __post_init__(self):
        if not self.A >= 0:
            raise ValidationError(f"amplitude A must be >= 0, got {self.A}")
        if not self.Omega > 0:
            raise ValidationError(f"frequency Omega must be > 0, got {self.Omega}")
        if not (isinstance(self.ramp_steps, (int, np.integer)) and self.ramp_steps >= 0):
            raise ValidationError(f"ramp_steps must be an integer >= 0, got {self.ramp_steps!r}")
        if self.cutoff_step is not None and self.cutoff_step < 0:
            raise ValidationError("cutoff_step must be >= 0")

    def phi(self, k: int, dt: float) -> float:
        """Forcing at step index ``k`` (time ``k * dt``)."""
        if self.cutoff_step is not None and k > self.cutoff_step:
            return 0.0
        value = self.A * math.sin(self.Omega * k * dt)
        if self.ramp_steps:
            value *= min(k / self.ramp_steps, 1.0)
        return value

    @property
    def attached(self) -> bool:
        return self.A > 0


@dataclass
class LatticeState:
    """Three time levels of the displacement field, ghosts included.

    ``u_prev``, ``u_curr`` and ``u_next`` are levels ``k - 1``, ``k`` and
    ``k + 1``. Before the first step ``u_next`` is a copy of ``u_curr``.
    """

    u_prev: np.ndarray
    u_curr: np.ndarray
    u_next: np.ndarray
    k: int
    dt: float = field(default=1.0)

    @classmethod
    def at_rest(cls, N: int, dt: float, batch: tuple = ()) -> "LatticeState":
        """Zero initial data ``u^0 = u^1 = 0``; the first step solves for ``u^2``."""
        shape = tuple(batch) + (N + 2,)
        return cls(np.zeros(shape), np.zeros(shape), np.zeros(shape), k=1, dt=dt)

    @property
    def t(self) -> float:
        return self.k * self.dt

    @property
    def N(self) -> int:
        return self.u_curr.shape[-1] - 2


def potential(u):
    """Sine-Gordon on-site potential ``1 - cos u``."""
    return 1.0 - np.cos(u)


def nonlinear_ratio_and_slope(u_plus, u_minus):
    """Difference quotient of the potential and its ``u_plus`` derivative.

    With ``s`` the half-sum and ``d`` the half-difference,
    ``cos a - cos b = 2 sin(s) sin(d)`` turns the quotient into
    ``sin(s) sinc(d)``, which has no 0/0. Below ``|d| = 1e-4`` both sinc and
    its derivative switch to their Taylor series.
    """
    u_plus = np.asarray(u_plus, dtype=float)
    u_minus = np.asarray(u_minus, dtype=float)
    s = 0.5 * (u_plus + u_minus)
    d = 0.5 * (u_plus - u_minus)
    sin_s, cos_s = np.sin(s), np.cos(s)
    sin_d, cos_d = np.sin(d), np.cos(d)
    small = np.abs(d) < _SINC_SERIES
    safe = np.where(small, 1.0, d)
    d2 = d * d
    sinc = np.where(small, 1.0 - d2 / 6.0 + d2 * d2 / 120.0, sin_d / safe)
    dsinc = np.where(small, d * (d2 / 30.0 - 1.0 / 3.0), (d * cos_d - sin_d) / (safe * safe))
    return sin_s * sinc, 0.5 * (cos_s * sinc + sin_s * dsinc)


def nonlinear_ratio(u_plus, u_minus):
    """``(V(u+) - V(u-)) / (u+ - u-)``, equal to ``sin u`` when the arguments coincide."""
    return nonlinear_ratio_and_slope(u_plus, u_minus)[0]


def nonlinear_ratio_dplus(u_plus, u_minus):
    """Partial derivative of :func:`nonlinear_ratio` with respect to ``u_plus``."""
    return nonlinear_ratio_and_slope(u_plus, u_minus)[1]


def dispersion_omega2(k_wave, params: ModelParams):
    """Squared linear frequency of a lattice phonon with wavenumber ``k_wave``."""
    return params.m2 + 1.0 + 2.0 * params.c**2 * (1.0 - np.cos(k_wave))


def band_gap_edge(m2: float) -> float:
    """Lowest phonon frequency; driving below it lies in the forbidden gap."""
    if m2 + 1.0 <= 0:
        raise ValidationError(f"no band gap for m2={m2}")
    return math.sqrt(m2 + 1.0)


def continuum_threshold(c: float, Omega: float, m2: float = 0.0) -> float:
    """Supratransmission amplitude of the continuum limit, ``2c(1 - Omega^2)``."""
    edge = band_gap_edge(m2)
    if not 0.0 < Omega <= edge:
        raise ValidationError(f"Omega={Omega} lies outside the band gap (0, {edge}]")
    return 2.0 * c * (1.0 - Omega**2)


def sponge_gamma(n, N: int, N0: int, mode: str = "ramp"):
    """Absorbing-layer damping added at site ``n``.

    ``verbatim`` evaluates ``0.5 (1 + tanh((2n - N0 + N) / 6))`` as printed,
    which is essentially 1 everywhere for large ``N``. ``ramp`` flips the
    sign of ``N`` so the profile rises from 0 to 1 around ``n = (N + N0) / 2``.
    """
    n = np.asarray(n, dtype=float)
    if mode == "off":
        return np.zeros_like(n)
    if mode == "verbatim":
        arg = (2.0 * n - N0 + N) / 6.0
    elif mode == "ramp":
        arg = (2.0 * n - N - N0) / 6.0
    else:
        raise ValidationError(f"unknown sponge mode {mode!r}")
    return 0.5 * (1.0 + np.tanh(arg))


def uniform_equilibrium(m2: float, J: float, tol: float = 1e-12) -> float:
    """Spatially uniform rest state: root of ``m2 u + sin u = J`` by bisection."""

    def f(u):
        return m2 * u + math.sin(u) - J

    if f(0.0) == 0.0:
        return 0.0
    # expand a bracket symmetric about zero; the first sign change closest to 0 wins
    lo = hi = None
    width = 0.5
    for _ in range(60):
        grid = np.linspace(-width, width, 201)
        vals = np.array([f(x) for x in grid])
        idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]
        if idx.size:
            i = idx[np.argmin(np.abs(grid[idx]))]
            lo, hi = grid[i], grid[i + 1]
            break
        width *= 2.0
        if width > 1e6:
            break
    if lo is None:
        raise ValidationError(f"no root of m2*u + sin(u) = J for m2={m2}, J={J}")
    flo = f(lo)
    if flo == 0.0:
        return float(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0 or hi - lo < 1e-16 * max(1.0, abs(mid)):
            return float(mid)
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    if abs(f(mid)) > tol:
        raise ValidationError("bisection failed to reach tolerance")
    return float(mid)
