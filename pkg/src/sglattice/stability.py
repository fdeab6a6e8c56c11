"""Von Neumann analysis of the linearized schemes.

With ``V' = 0`` and ``J = 0`` a Fourier mode ``exp(i n xi)`` obeys the
two-level recurrence ``g U^{k+1} = f U^k - h U^{k-1}``, whose companion
matrix ``[[f/g, -h/g], [1, 0]]`` is the amplification matrix scanned here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .integrator import Scheme
from .model import ModelParams


@dataclass(frozen=True)
class SymbolTriple:
    f_hat: np.ndarray
    g_hat: np.ndarray
    h_hat: np.ndarray
    scheme: Scheme


@dataclass
class StabilityReport:
    scheme: Scheme
    dt: float
    xi_grid: np.ndarray
    rho: np.ndarray
    inf_norm: np.ndarray
    necessary_ok: bool
    sufficient_ok: bool
    corollary_ok: bool

    @property
    def max_rho(self) -> float:
        return float(np.max(self.rho))

    @property
    def max_inf_norm(self) -> float:
        return float(np.max(self.inf_norm))

    def summary(self) -> dict:
        return {
            "scheme": self.scheme.value,
            "dt": self.dt,
            "points": int(self.xi_grid.size),
            "max_rho": self.max_rho,
            "max_inf_norm": self.max_inf_norm,
            "necessary_ok": self.necessary_ok,
            "sufficient_ok": self.sufficient_ok,
            "corollary_ok": self.corollary_ok,
        }


def symbols(scheme, params: ModelParams, dt: float, xi) -> SymbolTriple:
    """Symbols ``f, g, h`` of the linearized scheme at wavenumbers ``xi``."""
    scheme = Scheme.parse(scheme)
    s2 = np.sin(0.5 * np.asarray(xi, dtype=float)) ** 2
    c2dt2 = params.c**2 * dt**2
    if scheme is Scheme.S1:
        f = np.full_like(s2, 2.0)
    else:
        f = 2.0 - 2.0 * c2dt2 * s2
    g = 1.0 + (c2dt2 + 2.0 * params.beta * dt) * s2 + 0.5 * (params.m2 * dt**2 + params.gamma * dt)
    h = 1.0 + (c2dt2 - 2.0 * params.beta * dt) * s2 + 0.5 * (params.m2 * dt**2 - params.gamma * dt)
    return SymbolTriple(f, g, h, scheme)


def eigenvalues(f_hat, g_hat, h_hat):
    """Roots of ``g l^2 - f l + h = 0`` as a pair of complex arrays.

    Real roots use the cancellation-free pair ``q / g`` and ``h / q`` with
    ``q = (f + sign(f) sqrt(disc)) / 2``.
    """
    f = np.asarray(f_hat, dtype=float)
    g = np.asarray(g_hat, dtype=float)
    h = np.asarray(h_hat, dtype=float)
    if np.any(g == 0):
        raise ZeroDivisionError("g_hat vanishes; the amplification matrix is undefined")
    f, g, h = np.broadcast_arrays(f, g, h)
    disc = f * f - 4.0 * g * h
    real = disc >= 0
    root = np.sqrt(np.abs(disc))

    sign = np.where(f >= 0, 1.0, -1.0)
    q = 0.5 * (f + sign * root)
    with np.errstate(divide="ignore", invalid="ignore"):
        big = q / g
        other = np.where(q != 0, h / np.where(q != 0, q, 1.0), 0.0)
    # f = 0 and disc = 0 only when h = 0: both roots vanish
    lam_plus = np.where(real, np.where(sign > 0, big, other), (f + 1j * root) / (2.0 * g))
    lam_minus = np.where(real, np.where(sign > 0, other, big), (f - 1j * root) / (2.0 * g))
    return lam_plus.astype(complex), lam_minus.astype(complex)


def amplification_matrix(f_hat: float, g_hat: float, h_hat: float) -> np.ndarray:
    return np.array([[f_hat / g_hat, -h_hat / g_hat], [1.0, 0.0]])


def predicates(params: ModelParams, dt: float) -> tuple:
    """Closed-form stability conditions ``(necessary, sufficient, corollary)``.

    ``necessary``: ``dt <= 1/c``. ``sufficient``: ``2/gamma < dt < sqrt(2)/c``,
    false when ``gamma = 0``. ``corollary``: ``2/gamma <= dt <= 1/c``.
    """
    inv_c = math.inf if params.c == 0 else 1.0 / params.c
    necessary = dt <= inv_c
    if params.gamma > 0:
        lower = 2.0 / params.gamma
        sufficient = lower < dt < math.sqrt(2.0) * inv_c
        corollary = lower <= dt <= inv_c
    else:
        sufficient = corollary = False
    return bool(necessary), bool(sufficient), bool(corollary)


def scan(scheme, params: ModelParams, dt: float, grid_points: int = 1025) -> StabilityReport:
    """Spectral radius and infinity norm of the amplification matrix on ``[0, pi]``."""
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    scheme = Scheme.parse(scheme)
    xi = np.linspace(0.0, math.pi, grid_points)
    sym = symbols(scheme, params, dt, xi)
    lp, lm = eigenvalues(sym.f_hat, sym.g_hat, sym.h_hat)
    rho = np.maximum(np.abs(lp), np.abs(lm))
    row0 = np.abs(sym.f_hat / sym.g_hat) + np.abs(sym.h_hat / sym.g_hat)
    inf_norm = np.maximum(row0, 1.0)
    return StabilityReport(scheme, dt, xi, rho, inf_norm, *predicates(params, dt))
