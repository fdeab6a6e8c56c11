"""Acceptance criteria, each checked at its stated tolerance.

Every test prints one PASS/FAIL line; the lines are collected again in the
terminal summary. Sweeps are shared through module-scoped fixtures.
"""

import time

import numpy as np
import pytest

from sglattice.energy import EnergyRecorder, audit_trajectory
from sglattice.integrator import (
    Scheme, SolverConfig, crout_solve, dense_from_bands, jacobian_tridiagonal, residual, simulate,
)
from sglattice.model import DriveSpec, ModelParams
from sglattice.stability import scan
from sglattice.supratransmission import SweepSpec, scheme_cross_check, sweep

from oracles import single_junction_error, termwise_residual

SCHEMES = (Scheme.S1, Scheme.S2)
IDENTITY = ModelParams(c=2.0, beta=0.1, gamma=0.2, m2=0.5, J=0.1, N=16, N0=16)


def identity_run(scheme):
    cfg = SolverConfig(dt=0.05, steps=200, scheme=scheme, newton_tol=1e-12)
    rec = EnergyRecorder(scheme, IDENTITY, 0.05)
    t0 = time.perf_counter()
    r = simulate(IDENTITY, DriveSpec(A=1.0, Omega=0.6), cfg, [rec], tol=1e-12)
    return audit_trajectory(r), time.perf_counter() - t0


@pytest.mark.parametrize("number,scheme", [(1, Scheme.S1), (2, Scheme.S2)])
def test_energy_rate_identity(verdict, number, scheme):
    simulate(IDENTITY, DriveSpec(A=1.0), SolverConfig(dt=0.05, steps=2, scheme=scheme))  # warm jit
    rep, seconds = identity_run(scheme)
    ok = rep.max_scaled_defect <= 1e-7 and seconds < 1.0
    verdict(number, ok, f"{scheme.value}: max |lhs-rhs|/max(1,|E|) = {rep.max_scaled_defect:.2e}"
                        f" (<= 1e-7), {seconds:.2f} s (< 1 s)")


def shutoff_audit(scheme, gamma):
    p = ModelParams(c=2.0, gamma=gamma, m2=0.5, N=32, N0=32)
    cfg = SolverConfig(dt=0.05, steps=2100, scheme=scheme, newton_tol=1e-12)
    rec = EnergyRecorder(scheme, p, 0.05)
    r = simulate(p, DriveSpec(A=1.0, Omega=0.8, cutoff_step=100), cfg, [rec], tol=1e-12)
    return audit_trajectory(r)


@pytest.fixture(scope="module")
def shutoff_runs():
    return {(s, g): shutoff_audit(s, g) for s in SCHEMES for g in (0.0, 0.2)}


def test_conservation_after_shutoff(verdict, shutoff_runs):
    drift = {s: shutoff_runs[(s, 0.0)].shutoff_drift for s in SCHEMES}
    ok = all(d <= 1e-9 for d in drift.values())
    verdict(3, ok, "max drift after shutoff " + ", ".join(
        f"{s.value}={d:.2e}" for s, d in drift.items()) + " (<= 1e-9)")


def test_dissipation_sign(verdict, shutoff_runs):
    mono = {s: shutoff_runs[(s, 0.2)].shutoff_nonincreasing for s in SCHEMES}
    verdict(4, all(mono.values()), "E non-increasing after shutoff with gamma=0.2: " + ", ".join(
        f"{s.value}={m}" for s, m in mono.items()))


THRESHOLD_SPEC = SweepSpec(variable="amplitude", lo=2.0, hi=5.5, step=0.05, fixed=0.8,
                           sim_time=600.0, dt=0.05,
                           params=ModelParams(c=5.0, N=100, N0=50, sponge_mode="ramp"))


@pytest.fixture(scope="module")
def undamped_sweeps():
    t0 = time.perf_counter()
    res = {s: sweep(THRESHOLD_SPEC.replace(scheme=s)) for s in SCHEMES}
    return res, time.perf_counter() - t0


@pytest.fixture(scope="module")
def damped_sweeps():
    params = THRESHOLD_SPEC.params.replace(gamma=0.3)
    return {s: sweep(THRESHOLD_SPEC.replace(scheme=s, params=params)) for s in SCHEMES}


def test_threshold_reproduction(verdict, undamped_sweeps):
    res, seconds = undamped_sweeps
    t1, t2 = res[Scheme.S1].threshold, res[Scheme.S2].threshold
    inside = all(t is not None and 3.4 <= t <= 4.0 for t in (t1, t2))
    agree = t1 is not None and t2 is not None and abs(t1 - t2) <= 0.05 + 1e-9
    verdict(5, inside and agree, f"thresholds s1={t1}, s2={t2} (in [3.4, 4.0], agree within one"
                                 f" step), both sweeps {seconds:.0f} s")


def test_scheme_agreement_below_threshold(verdict, undamped_sweeps):
    res, _ = undamped_sweeps
    grid = res[Scheme.S1].grid
    below = grid <= 3.3 + 1e-9
    e1, e2 = res[Scheme.S1].energies[below], res[Scheme.S2].energies[below]
    rel = float(np.max(np.abs(e1 - e2) / np.abs(e1)))
    cc = scheme_cross_check(THRESHOLD_SPEC, results=(res[Scheme.S1], res[Scheme.S2]))
    verdict(6, rel <= 1e-6, f"max relative |E_s1 - E_s2| for A in [2, 3.3] = {rel:.2e} (<= 1e-6);"
                            f" below the detected threshold {cc.below_max_rel:.2e}")


def test_damping_shift(verdict, undamped_sweeps, damped_sweeps):
    res, _ = undamped_sweeps
    parts, ok = [], True
    for s in SCHEMES:
        t0, t3 = res[s].threshold, damped_sweeps[s].threshold
        ok &= t0 is not None and t3 is not None and t3 > t0
        parts.append(f"{s.value}: {t0} -> {t3}")
    verdict(7, ok, "threshold gamma=0 -> gamma=0.3 strictly larger; " + ", ".join(parts))


def test_stability_scan(verdict):
    rng = np.random.default_rng(20240)
    worst_rho = 0.0
    for _ in range(100):
        c = rng.uniform(0.5, 10.0)
        p = ModelParams(c=c, beta=rng.uniform(0, 1), gamma=rng.uniform(0, 2), m2=rng.uniform(0, 2))
        dt = rng.uniform(0.01, 1.0) / c
        worst_rho = max(worst_rho, scan("s2", p, dt, 1025).max_rho)
    worst_norm = 0.0
    for _ in range(100):
        c = rng.uniform(0.05, 2.0)
        dt = rng.uniform(0.05, 1.0) / c
        gamma = 2.0 / dt * (1.0 + rng.uniform(0, 1))
        p = ModelParams(c=c, beta=rng.uniform(0, 1), gamma=gamma, m2=rng.uniform(0, 2))
        worst_norm = max(worst_norm, scan("s1", p, dt, 1025).max_inf_norm)
    ok = worst_rho <= 1 + 1e-12 and worst_norm <= 1 + 1e-12
    verdict(8, ok, f"s2 max rho over 100 cases = {worst_rho:.15f}; s1 max inf-norm under"
                   f" 2/gamma <= dt <= 1/c = {worst_norm:.15f} (<= 1 + 1e-12)")


def test_norm_sufficiency(verdict):
    rng = np.random.default_rng(7)
    worst = 0.0
    for scheme in ("s1", "s2"):
        for _ in range(50):
            c = rng.uniform(0.1, 5.0)
            dt = rng.uniform(0.05, 1.0) / c
            gamma = 2.0 / dt * (1.0 + rng.uniform(0, 2))
            p = ModelParams(c=c, beta=rng.uniform(0, 1), gamma=gamma, m2=rng.uniform(0, 2))
            worst = max(worst, scan(scheme, p, dt, 1025).max_inf_norm)
    rep = scan("s1", ModelParams(c=5.0), 0.01, 1025)
    ok = worst <= 1 + 1e-12 and rep.max_inf_norm > 1 and rep.max_rho <= 1 + 1e-12
    verdict(9, ok, f"gamma*dt/2 >= 1: max inf-norm {worst:.15f}; gamma=beta=0, dt=0.01:"
                   f" max inf-norm {rep.max_inf_norm:.4f} > 1 with max rho {rep.max_rho:.15f}")


def test_convergence_order(verdict):
    ratios = {s: single_junction_error(s, 0.1) / single_junction_error(s, 0.05) for s in SCHEMES}
    ok = all(3.5 <= r <= 4.5 for r in ratios.values())
    verdict(10, ok, "error ratio under dt halving " + ", ".join(
        f"{s.value}={r:.3f}" for s, r in ratios.items()) + " (in [3.5, 4.5])")


def test_oracle_equivalence(verdict):
    rng = np.random.default_rng(11)
    worst_res = worst_jac = worst_crout = 0.0
    for scheme in SCHEMES:
        p = ModelParams(c=1.3, beta=0.2, gamma=0.1, m2=0.4, J=0.05, N=6, N0=6)
        up, uc, un = (0.5 * rng.standard_normal(8) for _ in range(3))
        got = residual(scheme, p, 0.05, up, uc, un, 0.7)
        want = termwise_residual(scheme, p, 0.05, up, uc, un, 0.7)
        worst_res = max(worst_res, float(np.max(np.abs(got - want) / np.maximum(1, np.abs(want)))))
        jac = dense_from_bands(*jacobian_tridiagonal(scheme, p, 0.05, up, un))
        h = 1e-6
        fd = np.zeros((6, 6))
        for j in range(1, 7):
            e = np.zeros(8)
            e[j] = h
            fd[:, j - 1] = (residual(scheme, p, 0.05, up, uc, un + e, 0.7)
                            - residual(scheme, p, 0.05, up, uc, un - e, 0.7)) / (2 * h)
        worst_jac = max(worst_jac, float(np.max(np.abs(jac - fd)) / np.max(np.abs(fd))))
    for n in (3, 10, 50, 200):
        lower, upper = rng.uniform(-1, 1, n), rng.uniform(-1, 1, n)
        lower[0] = upper[-1] = 0.0
        diag = np.abs(lower) + np.abs(upper) + rng.uniform(0.5, 2, n)
        rhs = rng.standard_normal(n)
        x = crout_solve((lower, diag, upper), rhs)
        ref = np.linalg.solve(dense_from_bands(lower, diag, upper), rhs)
        worst_crout = max(worst_crout, float(np.max(np.abs(x - ref))))
    ok = worst_res <= 1e-12 and worst_jac <= 1e-6 and worst_crout <= 1e-10
    verdict(11, ok, f"residual vs termwise {worst_res:.1e} (<= 1e-12), Jacobian vs FD"
                    f" {worst_jac:.1e} (<= 1e-6 rel), crout vs dense {worst_crout:.1e} (<= 1e-10)")
