"""Independent reference computations shared by the unit and acceptance tests."""

import math

import numpy as np
from scipy.integrate import solve_ivp

from sglattice.integrator import Scheme, SnapshotRecorder, SolverConfig, simulate
from sglattice.model import DriveSpec, LatticeState, ModelParams


def termwise_residual(scheme, p, dt, up, uc, un, phi):
    """Loop transcription of the scheme equations, ghosts solved from the constraints."""
    un = np.array(un, dtype=float)
    gap_prev = up[0] - up[1]
    gap_next = (2.0 * phi * dt - (p.c**2 * dt - p.beta) * gap_prev) / (p.c**2 * dt + p.beta)
    un[0] = un[1] + gap_next
    un[-1] = un[-2]
    gam = p.site_damping()
    out = np.zeros(p.N)
    for n in range(1, p.N + 1):
        lp = up[n + 1] - 2 * up[n] + up[n - 1]
        lc = uc[n + 1] - 2 * uc[n] + uc[n - 1]
        ln = un[n + 1] - 2 * un[n] + un[n - 1]
        if scheme is Scheme.S1:
            elastic = p.c**2 / 2 * (ln + lp)
        else:
            elastic = p.c**2 / 4 * (ln + 2 * lc + lp)
        if un[n] == up[n]:
            ratio = math.sin(un[n])
        else:
            ratio = ((1 - math.cos(un[n])) - (1 - math.cos(up[n]))) / (un[n] - up[n])
        out[n - 1] = ((un[n] - 2 * uc[n] + up[n]) / dt**2 - elastic
                      - p.beta / (2 * dt) * (ln - lp)
                      + gam[n - 1] / (2 * dt) * (un[n] - up[n])
                      + p.m2 / 2 * (un[n] + up[n]) + ratio - p.J)
    return out



def single_junction_error(scheme, dt, T=10.0):
    """Max error against an adaptive ODE solution of u'' + 0.1 u' + u + sin u = 0."""
    def rhs(t, y):
        return [y[1], -0.1 * y[1] - y[0] - math.sin(y[0])]

    ts = np.arange(0, int(round(T / dt)) + 1) * dt
    sol = solve_ivp(rhs, (0, T), [1.0, 0.0], t_eval=ts, rtol=1e-12, atol=1e-13, method="DOP853")
    exact = sol.y[0]
    p = ModelParams(c=0.0, gamma=0.1, m2=1.0, N=1, N0=1)
    st = LatticeState(np.full(3, exact[0]), np.full(3, exact[1]), np.full(3, exact[1]), k=1, dt=dt)
    cfg = SolverConfig(dt=dt, steps=ts.size - 2, scheme=scheme, newton_tol=1e-13)
    rec = SnapshotRecorder(stride=1)
    simulate(p, DriveSpec(A=0.0), cfg, [rec], state=st)
    numeric = np.array([f[0] for f in rec.frames])
    return float(np.max(np.abs(numeric - exact[2:])))
