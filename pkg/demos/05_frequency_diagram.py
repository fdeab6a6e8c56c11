"""Threshold amplitude against driving frequency, with and without damping.

A coarse desk-scale version of the threshold diagram. Frequencies close to
the gap edge need very little forcing; deep in the gap the threshold grows
roughly like the continuum law 2c(1 - Omega^2). With damping the energy
curve rises gradually, and the factor-five jump rule may find no threshold
on the grid at all; such entries print as None.
"""

import numpy as np

from sglattice import ModelParams, SweepSpec, continuum_threshold, frequency_diagram

spec = SweepSpec(lo=0.2, hi=8.0, step=0.2, sim_time=200.0, ramp_steps=1000,
                 params=ModelParams(c=5.0, N=60, N0=30, sponge_mode="ramp"))
omegas = np.array([0.6, 0.8, 0.95])
rows = frequency_diagram(spec, omegas, variants=({}, {"gamma": 0.3}))
for row in rows:
    label = row.variant or "undamped"
    for omega, threshold in zip(row.omegas, row.thresholds):
        print(f"{label!s:16s} Omega={omega:.2f}: threshold {threshold}, "
              f"continuum {continuum_threshold(5.0, omega):.2f}")
