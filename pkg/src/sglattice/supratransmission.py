"""Energy-jump detection of the supratransmission threshold.

A sweep runs one lattice per grid value (amplitude or frequency) and keeps
the total energy at the last step. The threshold is the first grid value
whose energy exceeds ``jump_factor`` times everything seen before it.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .energy import total_energy
from .integrator import Scheme, SimulationError, SolverConfig, simulate_ensemble
from .model import DriveSpec, ModelParams, ValidationError

BASELINE_FLOOR = 1e-12
THREADS_ENV = "SG_LATTICE_THREADS"


@dataclass(frozen=True)
class SweepSpec:
    """One-dimensional sweep of the drive.

    ``fixed`` is the drive parameter held constant: the frequency for an
    amplitude sweep, the amplitude for a frequency sweep.
    """

    variable: str = "amplitude"
    lo: float = 2.0
    hi: float = 5.5
    step: float = 0.05
    fixed: float = 0.8
    sim_time: float = 600.0
    dt: float = 0.05
    params: ModelParams = field(default_factory=lambda: ModelParams(c=5.0, N=100, N0=50,
                                                                    sponge_mode="ramp"))
    scheme: Scheme = Scheme.S1
    jump_factor: float = 5.0
    ramp_steps: int = 0
    newton_tol: float = 1e-5
    newton_max_iter: int = 50

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if self.variable not in ("amplitude", "frequency"):
            raise ValidationError(f"variable must be amplitude or frequency, got {self.variable!r}")
        if not self.lo < self.hi:
            raise ValidationError("sweep needs lo < hi")
        if not self.step > 0:
            raise ValidationError("sweep step must be > 0")
        if not self.jump_factor > 1:
            raise ValidationError("jump_factor must exceed 1")
        if not self.sim_time > 0:
            raise ValidationError("sim_time must be > 0")
        edge = self.params.gap_edge
        omegas = self.grid() if self.variable == "frequency" else np.array([self.fixed])
        if np.any(omegas <= 0) or np.any(omegas >= edge):
            raise ValidationError(f"driving frequencies must lie in the gap (0, {edge:.6g})")
        amps = self.grid() if self.variable == "amplitude" else np.array([self.fixed])
        if np.any(amps < 0):
            raise ValidationError("amplitudes must be >= 0")

    def grid(self) -> np.ndarray:
        count = int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1
        return self.lo + self.step * np.arange(count)

    @property
    def steps(self) -> int:
        return int(round(self.sim_time / self.dt))

    def solver_config(self) -> SolverConfig:
        return SolverConfig(dt=self.dt, steps=self.steps, scheme=self.scheme,
                            newton_tol=self.newton_tol, newton_max_iter=self.newton_max_iter)

    def drive_for(self, value: float) -> DriveSpec:
        if self.variable == "amplitude":
            return DriveSpec(A=float(value), Omega=self.fixed, ramp_steps=self.ramp_steps)
        return DriveSpec(A=self.fixed, Omega=float(value), ramp_steps=self.ramp_steps)

    def replace(self, **changes) -> "SweepSpec":
        return replace(self, **changes)


@dataclass
class ThresholdResult:
    grid: np.ndarray
    energies: np.ndarray
    threshold: Optional[float]
    jump_ratio: Optional[float]
    index: Optional[int] = None

    @property
    def detected(self) -> bool:
        return self.threshold is not None


def detect_threshold(grid, energies, jump_factor: float = 5.0) -> ThresholdResult:
    """First grid value whose energy is ``jump_factor`` times the running maximum."""
    grid = np.asarray(grid, dtype=float)
    energies = np.asarray(energies, dtype=float)
    running = max(energies[0], BASELINE_FLOOR) if energies.size else BASELINE_FLOOR
    for i in range(1, energies.size):
        if energies[i] >= jump_factor * running:
            return ThresholdResult(grid, energies, float(grid[i]), float(energies[i] / running), i)
        running = max(running, energies[i])
    return ThresholdResult(grid, energies, None, None, None)


def final_energies(spec: SweepSpec, values) -> np.ndarray:
    """Run one lattice per value as a single ensemble; energy after the last step."""
    config = spec.solver_config()
    drives = [spec.drive_for(v) for v in values]
    result = simulate_ensemble(spec.params, drives, config)
    st = result.state
    return np.asarray(total_energy(spec.scheme, spec.params, spec.dt, st.u_prev, st.u_curr))


def _energies_chunk(args):
    spec, values = args
    try:
        return final_energies(spec, values)
    except SimulationError as exc:
        raise SimulationError(exc.step, RuntimeError(f"grid values {list(values)}: {exc.cause}"))


def default_workers() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValidationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return 1


def sweep(spec: SweepSpec, workers: Optional[int] = None,
          runner: Optional[Callable[[SweepSpec, np.ndarray], Sequence[float]]] = None
          ) -> ThresholdResult:
    """Final energy at every grid value and the detected threshold.

    ``runner(spec, values) -> energies`` replaces the simulations (for tests
    or cached data). With ``workers > 1`` the grid is split into contiguous
    chunks run in separate processes; each lattice evolves independently so
    the energies do not depend on the split.
    """
    grid = spec.grid()
    if runner is not None:
        energies = np.asarray(runner(spec, grid), dtype=float)
    else:
        workers = default_workers() if workers is None else max(1, int(workers))
        workers = min(workers, grid.size)
        if workers == 1:
            energies = _energies_chunk((spec, grid))
        else:
            chunks = np.array_split(grid, workers)
            with ProcessPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(_energies_chunk, [(spec, c) for c in chunks]))
            energies = np.concatenate(parts)
    return detect_threshold(grid, energies, spec.jump_factor)


@dataclass
class DiagramRow:
    variant: dict
    omegas: np.ndarray
    thresholds: list
    sweeps: list


def frequency_diagram(spec: SweepSpec, omegas: Sequence[float],
                      variants: Sequence[dict] = ({},), workers: Optional[int] = None,
                      runner=None) -> list:
    """Threshold amplitude versus driving frequency for each parameter variant.

    ``spec`` must be an amplitude sweep; each variant is a dict of
    :class:`ModelParams` overrides such as ``{"gamma": 0.3}``.
    """
    if spec.variable != "amplitude":
        raise ValidationError("frequency_diagram needs an amplitude sweep spec")
    rows = []
    for variant in variants:
        params = spec.params.replace(**variant) if variant else spec.params
        thresholds, sweeps = [], []
        for omega in omegas:
            sub = spec.replace(params=params, fixed=float(omega))
            res = sweep(sub, workers=workers, runner=runner)
            thresholds.append(res.threshold)
            sweeps.append(res)
        rows.append(DiagramRow(dict(variant), np.asarray(omegas, dtype=float), thresholds, sweeps))
    return rows


@dataclass
class CrossCheck:
    s1: ThresholdResult
    s2: ThresholdResult
    split: Optional[float]
    below_max_abs: float
    below_max_rel: float
    above_max_abs: float

    @property
    def difference(self) -> np.ndarray:
        return np.abs(self.s1.energies - self.s2.energies)


def scheme_cross_check(spec: SweepSpec, workers: Optional[int] = None, runner=None,
                       results: Optional[tuple] = None) -> CrossCheck:
    """Compare the final energies of both schemes on the same grid.

    Grid values below the smaller detected threshold count as "below"; when
    neither scheme detects one, the whole grid is below. ``results`` may pass
    in an already computed ``(s1, s2)`` pair.
    """
    if results is None:
        r1 = sweep(spec.replace(scheme=Scheme.S1), workers=workers, runner=runner)
        r2 = sweep(spec.replace(scheme=Scheme.S2), workers=workers, runner=runner)
    else:
        r1, r2 = results
    found = [r.threshold for r in (r1, r2) if r.threshold is not None]
    split = min(found) if found else None
    grid = r1.grid
    below = grid < split if split is not None else np.ones(grid.size, dtype=bool)
    diff = np.abs(r1.energies - r2.energies)
    scale = np.maximum(np.abs(r1.energies), BASELINE_FLOOR)
    below_abs = float(diff[below].max()) if below.any() else 0.0
    below_rel = float((diff / scale)[below].max()) if below.any() else 0.0
    above_abs = float(diff[~below].max()) if (~below).any() else 0.0
    return CrossCheck(r1, r2, split, below_abs, below_rel, above_abs)
