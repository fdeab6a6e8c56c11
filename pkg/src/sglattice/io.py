"""Run configuration files and CSV/JSON artifacts.

Configurations are flat JSON objects. Every number written to CSV uses 17
significant digits so a double survives the round trip unchanged.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from . import __version__
from .integrator import Scheme, SolverConfig
from .model import DriveSpec, ModelParams, ValidationError
from .supratransmission import SweepSpec


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


@dataclass(frozen=True)
class RunConfig:
    # model
    c: float = 5.0
    beta: float = 0.0
    gamma: float = 0.0
    m2: float = 0.0
    J: float = 0.0
    R: float = math.inf
    N: int = 100
    N0: int = 50
    sponge_mode: str = "off"
    # drive
    amplitude: float = 0.0
    omega: float = 0.8
    ramp_steps: int = 0
    cutoff_step: Optional[int] = None
    # solver
    scheme: str = "s1"
    dt: float = 0.05
    steps: int = 1000
    newton_tol: float = 1e-5
    newton_tol_audit: float = 1e-12
    newton_max_iter: int = 50
    # sweeps
    amin: float = 2.0
    amax: float = 5.5
    da: float = 0.05
    fmin: float = 0.1
    fmax: float = 0.9
    df: float = 0.1
    jump_factor: float = 5.0
    # output
    out: str = "run"
    stride: Optional[int] = None
    snapshot_stride: Optional[int] = None
    xi_points: int = 1025

    def __post_init__(self):
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.name in ("N", "N0", "ramp_steps", "steps", "newton_max_iter", "xi_points",
                          "stride", "snapshot_stride", "cutoff_step"):
                if value is None and f.name in ("stride", "snapshot_stride", "cutoff_step"):
                    continue
                if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                    if isinstance(value, float) and value.is_integer():
                        object.__setattr__(self, f.name, int(value))
                    else:
                        raise ValidationError(f"{f.name} must be an integer, got {value!r}")
        for name in ("stride", "snapshot_stride"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValidationError(f"{name} must be >= 1")
        if self.xi_points < 2:
            raise ValidationError("xi_points must be >= 2")
        # revalidate the physical invariants
        self.model_params()
        self.drive()
        self.solver_config()

    def model_params(self) -> ModelParams:
        return ModelParams(c=self.c, beta=self.beta, gamma=self.gamma, m2=self.m2, J=self.J,
                           R=self.R, N=self.N, N0=self.N0, sponge_mode=self.sponge_mode)

    def drive(self) -> DriveSpec:
        return DriveSpec(A=self.amplitude, Omega=self.omega, ramp_steps=self.ramp_steps,
                         cutoff_step=self.cutoff_step)

    def solver_config(self) -> SolverConfig:
        return SolverConfig(dt=self.dt, steps=self.steps, scheme=Scheme.parse(self.scheme),
                            newton_tol=self.newton_tol, newton_tol_audit=self.newton_tol_audit,
                            newton_max_iter=self.newton_max_iter)

    def amplitude_sweep(self) -> SweepSpec:
        return SweepSpec("amplitude", self.amin, self.amax, self.da, self.omega,
                         self.steps * self.dt, self.dt, self.model_params(),
                         Scheme.parse(self.scheme), self.jump_factor, self.ramp_steps,
                         self.newton_tol, self.newton_max_iter)

    def frequency_sweep(self) -> SweepSpec:
        return SweepSpec("frequency", self.fmin, self.fmax, self.df, self.amplitude,
                         self.steps * self.dt, self.dt, self.model_params(),
                         Scheme.parse(self.scheme), self.jump_factor, self.ramp_steps,
                         self.newton_tol, self.newton_max_iter)

    def frequency_grid(self) -> np.ndarray:
        count = int(math.floor((self.fmax - self.fmin) / self.df + 1e-9)) + 1
        return self.fmin + self.df * np.arange(count)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if math.isinf(d["R"]):
            d["R"] = "inf"
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ValidationError(f"unknown configuration keys: {', '.join(unknown)}")
        data = dict(data)
        if "R" in data and (data["R"] is None or str(data["R"]).lower() in ("inf", "infinity")):
            data["R"] = math.inf
        try:
            return cls(**data)
        except TypeError as exc:
            raise ValidationError(str(exc)) from None

    def replace(self, **changes) -> "RunConfig":
        return self.from_dict({**self.to_dict(), **changes})


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top level must be an object")
    return RunConfig.from_dict(data)


def dump_config(config: RunConfig, path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")


def write_csv(path, header: Iterable[str], rows: Iterable[Iterable]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


ENERGY_COLUMNS = ("step", "time", "E", "rate_lhs", "rate_rhs", "boundary_flux",
                  "diss_beta", "diss_gamma", "I_out")


def write_energy(path, ledger) -> None:
    cols = ledger.as_arrays()
    rows = zip(cols["step"], cols["time"], cols["E"], cols["rate_lhs"], cols["rate_rhs"],
               cols["boundary_flux"], cols["dissipation_beta"], cols["dissipation_gamma"],
               cols["output_current"])
    write_csv(path, ENERGY_COLUMNS, rows)


def write_snapshots(path, snapshots) -> None:
    def rows():
        for step, frame in zip(snapshots.steps, snapshots.frames):
            for n, value in enumerate(frame, start=1):
                yield step, n, value
    write_csv(path, ("step", "n", "u"), rows())


def write_sweep(path, result) -> None:
    flags = [i == result.index for i in range(result.grid.size)]
    write_csv(path, ("value", "E_final", "is_threshold"), zip(result.grid, result.energies, flags))


def write_stability(path, report) -> None:
    write_csv(path, ("xi", "rho", "inf_norm"), zip(report.xi_grid, report.rho, report.inf_norm))


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, command: str, config: RunConfig, artifacts: Iterable[str],
                   extra: Optional[dict] = None) -> Path:
    out_dir = Path(out_dir)
    manifest = {
        "command": command,
        "package_version": __version__,
        "scheme": config.scheme,
        "config": config.to_dict(),
        "artifacts": {name: sha256(out_dir / name) for name in sorted(artifacts)},
    }
    if extra:
        manifest.update(extra)
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return [_json_default(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def ensure_dir(path) -> Path:
    path = Path(path)
    os.makedirs(path, exist_ok=True)
    return path
