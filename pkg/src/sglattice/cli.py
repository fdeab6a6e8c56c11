"""Batch front-end: ``sglattice <command> [--config file] [overrides]``.

Exit status is 0 on success, 1 when the configuration is invalid (nothing is
written) and 2 when the solver or the file system fails.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import io
from .energy import EnergyRecorder, audit_trajectory
from .integrator import SnapshotRecorder, SolverError, simulate
from .model import ValidationError
from .stability import scan
from .supratransmission import frequency_diagram, sweep

log = logging.getLogger("sglattice")

COMMANDS = ("simulate", "sweep-amplitude", "sweep-frequency", "stability", "energy-audit")

# flag name -> config key
OVERRIDES = {
    "scheme": "scheme", "out": "out", "dt": "dt", "steps": "steps",
    "amplitude": "amplitude", "omega": "omega",
    "amin": "amin", "amax": "amax", "da": "da",
    "fmin": "fmin", "fmax": "fmax", "df": "df",
    "xi_points": "xi_points", "stride": "stride",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sglattice",
                                     description="Driven sine-Gordon lattice solver")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--scheme", choices=("s1", "s2"))
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--dt", type=float)
    parser.add_argument("--steps", type=int)
    parser.add_argument("--amplitude", type=float)
    parser.add_argument("--omega", type=float)
    parser.add_argument("--amin", type=float)
    parser.add_argument("--amax", type=float)
    parser.add_argument("--da", type=float)
    parser.add_argument("--fmin", type=float)
    parser.add_argument("--fmax", type=float)
    parser.add_argument("--df", type=float)
    parser.add_argument("--xi-points", dest="xi_points", type=int)
    parser.add_argument("--stride", type=int)
    parser.add_argument("--workers", type=int, help="processes for sweeps")
    parser.add_argument("--diagram", action="store_true",
                        help="sweep-frequency: threshold amplitude per frequency")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def resolve_config(args) -> io.RunConfig:
    config = io.load_config(args.config) if args.config else io.RunConfig()
    changes = {key: getattr(args, flag) for flag, key in OVERRIDES.items()
               if getattr(args, flag) is not None}
    if changes:
        config = config.replace(**changes)
    return config


def _stride(config: io.RunConfig, default: int) -> int:
    return config.stride if config.stride is not None else default


def cmd_simulate(config, args):
    params, solver = config.model_params(), config.solver_config()
    stride = _stride(config, 20)
    energy = EnergyRecorder(solver.scheme, params, solver.dt, stride=stride)
    snaps = SnapshotRecorder(stride=config.snapshot_stride or stride)
    result = simulate(params, config.drive(), solver, [energy, snaps])
    out = io.ensure_dir(config.out)
    io.write_energy(out / "energy.csv", energy.ledger)
    io.write_snapshots(out / "snapshots.csv", snaps)
    io.write_manifest(out, "simulate", config, ["energy.csv", "snapshots.csv"],
                      {"max_newton_iters": result.max_newton_iters})
    log.info("E_final = %s", energy.ledger.E[-1] if len(energy.ledger) else 0.0)


def cmd_energy_audit(config, args):
    params, solver = config.model_params(), config.solver_config()
    stride = _stride(config, 1)
    energy = EnergyRecorder(solver.scheme, params, solver.dt, stride=stride)
    result = simulate(params, config.drive(), solver, [energy], tol=solver.newton_tol_audit)
    report = audit_trajectory(result) if stride == 1 else None
    out = io.ensure_dir(config.out)
    io.write_energy(out / "energy.csv", energy.ledger)
    audit = {} if report is None else {k: v for k, v in vars(report).items()}
    (out / "audit.json").write_text(json.dumps(audit, indent=2, sort_keys=True,
                                               default=io._json_default) + "\n")
    io.write_manifest(out, "energy-audit", config, ["energy.csv", "audit.json"], {"audit": audit})
    if report is not None:
        print(f"max |rate_lhs - rate_rhs| = {report.max_identity_defect:.3e}")


def cmd_sweep_amplitude(config, args):
    spec = config.amplitude_sweep()
    result = sweep(spec, workers=args.workers)
    out = io.ensure_dir(config.out)
    io.write_sweep(out / "sweep.csv", result)
    io.write_manifest(out, "sweep-amplitude", config, ["sweep.csv"],
                      {"grid": result.grid, "threshold": result.threshold,
                       "jump_ratio": result.jump_ratio})
    print(f"threshold = {result.threshold}")


def cmd_sweep_frequency(config, args):
    out_files = []
    if args.diagram:
        spec = config.amplitude_sweep()
        omegas = config.frequency_grid()
        rows = frequency_diagram(spec, omegas, workers=args.workers)
        out = io.ensure_dir(config.out)
        io.write_csv(out / "diagram.csv", ("omega", "threshold"),
                     ((w, np.nan if t is None else t) for w, t in zip(omegas, rows[0].thresholds)))
        out_files.append("diagram.csv")
        extra = {"grid": omegas, "thresholds": rows[0].thresholds}
    else:
        spec = config.frequency_sweep()
        result = sweep(spec, workers=args.workers)
        out = io.ensure_dir(config.out)
        io.write_sweep(out / "sweep.csv", result)
        out_files.append("sweep.csv")
        extra = {"grid": result.grid, "threshold": result.threshold}
    io.write_manifest(out, "sweep-frequency", config, out_files, extra)


def cmd_stability(config, args):
    report = scan(config.scheme, config.model_params(), config.dt, config.xi_points)
    out = io.ensure_dir(config.out)
    io.write_stability(out / "stability.csv", report)
    io.write_manifest(out, "stability", config, ["stability.csv"], {"report": report.summary()})
    print(json.dumps(report.summary(), sort_keys=True))


HANDLERS = {
    "simulate": cmd_simulate,
    "sweep-amplitude": cmd_sweep_amplitude,
    "sweep-frequency": cmd_sweep_frequency,
    "stability": cmd_stability,
    "energy-audit": cmd_energy_audit,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = resolve_config(args)
        if args.command in ("sweep-amplitude",):
            config.amplitude_sweep()
        elif args.command == "sweep-frequency":
            config.amplitude_sweep() if args.diagram else config.frequency_sweep()
    except ValidationError as exc:
        print(f"sglattice: invalid configuration: {exc}", file=sys.stderr)
        return 1
    try:
        HANDLERS[args.command](config, args)
    except ValidationError as exc:
        print(f"sglattice: invalid configuration: {exc}", file=sys.stderr)
        return 1
    except (SolverError, OSError) as exc:
        print(f"sglattice: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
