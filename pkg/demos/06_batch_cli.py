"""Driving the batch front-end from Python.

The same runs are available from the shell as ``sglattice <command>``. A JSON
file holds the configuration and flags override individual keys.
"""

import json
import tempfile
from pathlib import Path

from sglattice import io
from sglattice.cli import run_cli

work = Path(tempfile.mkdtemp())
config = io.RunConfig(c=5.0, N=40, N0=20, sponge_mode="ramp", amplitude=2.0, steps=400)
io.dump_config(config, work / "run.json")

run_cli(["simulate", "--config", str(work / "run.json"), "--out", str(work / "sim")])
run_cli(["stability", "--scheme", "s2", "--dt", "0.2", "--out", str(work / "stab")])

manifest = json.loads((work / "sim" / "manifest.json").read_text())
print("artifacts:", manifest["artifacts"])
print((work / "sim" / "energy.csv").read_text().splitlines()[:3])
print("missing config exit code:", run_cli(["simulate", "--config", str(work / "nope.json")]))
