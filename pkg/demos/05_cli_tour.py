"""The command line, end to end, in a temporary directory.

Walks the file-based workflow: write a scenario definition, draw a
replicate, estimate the precision matrix at two likelihood powers, and
compare both fits to the truth with the divergence subcommand. Each step
shells out exactly as a user would.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

from fghs import Scenario, save_scenario


def run(*args):
    cmd = [sys.executable, "-m", "fghs.cli", *args]
    print("$ fghs " + " ".join(args))
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.stdout:
        print(proc.stdout, end="")
    if proc.returncode != 0:
        print(proc.stderr, end="")
        raise SystemExit(f"step failed with exit code {proc.returncode}")
    print()


with tempfile.TemporaryDirectory() as tmp:
    work = Path(tmp)
    scenario = Scenario(
        name="cli-demo",
        p=8,
        n=60,
        truth="sparse",
        s=5,
        magnitude_lo=0.2,
        magnitude_hi=0.6,
        law="gaussian",
        replicates=1,
        master_seed=42,
    )
    sc_file = work / "demo.scenario"
    save_scenario(sc_file, scenario)
    print(f"Scenario written to {sc_file.name}:")
    print(sc_file.read_text())

    run("generate", "--scenario", str(sc_file), "--replicate", "0",
        "--out", str(work / "y.txt"), "--truth-out", str(work / "omega0.txt"))

    for alpha in ("1.0", "0.5"):
        run("estimate", "--data", str(work / "y.txt"), "--alpha", alpha,
            "--iters", "600", "--burnin", "100", "--seed", "1",
            "--out", str(work / f"omega_hat_{alpha}.txt"))

    print("How far is each fit from the truth?")
    for alpha in ("1.0", "0.5"):
        run("diverge", "--a", str(work / f"omega_hat_{alpha}.txt"),
            "--b", str(work / "omega0.txt"), "--alpha", "0.5")
