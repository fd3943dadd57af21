import shutil
import subprocess
import sys

import pytest

TINY_GRIDS = ["--grid-omega", "6.8:7.3:24", "--grid-t", "0:250:20"]

# Desk-scale images keep the simulator's default drive grid but extend
# the pulse-duration window to 2 us: decay envelopes of the sampled
# T1/Tphi range (0.5-20 us) are barely visible within 500 ns, and the
# slowest cross-resonance oscillations need the longer window too.
DESK_GRIDS = ["--grid-t", "0:2000:100"]
DESK_TIME_GRID = [0.0, 2000.0, 100]


def simulator_command():
    exe = shutil.which("tls-spectro")
    if exe:
        return [exe]
    return [sys.executable, "-m", "tls_spectro.cli"]


def generate_dataset(out_dir, n, seed, noise, grids=()):
    """Invoke the simulator CLI; default grids unless overridden."""
    command = simulator_command() + [
        "generate",
        *grids,
        "--n", str(n),
        "--seed", str(seed),
        "--noise", noise,
        "--out", str(out_dir),
        "--parallelism", "2",
    ]
    proc = subprocess.run(command, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"dataset generation failed: {proc.stderr}")
    return out_dir


@pytest.fixture(scope="session")
def tiny_clean_dataset(tmp_path_factory):
    """64 small clean maps generated through the simulator CLI."""
    out = tmp_path_factory.mktemp("tiny") / "clean"
    return generate_dataset(out, n=64, seed=404, noise="clean", grids=TINY_GRIDS)
