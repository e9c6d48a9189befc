import subprocess
import sys

import pytest


def wiresynth(*args):
    """Invoke the primary toolkit strictly through its CLI."""
    proc = subprocess.run(
        [sys.executable, "-m", "wiresynth.cli", *args],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


@pytest.fixture(scope="session")
def mini_dataset(tmp_path_factory):
    """2 simple scenes, informative renders, token sequences."""
    root = tmp_path_factory.mktemp("mini") / "data"
    wiresynth("gen", "--profile", "simple", "--count", "2", "--seed", "31", "--out", str(root))
    wiresynth("render", "--in", str(root), "--mode", "informative")
    wiresynth("tokenize", "--in", str(root))
    return root
