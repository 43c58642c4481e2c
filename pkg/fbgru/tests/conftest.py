import os
import subprocess
import sys

import pytest

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "..", "..", "fixtures")


@pytest.fixture(scope="session")
def fixture_dir():
    assert os.path.isdir(FIXTURE_DIR), "run scripts/gen_fixtures.py in the toolkit repo"
    return FIXTURE_DIR


def run_primary(argv):
    proc = subprocess.run([sys.executable, "-m", "syncdet.cli", *argv],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """A small soft-channel dataset generated through the toolkit CLI."""
    path = tmp_path_factory.mktemp("ds") / "small.ds"
    run_primary(["gen-data", "--code", "c1", "--channel", "idawgn",
                 "--snr-db", "7.0", "--grid", "0.008:0.004:0.012",
                 "--per-condition", "8", "--seed", "77", "--out", str(path)])
    return str(path)
