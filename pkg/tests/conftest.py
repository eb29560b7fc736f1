import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

REPO = Path(__file__).resolve().parents[1]
MNIST_DIR = REPO / "data" / "mnist"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def mnist():
    from lstmqgan.data import load_dir

    return load_dir(MNIST_DIR)


ACCEPTANCE = {}


def record(criterion, name, ok, detail=""):
    """Log an acceptance result; the summary prints one line per criterion."""
    prev = ACCEPTANCE.get(criterion)
    ok = bool(ok) and (prev is None or prev[1])
    details = [d for d in ((prev[2] if prev else ""), detail) if d]
    ACCEPTANCE[criterion] = (name, ok, "; ".join(details))
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        name, ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}. {name}: {detail}")
