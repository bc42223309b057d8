import json
import os
from pathlib import Path

import numpy as np
import pytest

from nsvacuum import Grid, PhysParams, SimConfig

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def params():
    return PhysParams(A=1.0, gamma=2.0, delta=3.0, alpha=1.0, beta=0.0, epsilon=0.01)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def bump_config(p, N=512, t_end=0.05, **kw):
    return SimConfig(p, Grid(6.0, N), t_end, initial_kwargs=dict(center=3.0, radius=2.0), **kw)


def golden(name, values, rtol=1e-6):
    """Compare ``values`` (flat dict of floats) with tests/golden/<name>.json.

    NSVACUUM_REGEN_GOLDEN=1 rewrites the file instead.
    """
    path = GOLDEN / f"{name}.json"
    if os.environ.get("NSVACUUM_REGEN_GOLDEN") == "1":
        path.write_text(json.dumps(values, indent=2, sort_keys=True) + "\n")
        return
    if not path.exists():
        pytest.fail(f"missing golden file {path.name}; regenerate with NSVACUUM_REGEN_GOLDEN=1")
    ref = json.loads(path.read_text())
    assert sorted(ref) == sorted(values)
    for k, v in values.items():
        assert v == pytest.approx(ref[k], rel=rtol, abs=1e-300), k


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for k in sorted(REPORT):
            terminalreporter.write_line(REPORT[k])
