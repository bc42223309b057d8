import numpy as np
import pytest

from nsvacuum.grid import Grid, NormSpec, norm
from nsvacuum.initdata import GENERATORS, acoustic, bump, make_initial
from nsvacuum.model import PhysParams, check_sym_state


@pytest.fixture
def p():
    return PhysParams(gamma=2.0, delta=3.0)


def test_bump_support_and_regularity(p):
    g = Grid(6.0, 1024)
    w = bump(g, p, center=3.0, radius=2.0)
    outside = np.abs(g.x - 3.0) >= 2.0
    assert np.all(w.phi[outside] == 0) and np.all(w.vphi[outside] == 0) and np.all(w.u[outside] == 0)
    assert np.all(w.u[np.abs(g.x - 3.0) >= 1.6] == 0)  # velocity inside the density support
    assert check_sym_state(w, p) == []
    # phi0 in H^3: the norm is grid independent
    n1 = norm(w.phi, g, NormSpec.hs(3))
    g2 = Grid(6.0, 2048)
    n2 = norm(bump(g2, p, center=3.0, radius=2.0).phi, g2, NormSpec.hs(3))
    assert n1 == pytest.approx(n2, rel=1e-3)


def test_acoustic_right_going(p):
    g = Grid(2 * np.pi, 256)
    w = acoustic(g, p, amp=1e-4)
    # Riemann invariant u - 2c/(gamma-1) is constant for a right-going wave
    r_minus = w.u - 2 * np.sqrt(p.A * p.gamma) * w.phi / (p.gamma - 1)
    assert np.ptp(r_minus) < 1e-15


def test_registry(p):
    g = Grid(2 * np.pi, 64)
    for name in GENERATORS:
        w = make_initial(name, g, p)
        assert w.n == g.N
    with pytest.raises(ValueError, match="unknown initial data"):
        make_initial("nope", g, p)
