import numpy as np
import pytest

from nsvacuum.grid import Grid
from nsvacuum.inequalities import (
    check_GN,
    check_interp,
    check_moser,
    inequality_suite,
    random_coefficients,
    sample_fields,
)


def test_zero_fields_skipped():
    g = Grid(2 * np.pi, 64)
    z = np.zeros((3, g.N))
    for rep in (check_GN(z, g), check_moser(z, z, g), check_interp(z, g, 1.5)):
        assert rep.ratios.size == 0 and rep.skipped == 3


def test_interp_endpoints_exact(rng):
    g = Grid(2 * np.pi, 128)
    f = sample_fields(random_coefficients(20, rng), g)
    assert np.all(check_interp(f, g, 0.0).ratios == 1.0)
    assert np.all(check_interp(f, g, 3.0).ratios == 1.0)
    with pytest.raises(ValueError):
        check_interp(f, g, 3.5)


def test_gn_sine_value():
    # |sin|_4 / (|sin|_2^(3/4) |cos|_2^(1/4)) on [0, 2pi)
    g = Grid(2 * np.pi, 256)
    r = check_GN([np.sin(g.x)], g, 4.0).ratios[0]
    assert r == pytest.approx((3 * np.pi / 4) ** 0.25 / np.pi**0.5)


def test_moser_vanishes_for_constant_f():
    g = Grid(2 * np.pi, 64)
    f = np.full(g.N, 2.0)
    gg = np.sin(3 * g.x)
    r = check_moser([f], [gg], g, 2)
    assert r.ratios.size == 0 or r.ratios[0] < 1e-12


def test_ratios_bounded_by_one_for_interp(rng):
    # log-convexity of the Fourier weights: the interpolation constant is 1
    g = Grid(2 * np.pi, 128)
    f = sample_fields(random_coefficients(50, rng, mean=True), g)
    assert np.all(check_interp(f, g, 1.5).ratios <= 1.0 + 1e-12)


def test_suite_grid_stable():
    res = inequality_suite(seed=3, n_samples=200, N=256)
    assert res.ok(0.05)
    assert all(np.isfinite(r.max) and r.max > 0 for r in res.coarse.values())
