import numpy as np
import pytest

from conftest import bump_config, golden
from nsvacuum.grid import SPECTRAL, Grid, deriv
from nsvacuum.initdata import bump
from nsvacuum.model import PhysParams, SymState
from nsvacuum.solvers import (
    ConstantCoefficients,
    InterpolatedCoefficients,
    SimConfig,
    SolverFailure,
    StageCoefficients,
    _System,
    cfl_dt,
    full_rhs,
    initial_state,
    rhs_symmetric_W,
    rhs_transport_vphi,
    run,
    solve_linearized,
)


def test_transport_examples():
    p = PhysParams(delta=3.0)
    g = Grid(2 * np.pi, 64)
    one = np.ones(g.N)
    assert np.all(rhs_transport_vphi(2 * one, 0.7 * one, 2 * one, g, p) == 0)
    assert np.all(rhs_transport_vphi(np.sin(g.x), 0 * one, one, g, p) == 0)
    c = 1.7
    r = rhs_transport_vphi(one, c * np.sin(g.x), one, g, p, SPECTRAL)
    assert r[0] == pytest.approx(-c, abs=1e-13)  # v = c x near x = 0


@pytest.mark.parametrize("mode", ["euler", "ns", "linearized"])
def test_constant_state_zero_rhs(mode, params):
    g = Grid(2 * np.pi, 32)
    y = np.stack([np.full(g.N, 0.4), np.full(g.N, 0.6), np.zeros(g.N)])
    assert np.all(full_rhs(y, g, params, mode, coeff=y, eta=0.3) == 0)


def test_vacuum_node_is_burgers(params):
    g = Grid(6.0, 256)
    y = bump(g, params, center=3.0, radius=2.0).stack()
    y[2] = 0.4 * np.sin(2 * np.pi * g.x / g.L)
    r = full_rhs(y, g, params, "ns")
    vac = (y[0] == 0) & (y[1] == 0)
    assert vac.sum() > 50
    assert np.array_equal(r[2][vac], -(y[2] * deriv(y[2], g))[vac])


def test_linearized_with_self_equals_ns(params):
    g = Grid(6.0, 128)
    y = bump(g, params, center=3.0, radius=2.0).stack()
    assert np.array_equal(full_rhs(y, g, params, "linearized", coeff=y.copy(), eta=0.0), full_rhs(y, g, params, "ns"))


def test_euler_ignores_epsilon(params):
    g = Grid(6.0, 128)
    y = bump(g, params, center=3.0, radius=2.0).stack()
    a = full_rhs(y, g, params, "euler")
    b = full_rhs(y, g, params.with_(epsilon=0.9), "euler")
    assert np.array_equal(a, b)
    assert not np.array_equal(a, full_rhs(y, g, params, "ns"))


def test_linearized_requires_coefficients(params):
    g = Grid(6.0, 32)
    with pytest.raises(ValueError):
        rhs_symmetric_W(np.zeros((3, g.N)), g, params, "linearized")


def test_nan_signal(params):
    cfg = bump_config(params, N=64)
    sys = _System(cfg, "ns")
    y = np.zeros((3, 64))
    y[2, 5] = np.nan
    with pytest.raises(SolverFailure):
        sys.explicit(0.0, y, 7, 0, True)


def test_cfl_examples(params):
    g = Grid(1.28, 128)  # dx = 0.01
    cfg = SimConfig(params.with_(epsilon=0.01), g, 1.0, mode="euler")
    z = np.zeros((3, g.N))
    assert cfl_dt(z, cfg, t=0.25) == pytest.approx(0.75)
    y = z.copy()
    y[2] = 2.0
    assert cfl_dt(y, cfg) == pytest.approx(0.002)
    # halving dx: hyperbolic halves, explicit parabolic quarters
    ns = cfg.with_(mode="ns")
    y[0] = 1.0
    y[2] = 1e-3
    dpar = cfl_dt(y, ns)
    fine = ns.with_(grid=Grid(1.28, 256))
    yf = np.repeat(y, 2, axis=1)
    assert cfl_dt(yf, fine) == pytest.approx(dpar / 4)
    assert cfl_dt(y, ns.with_(integrator="imex-ars222", t_end=10.0)) == pytest.approx(0.4 * 0.01 / 1e-3)


def test_config_validation(params):
    with pytest.raises(ValueError):
        SimConfig(params, Grid(), 0.0)
    with pytest.raises(ValueError):
        SimConfig(params, Grid(), 1.0, cfl_hyp=1.5)
    with pytest.raises(ValueError):
        SimConfig(params, Grid(), 1.0, mode="stokes")


def test_euler_constant_state_preserved(params):
    cfg = SimConfig(params, Grid(2 * np.pi, 64), 0.5, mode="euler", initial_data="constant",
                    initial_kwargs={"rho": 0.8, "u": 0.3})
    tr = run(cfg)
    assert not tr.failed
    assert np.allclose(tr.final.stack(), tr.states[0].stack(), rtol=0, atol=1e-14)


def test_frames_and_invariants(params):
    tr = run(bump_config(params, N=256, t_end=0.05, n_frames=10))
    assert not tr.failed
    assert np.all(np.diff(tr.t) > 0)
    assert np.allclose(tr.t, np.linspace(0, 0.05, 11), rtol=0, atol=1e-15)
    assert all(s.phi.min() >= 0 and s.vphi.min() >= 0 for s in tr.states)
    assert len(tr.steps) >= 10 and all(s.dt > 0 for s in tr.steps)


def test_ns_bump_golden(params):
    """eps = 0.01, N = 512, t_end = 0.1: completes below the blow-up threshold."""
    tr = run(bump_config(params, N=512, t_end=0.1))
    assert not tr.failed
    J0 = tr.steps[0].apriori
    assert tr.sup_apriori <= 1e3 * J0
    golden("ns_bump_512", {"sup_J": tr.sup_apriori, "n_steps": float(len(tr.steps)),
                           "u_final_L2": float(np.sqrt(tr.grid.integrate(tr.final.u**2)))})


def test_acoustic_speed():
    p = PhysParams(A=1.0, gamma=2.0, delta=2.0, epsilon=0.01)
    for rho_bar in (1.0, 2.0):
        cfg = SimConfig(p, Grid(2 * np.pi, 1024), 1.0, mode="euler", initial_data="acoustic",
                        initial_kwargs={"rho_bar": rho_bar})
        tr = run(cfg)
        c = -np.angle(np.fft.rfft(tr.final.phi)[1] / np.fft.rfft(tr.states[0].phi)[1]) / tr.times[-1]
        assert c == pytest.approx(np.sqrt(p.A * p.gamma) * rho_bar ** ((p.gamma - 1) / 2), rel=1e-2)


def test_blowup_reports_failure():
    p = PhysParams(A=1.0, gamma=2.0, delta=3.0, epsilon=0.01)
    cfg = bump_config(p, N=256, t_end=1.0)
    cfg = cfg.with_(initial_kwargs=dict(center=3.0, radius=2.0, u_amp=50.0))
    tr = run(cfg)
    assert tr.failed
    assert 0 < tr.failure_time < 1.0
    assert tr.failure_reason


def _positive_cfg(N, **kw):
    p = PhysParams(A=1.0, gamma=1.4, delta=1.5, epsilon=0.05)
    return SimConfig(p, Grid(6.0, N), 0.2, initial_data="gauss-floorless",
                     initial_kwargs={"width": 1.0, "amp": 1.0}, **kw)


def test_self_convergence_space():
    """N, 2N, 4N differences shrink at about the stencil order."""
    finals = []
    for N in (64, 128, 256):
        tr = run(_positive_cfg(N, cfl_hyp=0.1, cfl_par=0.1))
        finals.append(tr.final.stack())
    d1 = np.max(np.abs(finals[0] - finals[1][:, ::2]))
    d2 = np.max(np.abs(finals[1] - finals[2][:, ::2]))
    assert np.log2(d1 / d2) == pytest.approx(4.0, abs=0.5)


@pytest.mark.parametrize("integrator, order", [("ssprk3", 3), ("imex-ars222", 2)])
def test_temporal_order(integrator, order):
    cfg0 = _positive_cfg(64, integrator=integrator)
    w0 = initial_state(cfg0)
    dt0 = 0.8 * cfl_dt(w0.stack(), cfg0.with_(integrator="ssprk3"))
    res = []
    for m in (1, 2, 4, 8):
        n = int(np.ceil(cfg0.t_end / dt0)) * m
        res.append(run(cfg0.with_(dt_schedule=[cfg0.t_end / n] * n, n_frames=1)).final.stack())
    e1 = np.max(np.abs(res[0] - res[3]))
    e2 = np.max(np.abs(res[1] - res[3]))
    e3 = np.max(np.abs(res[2] - res[3]))
    # Richardson-style: successive differences to the finest shrink by 2^order
    assert np.log2((e1 - e2 + 1e-300) / (e2 - e3 + 1e-300)) == pytest.approx(order, abs=0.35)


def test_imex_and_explicit_agree():
    a = run(_positive_cfg(128)).final.stack()
    b = run(_positive_cfg(128, integrator="imex-ars222")).final.stack()
    # IMEX takes hyperbolic-limited steps and is second order, hence the looser bound
    assert np.max(np.abs(a - b)) < 1e-4


def test_linearized_zero():
    p = PhysParams(A=1.0, gamma=2.0, delta=3.0, epsilon=0.01)
    g = Grid(6.0, 64)
    z = SymState(np.zeros(g.N), np.zeros(g.N), np.zeros(g.N))
    tr = solve_linearized(z, ConstantCoefficients(z), SimConfig(p, g, 0.1), eta=0.1)
    assert not tr.failed
    assert all(np.all(s.stack() == 0) for s in tr.states)


def test_linearized_tracks_nonlinear(params):
    cfg = bump_config(params, N=256, t_end=0.05, n_frames=200)
    ns = run(cfg)
    lin = solve_linearized(initial_state(cfg), InterpolatedCoefficients(ns), cfg, eta=0.0)
    d = max(np.sqrt(ns.grid.integrate(np.sum((a.stack() - b.stack()) ** 2, axis=0)))
            for a, b in zip(ns.states, lin.states))
    size = max(np.sqrt(ns.grid.integrate(np.sum(a.stack() ** 2, axis=0))) for a in ns.states)
    assert d < 1e-4 * size


def test_stage_replay_reproduces_ns(params):
    cfg = bump_config(params, N=128, t_end=0.02)
    w0 = initial_state(cfg)
    n = 20
    c = cfg.with_(dt_schedule=[0.02 / n] * n, record_stages=True, save_every_step=True)
    ns = run(c)
    lin = solve_linearized(w0, StageCoefficients(ns), c, eta=0.0)
    assert np.array_equal(lin.final.stack(), ns.final.stack())


def test_stage_replay_time_mismatch(params):
    cfg = bump_config(params, N=64, t_end=0.02)
    ns = run(cfg.with_(dt_schedule=[0.002] * 10, record_stages=True))
    with pytest.raises(ValueError, match="stage time"):
        StageCoefficients(ns)(0.0015, 1, 0)


def test_energy_residual_small_on_ns_run(params):
    tr = run(bump_config(params, N=512, t_end=0.02))
    r = max(abs(s.energy_residual) for s in tr.steps)
    assert np.isfinite(r) and r < 1e-3
