import numpy as np
import pytest

from conftest import bump_config, golden
from nsvacuum.diagnostics import sup_l2_distance
from nsvacuum.grid import Grid
from nsvacuum.model import PhysParams, SymState
from nsvacuum.picard import (
    PicardReport,
    PicardWarning,
    gamma_series,
    picard_init,
    picard_run,
    picard_step,
    uniform_schedule,
)
from nsvacuum.solvers import SimConfig, initial_state, run


def _zero(g):
    return SymState(np.zeros(g.N), np.zeros(g.N), np.zeros(g.N))


def test_zero_data(params):
    cfg = SimConfig(params, Grid(6.0, 64), 0.01)
    z = _zero(cfg.grid)
    it0 = picard_init(z, cfg)
    assert all(np.all(s.stack() == 0) for s in it0.states)
    rep = picard_run(z, 2, cfg)
    assert rep.gammas == [0.0, 0.0]
    assert rep.mean_ratio is None


def test_warm_start_with_zero_velocity(params):
    cfg = bump_config(params, N=128, t_end=0.01)
    w = initial_state(cfg)
    w = SymState(w.vphi, w.phi, np.zeros_like(w.u))
    it0 = picard_init(w, cfg)
    for s in it0.states:  # stationary up to SSP-RK3 stage-averaging roundoff
        assert np.allclose(s.vphi, w.vphi, rtol=1e-14, atol=0)
        assert np.allclose(s.phi, w.phi, rtol=1e-14, atol=0)
        assert np.all(s.u == 0)


def test_constant_extension(params):
    cfg = bump_config(params, N=64, t_end=0.01)
    w = initial_state(cfg)
    it0 = picard_init(w, cfg, "constant")
    assert all(np.allclose(s.stack(), w.stack(), rtol=1e-14, atol=0) for s in it0.states)
    with pytest.raises(ValueError):
        picard_init(w, cfg, "guess")


def test_fixed_point(params):
    cfg = bump_config(params, N=128, t_end=0.02)
    w = initial_state(cfg)
    sched = uniform_schedule(w, cfg)
    ns = run(cfg.with_(dt_schedule=sched, record_stages=True, save_every_step=True))
    nxt = picard_step(ns, cfg, sched)
    assert sup_l2_distance(nxt, ns) < 1e-13
    nxt_i = picard_step(ns, cfg, sched, provider="interp")
    assert sup_l2_distance(nxt_i, ns) < 1e-6


def test_warm_and_constant_limits_agree(params):
    cfg = bump_config(params, N=128, t_end=0.02)
    a = picard_run(None, 5, cfg, init="warm")
    b = picard_run(None, 5, cfg, init="constant")
    c = picard_run(None, 5, cfg, init="warm", eps_scaled=True)
    assert sup_l2_distance(a.final, b.final) < 1e-9
    # the eps-scaled warm start allows a longer uniform step: compare end states only
    assert len(c.final.times) < len(a.final.times)
    assert np.max(np.abs(a.final.final.stack() - c.final.final.stack())) < 1e-6
    assert "eps-scaled" in c.init


def test_contraction_and_gamma_nonnegative(params):
    cfg = bump_config(params, N=128, t_end=0.02)
    rep = picard_run(None, 4, cfg)
    assert all(g >= 0 for g in rep.gammas)
    assert all(r < 1 for r in rep.ratios)
    for gt in rep.gamma_t:
        assert np.all(np.diff(gt) >= 0)  # running sup
    assert not rep.warnings and len(rep.dissipation) == 4


def test_horizon_monotone(params):
    ratios = []
    for T in (0.04, 0.02, 0.01):
        rep = picard_run(None, 2, bump_config(params, N=128, t_end=T))
        ratios.append(rep.ratios[0])
    assert ratios[0] > ratios[1] > ratios[2]


def test_report_refuses_average_when_converged():
    rep = PicardReport(3, "warm", "stage", gammas=[1e-3, 1e-8, 1e-15])
    assert rep.converged and rep.mean_ratio is None
    rep2 = PicardReport(3, "warm", "stage", gammas=[1e-2, 1e-3, 1e-4])
    assert rep2.mean_ratio == pytest.approx(0.1)
    assert "Gamma^3" in rep2.summary()


def test_noncontraction_warns_not_raises(params, monkeypatch):
    import nsvacuum.picard as pc

    seq = iter([1.0, 2.0])
    monkeypatch.setattr(pc, "gamma_series", lambda new, old, eps: np.array([next(seq)]))
    with pytest.warns(PicardWarning, match="no contraction at k=1"):
        rep = picard_run(None, 2, bump_config(params, N=64, t_end=0.01))
    assert rep.ratios == [2.0] and rep.warnings and not rep.failed


def test_k_validation(params):
    with pytest.raises(ValueError):
        picard_run(None, 1, bump_config(params, N=64, t_end=0.01))


def test_gamma_series_definition(params):
    g = Grid(2 * np.pi, 32)
    from nsvacuum.solvers import Trajectory

    a, b = Trajectory(g, params, "linearized"), Trajectory(g, params, "linearized")
    for k, t in enumerate([0.0, 0.1, 0.2]):
        a.add_frame(t, np.stack([np.full(g.N, 0.1 * k), np.full(g.N, 0.2 * k), np.zeros(g.N)]))
        b.add_frame(t, np.zeros((3, g.N)))
    gt = gamma_series(a, b, 0.5)
    assert gt[-1] == pytest.approx(g.L * (0.4**2 + 0.5 * 0.2**2))


def test_picard_golden(params):
    rep = picard_run(None, 6, bump_config(params, N=256, t_end=0.02))
    golden("picard_256", {f"gamma_{k + 1}": g for k, g in enumerate(rep.gammas[:4])}, rtol=1e-5)
