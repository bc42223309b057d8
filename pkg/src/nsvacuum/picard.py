"""Picard iteration for the nonlinear system via successive linearized solves.

Iterate ``k+1`` transports ``vphi`` with velocity ``u^k`` and divider ``vphi^k`` and solves
the linear symmetric system with ``A_j(W^k)``, elliptic weight ``eps (vphi^{k+1})^2`` and
source ``eps d_x (vphi^{k+1})^2 Q(u^k)``.  All iterates share one uniform step schedule,
so by default the frozen coefficients are replayed stage by stage (the discrete fixed
point is then exactly the discrete nonlinear solution).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .grid import deriv
from .model import SymState
from .solvers import (
    InterpolatedCoefficients,
    SimConfig,
    StageCoefficients,
    Trajectory,
    _integrate,
    cfl_dt,
    initial_state,
)

CONVERGED = 1e-14


class PicardWarning(UserWarning):
    pass


class WarmStart:
    """Right-hand side of ``X_t + u0 X_x = 0``, ``Y_t + u0 Y_x = 0``, ``Z_t - X^2 Z_xx = 0``.

    ``eps_scaled=True`` multiplies the heat flow by eps.
    """

    def __init__(self, u0: np.ndarray, cfg: SimConfig, eps_scaled: bool = False):
        self.u0 = np.asarray(u0, dtype=float)
        self.grid, self.op = cfg.grid, cfg.op
        self.nu = cfg.params.epsilon if eps_scaled else 1.0

    def kappa(self, t, y):
        return self.nu * y[0] ** 2

    def __call__(self, t, y, elliptic=True):
        out = np.empty_like(y)
        out[0] = -self.u0 * deriv(y[0], self.grid, 1, self.op)
        out[1] = -self.u0 * deriv(y[1], self.grid, 1, self.op)
        out[2] = self.kappa(t, y) * deriv(y[2], self.grid, 2, self.op) if elliptic else 0.0
        return out


def uniform_schedule(initial: SymState, cfg: SimConfig, eps_scaled: bool = False,
                     safety: float = 0.8) -> list:
    """Equal steps that satisfy the CFL limits of both the nonlinear system and the warm start."""
    y = initial.stack()
    dt = cfl_dt(y, cfg, 0.0, mode="ns")
    if cfg.integrator == "ssprk3":
        nu = cfg.params.epsilon if eps_scaled else 1.0
        kap = nu * float(np.max(y[0] ** 2, initial=0.0))
        if kap > 0:
            dt = min(dt, cfg.cfl_par * cfg.grid.dx**2 / kap)
    n = max(1, math.ceil(cfg.t_end / (safety * dt)))
    return [cfg.t_end / n] * n


def _picard_cfg(cfg: SimConfig, schedule) -> SimConfig:
    return cfg.with_(dt_schedule=list(schedule), save_every_step=True, record_stages=True,
                     forcing=None, blowup_threshold=math.inf)


def picard_init(initial: SymState, cfg: SimConfig, method: str = "warm", eps_scaled: bool = False,
                schedule=None) -> Trajectory:
    """Iterate 0: the transport/heat warm start, or ``method="constant"`` (data held fixed in time)."""
    if schedule is None:
        schedule = uniform_schedule(initial, cfg, eps_scaled)
    pcfg = _picard_cfg(cfg, schedule)
    if method == "warm":
        return _integrate(pcfg, initial.stack(), "linearized", extra_rhs=WarmStart(initial.u, cfg, eps_scaled))
    if method == "constant":
        zero = _Frozen()
        return _integrate(pcfg, initial.stack(), "linearized", extra_rhs=zero)
    raise ValueError(f"unknown picard init {method!r}")


class _Frozen:
    def kappa(self, t, y):
        return np.zeros_like(y[0])

    def __call__(self, t, y, elliptic=True):
        return np.zeros_like(y)


def picard_step(prev: Trajectory, cfg: SimConfig, schedule=None, provider: str = "stage") -> Trajectory:
    """One linearized solve with coefficients frozen at ``prev`` (eta = 0)."""
    if schedule is None:
        schedule = [s.dt for s in prev.steps]
    pcfg = _picard_cfg(cfg, schedule)
    if provider == "stage":
        coeffs = StageCoefficients(prev)
    elif provider == "interp":
        coeffs = InterpolatedCoefficients(prev)
    else:
        raise ValueError(f"unknown coefficient provider {provider!r}")
    return _integrate(pcfg, prev.states[0].stack(), "linearized", coeffs, eta=0.0)


def gamma_series(new: Trajectory, old: Trajectory, epsilon: float) -> np.ndarray:
    """``Gamma(t_n)`` at every stored time: running sups of ``|W diff|^2`` and ``eps |vphi diff|^2``."""
    g = new.grid
    w, v = [], []
    for a, b in zip(new.states, old.states):
        w.append(g.integrate((a.phi - b.phi) ** 2 + (a.u - b.u) ** 2))
        v.append(epsilon * g.integrate((a.vphi - b.vphi) ** 2))
    return np.maximum.accumulate(np.array(w)) + np.maximum.accumulate(np.array(v))


def dissipation_integral(new: Trajectory, old: Trajectory, epsilon: float) -> float:
    """``int_0^T eps |vphi^{k+1} d_x (u^{k+1} - u^k)|_2^2 dt`` (trapezoid over frames)."""
    g = new.grid
    vals = [epsilon * g.integrate((a.vphi * deriv(a.u - b.u, g, 1)) ** 2)
            for a, b in zip(new.states, old.states)]
    return float(np.trapezoid(vals, new.t)) if hasattr(np, "trapezoid") else float(np.trapz(vals, new.t))


@dataclass
class PicardReport:
    K: int
    init: str
    provider: str
    gammas: list = field(default_factory=list)        # Gamma^{k+1}(T), k = 0..K-1
    gamma_t: list = field(default_factory=list)       # Gamma^{k+1}(t) on the step times
    dissipation: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    failed: bool = False
    failure: str = ""
    final: Optional[Trajectory] = None
    iterates: Optional[list] = None
    times: Optional[np.ndarray] = None

    @property
    def ratios(self) -> list:
        """``Gamma^{k+1} / Gamma^k`` for k = 1..; ``nan`` where the denominator is 0."""
        g = self.gammas
        return [g[k] / g[k - 1] if g[k - 1] > 0 else float("nan") for k in range(1, len(g))]

    @property
    def converged(self) -> bool:
        return any(g < CONVERGED for g in self.gammas)

    @property
    def mean_ratio(self) -> Optional[float]:
        """Geometric mean of the ratios; ``None`` once any Gamma is below the convergence floor."""
        r = self.ratios
        if not r or self.converged:
            return None
        return float(np.exp(np.mean(np.log(r))))

    @property
    def gamma_sum(self) -> float:
        return float(sum(self.gammas))

    def summary(self) -> str:
        lines = [f"Picard iteration: K={self.K}, iterate 0 = {self.init}, coefficients = {self.provider}"]
        for k, g in enumerate(self.gammas):
            r = "" if k == 0 else f"  ratio {self.ratios[k - 1]:.4e}"
            lines.append(f"  Gamma^{k + 1} = {g:.6e}{r}")
        mr = self.mean_ratio
        lines.append("  mean ratio: " + ("n/a (converged)" if mr is None else f"{mr:.4e}"))
        lines += [f"  warning: {w}" for w in self.warnings]
        if self.failed:
            lines.append(f"  FAILED: {self.failure}")
        return "\n".join(lines)


def picard_run(initial: Optional[SymState], K: int, cfg: SimConfig, init: str = "warm",
               eps_scaled: bool = False, provider: str = "stage", keep_iterates: bool = False,
               schedule=None) -> PicardReport:
    if K < 2:
        raise ValueError("picard_run needs K >= 2")
    if initial is None:
        initial = initial_state(cfg)
    if schedule is None:
        schedule = uniform_schedule(initial, cfg, eps_scaled)
    label = init + (" (eps-scaled heat flow)" if init == "warm" and eps_scaled else "")
    rep = PicardReport(K, label, provider)
    prev = picard_init(initial, cfg, init, eps_scaled, schedule)
    its = [prev] if keep_iterates else None
    eps = cfg.params.epsilon
    if prev.failed:
        rep.failed, rep.failure, rep.final = True, f"iterate 0: {prev.failure_reason}", prev
        return rep
    for k in range(K):
        nxt = picard_step(prev, cfg, schedule, provider)
        if nxt.failed:
            rep.failed, rep.failure = True, f"iterate {k + 1}: {nxt.failure_reason} at t={nxt.failure_time}"
            break
        gt = gamma_series(nxt, prev, eps)
        rep.gamma_t.append(gt)
        rep.gammas.append(float(gt[-1]))
        rep.dissipation.append(dissipation_integral(nxt, prev, eps))
        if keep_iterates:
            its.append(nxt)
        prev = nxt
    rep.final = prev
    rep.iterates = its
    rep.times = prev.t
    for k, r in enumerate(rep.ratios, start=1):
        if rep.gammas[k - 1] >= CONVERGED and not r < 1:
            rep.warnings.append(f"no contraction at k={k}: ratio {r:.3e}")
    for w in rep.warnings:
        warnings.warn(w, PicardWarning, stacklevel=2)
    return rep
