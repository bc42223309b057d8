"""Time integration of the Euler, Navier-Stokes and linearized symmetrized systems.

All three share one right-hand side.  A state is the stacked array
``y = [vphi, phi, u]`` of shape ``(3, N)``; a *coefficient* state ``c = [omega, psi, v]``
carries the fields that are frozen in the linearized problem (for the nonlinear
modes ``c is y``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import diagnostics as dg
from .grid import FD4, SPECTRAL, DiffOp, Grid, deriv, fd_matrix
from .initdata import make_initial
from .model import PhysParams, SymState
from .symops import gradH, max_char_speed

MODES = ("euler", "ns", "linearized")
INTEGRATORS = ("ssprk3", "imex-ars222")


class SolverFailure(RuntimeError):
    """Raised by RHS evaluation on non-finite input; carries the step index."""

    def __init__(self, msg, step=None, t=None):
        super().__init__(msg)
        self.step = step
        self.t = t


@dataclass
class SimConfig:
    params: PhysParams
    grid: Grid
    t_end: float
    mode: str = "ns"
    cfl_hyp: float = 0.4
    cfl_par: float = 0.25
    integrator: str = "ssprk3"
    blowup_threshold: Optional[float] = None
    blowup_factor: float = 1e3
    initial_data: str = "bump"
    initial_kwargs: dict = field(default_factory=dict)
    n_frames: int = 20
    save_every_step: bool = False
    op: DiffOp = FD4
    diag_op: DiffOp = SPECTRAL
    forcing: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    record_stages: bool = False
    dt_schedule: Optional[Sequence[float]] = None
    negativity_tol: float = 1e-10
    max_steps: int = 2_000_000

    def __post_init__(self):
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        for name in ("cfl_hyp", "cfl_par"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}")
        if self.n_frames < 1:
            raise ValueError("n_frames must be >= 1")

    def with_(self, **changes) -> "SimConfig":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass
class StepRecord:
    t: float
    dt: float
    max_speed: float
    apriori: float
    energy_residual: float


@dataclass
class Trajectory:
    grid: Grid
    params: PhysParams
    mode: str
    eta: float = 0.0
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    stages: Optional[list] = None
    failed: bool = False
    failure_time: Optional[float] = None
    failure_reason: str = ""

    def add_frame(self, t: float, y: np.ndarray):
        if self.times and not t > self.times[-1]:
            raise ValueError("frame times must increase strictly")
        self.times.append(float(t))
        self.states.append(SymState.from_stack(y))

    @property
    def t(self) -> np.ndarray:
        return np.asarray(self.times)

    @property
    def final(self) -> SymState:
        return self.states[-1]

    def stacked(self) -> np.ndarray:
        """All frames as an array of shape ``(n_frames, 3, N)``."""
        return np.stack([s.stack() for s in self.states])

    def at(self, t: float) -> np.ndarray:
        """Linear interpolation between stored frames (clamped to the stored range)."""
        ts = self.t
        if t <= ts[0]:
            return self.states[0].stack()
        if t >= ts[-1]:
            return self.states[-1].stack()
        i = int(np.searchsorted(ts, t, side="right")) - 1
        th = (t - ts[i]) / (ts[i + 1] - ts[i])
        if th == 0.0:
            return self.states[i].stack()
        return (1 - th) * self.states[i].stack() + th * self.states[i + 1].stack()

    @property
    def sup_apriori(self) -> float:
        return max((s.apriori for s in self.steps), default=float("nan"))


# --------------------------------------------------------------------------- right-hand sides


def rhs_transport_vphi(vphi, v, omega, grid: Grid, p: PhysParams, op: DiffOp = FD4, v_x=None):
    """``-v vphi_x - (delta-1)/2 omega v_x``."""
    if v_x is None:
        v_x = deriv(v, grid, 1, op)
    return -v * deriv(vphi, grid, 1, op) - 0.5 * (p.delta - 1.0) * omega * v_x


def rhs_symmetric_W(y: np.ndarray, grid: Grid, p: PhysParams, mode: str = "ns",
                    coeff: Optional[np.ndarray] = None, eta: float = 0.0, op: DiffOp = FD4,
                    elliptic: bool = True, v_x=None):
    """``A0^{-1} [ -A1(V) W_x - eps (vphi^2 + eta^2) LL(W) + eps H(vphi) QQ(V) ]``.

    Returns ``(dphi/dt, du/dt)``.  ``euler`` drops every eps-term; ``ns`` uses ``V = W``
    and ``eta = 0``; ``linearized`` takes ``V = (psi, v)`` from ``coeff``.
    """
    vphi, phi, u = y
    if mode == "linearized":
        if coeff is None:
            raise ValueError("linearized mode needs frozen coefficients")
        _, psi, v = coeff
    else:
        psi, v = phi, u
        eta = 0.0
    phi_x = deriv(phi, grid, 1, op)
    u_x = deriv(u, grid, 1, op)
    if v_x is None:
        v_x = u_x if v is u else deriv(v, grid, 1, op)
    dphi = -(v * phi_x + 0.5 * (p.gamma - 1.0) * psi * u_x)
    du = -(v * u_x + p.pressure_coeff * psi * phi_x)
    if mode != "euler" and p.epsilon > 0:
        if elliptic:
            du += p.epsilon * p.lame * (vphi**2 + eta**2) * deriv(u, grid, 2, op)
        du += p.epsilon * gradH(vphi, grid, op) * (p.delta / (p.delta - 1.0)) * p.lame * v_x
    return dphi, du


def full_rhs(y: np.ndarray, grid: Grid, p: PhysParams, mode: str = "ns",
             coeff: Optional[np.ndarray] = None, eta: float = 0.0, op: DiffOp = FD4,
             elliptic: bool = True) -> np.ndarray:
    if mode == "linearized":
        omega, _, v = coeff
    else:
        omega, v = y[0], y[2]
    v_x = deriv(v, grid, 1, op)
    out = np.empty_like(y)
    out[0] = rhs_transport_vphi(y[0], v, omega, grid, p, op, v_x=v_x)
    out[1], out[2] = rhs_symmetric_W(y, grid, p, mode, coeff, eta, op, elliptic, v_x=v_x)
    return out


def diffusivity(y: np.ndarray, p: PhysParams, mode: str, eta: float = 0.0) -> np.ndarray:
    """Coefficient ``kappa`` of ``u_xx`` in the velocity equation."""
    if mode == "euler" or p.epsilon == 0:
        return np.zeros_like(y[0])
    e = eta if mode == "linearized" else 0.0
    return p.epsilon * p.lame * (y[0] ** 2 + e**2)


def cfl_dt(y: np.ndarray, cfg: SimConfig, t: float = 0.0, coeff: Optional[np.ndarray] = None,
           mode: Optional[str] = None, eta: float = 0.0, integrator: Optional[str] = None) -> float:
    """Largest stable step: hyperbolic branch always, parabolic branch only for explicit stepping."""
    p, dx = cfg.params, cfg.grid.dx
    mode = mode or cfg.mode
    integrator = integrator or cfg.integrator
    c = y if coeff is None else coeff
    candidates = []
    speed = max_char_speed(c[1], c[2], p)
    if speed > 0:
        candidates.append(cfg.cfl_hyp * dx / speed)
    if integrator == "ssprk3":
        kap = float(np.max(diffusivity(y, p, mode, eta), initial=0.0))
        if kap > 0:
            candidates.append(cfg.cfl_par * dx**2 / kap)
    remaining = cfg.t_end - t
    if not candidates:
        return remaining
    return min(min(candidates), remaining)


# --------------------------------------------------------------------------- frozen coefficients


class InterpolatedCoefficients:
    """Frozen coefficients taken from a stored trajectory, linear in time between frames."""

    def __init__(self, traj: Trajectory):
        self.traj = traj

    def __call__(self, t, step=None, stage=None):
        return self.traj.at(t)


class StageCoefficients:
    """Frozen coefficients replayed stage by stage from a run made with ``record_stages``.

    The consuming solve must use the same step sizes and integrator; times are checked.
    """

    def __init__(self, traj: Trajectory):
        if traj.stages is None:
            raise ValueError("trajectory was not recorded with record_stages=True")
        self.traj = traj

    def __call__(self, t, step, stage):
        ts, arr = self.traj.stages[step][stage]
        if abs(ts - t) > 1e-12 * max(1.0, abs(t)):
            raise ValueError(f"stage time mismatch: stored {ts}, requested {t}")
        return arr


class ConstantCoefficients:
    def __init__(self, state: SymState):
        self.arr = state.stack()

    def __call__(self, t, step=None, stage=None):
        return self.arr


# --------------------------------------------------------------------------- steppers


class _System:
    def __init__(self, cfg: SimConfig, mode: str, coeffs=None, eta: float = 0.0, extra_rhs=None):
        self.cfg, self.mode, self.coeffs, self.eta = cfg, mode, coeffs, eta
        self.grid, self.p, self.op = cfg.grid, cfg.params, cfg.op
        self.extra_rhs = extra_rhs
        self._d2 = None

    def coeff(self, t, y, step, stage):
        if self.coeffs is None:
            return None
        return self.coeffs(t, step, stage)

    def explicit(self, t, y, step, stage, elliptic):
        if not np.all(np.isfinite(y)):
            raise SolverFailure("non-finite state", step, t)
        c = self.coeff(t, y, step, stage)
        if self.extra_rhs is not None:
            out = self.extra_rhs(t, y, elliptic)
        else:
            out = full_rhs(y, self.grid, self.p, self.mode, c, self.eta, self.op, elliptic)
        if self.cfg.forcing is not None:
            out = out + self.cfg.forcing(t, self.grid.x)
        if not np.all(np.isfinite(out)):
            raise SolverFailure("non-finite right-hand side", step, t)
        return out

    def kappa(self, t, y):
        if self.extra_rhs is not None:
            return self.extra_rhs.kappa(t, y)
        return diffusivity(y, self.p, self.mode, self.eta)

    def solve_implicit(self, rhs_u, kap, h):
        """Solve ``(I - h diag(kap) D2) u = rhs_u``."""
        if not np.any(kap):
            return rhs_u.copy()
        if self._d2 is None:
            op = self.op if self.op.kind == "fd" else FD4
            self._d2 = fd_matrix(self.grid, 2, op)
        M = sp.identity(self.grid.N, format="csc") - h * sp.diags(kap) @ self._d2
        return splu(M.tocsc()).solve(rhs_u)


def _ssprk3(sys: _System, y, t, dt, step, record):
    f0 = sys.explicit(t, y, step, 0, True)
    y1 = y + dt * f0
    f1 = sys.explicit(t + dt, y1, step, 1, True)
    y2 = 0.75 * y + 0.25 * (y1 + dt * f1)
    f2 = sys.explicit(t + 0.5 * dt, y2, step, 2, True)
    if record is not None:
        record.extend([(t, y.copy()), (t + dt, y1), (t + 0.5 * dt, y2)])
    return y / 3.0 + 2.0 / 3.0 * (y2 + dt * f2)


_G = 1.0 - 1.0 / math.sqrt(2.0)
_D = 1.0 - 1.0 / (2.0 * _G)


def _ars222(sys: _System, y, t, dt, step, record):
    """IMEX ARS(2,2,2): implicit on the ``kappa u_xx`` term, stiffly accurate."""
    g, d = _G, _D
    fe1 = sys.explicit(t, y, step, 0, False)
    y2 = y + dt * g * fe1
    k2 = sys.kappa(t + g * dt, y2)
    y2[2] = sys.solve_implicit(y2[2], k2, g * dt)
    fe2 = sys.explicit(t + g * dt, y2, step, 1, False)
    fi2 = k2 * deriv(y2[2], sys.grid, 2, sys.op if sys.op.kind == "fd" else FD4)
    y3 = y + dt * (d * fe1 + (1.0 - d) * fe2)
    y3[2] += dt * (1.0 - g) * fi2
    k3 = sys.kappa(t + dt, y3)
    y3[2] = sys.solve_implicit(y3[2], k3, g * dt)
    if record is not None:
        record.extend([(t, y.copy()), (t + g * dt, y2.copy())])
    return y3


_STEPPERS = {"ssprk3": _ssprk3, "imex-ars222": _ars222}


# --------------------------------------------------------------------------- drivers


def _integrate(cfg: SimConfig, y0: np.ndarray, mode: str, coeffs=None, eta: float = 0.0,
               integrator: Optional[str] = None, extra_rhs=None) -> Trajectory:
    integrator = integrator or cfg.integrator
    stepper = _STEPPERS[integrator]
    sys = _System(cfg, mode, coeffs, eta, extra_rhs)
    p, grid = cfg.params, cfg.grid
    traj = Trajectory(grid, p, mode, eta)
    if cfg.record_stages:
        traj.stages = []
    y = np.array(y0, dtype=float)
    t, step = 0.0, 0
    traj.add_frame(0.0, y)
    frame_times = np.linspace(0.0, cfg.t_end, cfg.n_frames + 1)
    nxt = 1
    ttol = 1e-12 * cfg.t_end

    diag = mode != "linearized" and extra_rhs is None and cfg.forcing is None
    static0, integrand0 = dg.apriori_parts(y, grid, p, cfg.diag_op)
    J = static0
    J_int = 0.0
    threshold = cfg.blowup_threshold
    if threshold is None:
        threshold = cfg.blowup_factor * J if J > 0 else math.inf
    energy0 = dg.energy_terms(y, grid, p, mode, cfg.diag_op) if diag else None
    sched = None if cfg.dt_schedule is None else list(cfg.dt_schedule)

    def fail(reason, when):
        traj.failed = True
        traj.failure_time = float(when)
        traj.failure_reason = reason

    while t < cfg.t_end - ttol:
        if step >= cfg.max_steps:
            fail("step limit reached", t)
            break
        c0 = None if coeffs is None else coeffs(t, step, 0)
        if sched is not None:
            if step >= len(sched):
                raise ValueError("dt_schedule ends before t_end")
            dt = min(sched[step], cfg.t_end - t)
        else:
            dt = cfl_dt(y, cfg, t, c0, mode, eta, integrator)
            dt = min(dt, frame_times[nxt] - t)
        if not dt > 0:
            fail("non-positive time step", t)
            break
        record = [] if cfg.record_stages else None
        try:
            y_new = stepper(sys, y, t, dt, step, record)
        except SolverFailure as exc:
            fail(f"{exc} at step {exc.step}", t)
            break
        t_new = t + dt
        if sched is None and abs(t_new - frame_times[nxt]) <= ttol:
            t_new = float(frame_times[nxt])
        if not np.all(np.isfinite(y_new)):
            fail(f"non-finite state at step {step}", t_new)
            break
        scale = max(1.0, float(np.max(np.abs(y_new[:2]))))
        if np.min(y_new[:2]) < -cfg.negativity_tol * scale:
            fail(f"negative density variable at step {step}", t_new)
            break
        static1, integrand1 = dg.apriori_parts(y_new, grid, p, cfg.diag_op)
        J_int += 0.5 * dt * (integrand0 + integrand1)
        J = static1 + J_int
        eres = float("nan")
        if diag:
            energy1 = dg.energy_terms(y_new, grid, p, mode, cfg.diag_op)
            eres = dg.energy_step_residual(energy0, energy1, dt)
            energy0 = energy1
        c_speed = y_new if coeffs is None else (c0 if c0 is not None else y_new)
        traj.steps.append(StepRecord(t_new, dt, max_char_speed(c_speed[1], c_speed[2], p), J, eres))
        if record is not None:
            traj.stages.append(record)
        integrand0 = integrand1
        y, t = y_new, t_new
        step += 1
        hit = t >= frame_times[nxt] - ttol
        if hit:
            while nxt < len(frame_times) - 1 and t >= frame_times[nxt] - ttol:
                nxt += 1
        if cfg.save_every_step or hit or t >= cfg.t_end - ttol:
            traj.add_frame(t, y)
        if J > threshold:
            fail(f"a priori functional {J:.3e} exceeded threshold {threshold:.3e}", t)
            break
    return traj


def initial_state(cfg: SimConfig) -> SymState:
    return make_initial(cfg.initial_data, cfg.grid, cfg.params, **cfg.initial_kwargs)


def run(cfg: SimConfig, initial: Optional[SymState] = None) -> Trajectory:
    """Integrate ``cfg.mode`` (``euler`` or ``ns``) from the configured initial data."""
    if cfg.mode == "linearized":
        raise ValueError("use solve_linearized for the linearized system")
    w0 = initial if initial is not None else initial_state(cfg)
    return _integrate(cfg, w0.stack(), cfg.mode)


def solve_linearized(initial: SymState, coeffs, cfg: SimConfig, eta: Optional[float] = None,
                     integrator: Optional[str] = None) -> Trajectory:
    """Linear evolution with ``(omega, psi, v)`` frozen, elliptic coefficient ``eps (vphi^2 + eta^2)``.

    ``coeffs(t, step, stage)`` returns the frozen triple; see :class:`InterpolatedCoefficients`
    and :class:`StageCoefficients`.  With ``eta > 0`` the default integrator is IMEX.
    """
    eta = cfg.params.eta if eta is None else eta
    if integrator is None:
        integrator = "imex-ars222" if eta > 0 else cfg.integrator
    return _integrate(cfg, initial.stack(), "linearized", coeffs, eta, integrator)
