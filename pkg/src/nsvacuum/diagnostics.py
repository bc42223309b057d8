"""Monitored functionals and oracle checks on trajectories.

Everything here is post-processing over stored states, except ``apriori_parts`` and
``energy_terms`` which the solver also calls once per step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .grid import FD4, SPECTRAL, DiffOp, Grid, deriv
from .model import PhysParams, to_primitive

RHO_TOL = 1e-10


# --------------------------------------------------------------------------- a priori functional


def _deriv_sq_norms(f: np.ndarray, grid: Grid, kmax: int, op: DiffOp) -> np.ndarray:
    """``[|d^j f|_2^2 for j = 0..kmax]``."""
    if op.kind == "spectral":
        fh = np.fft.rfft(f) / grid.N
        w = np.full(fh.shape, 2.0)
        w[0] = 1.0
        if grid.N % 2 == 0:
            w[-1] = 1.0
        k2 = (2 * np.pi * np.fft.rfftfreq(grid.N, d=grid.dx)) ** 2
        p = w * np.abs(fh) ** 2
        return np.array([grid.L * np.sum(p * k2**j) for j in range(kmax + 1)])
    return np.array([grid.integrate(deriv(f, grid, j, op) ** 2) for j in range(kmax + 1)])


def apriori_components(y: np.ndarray, grid: Grid, p: PhysParams, op: DiffOp = SPECTRAL) -> dict:
    """Instantaneous summands of the a priori functional (the time integral excluded)."""
    vphi, phi, u = y
    sp = _deriv_sq_norms(phi, grid, 3, op)
    sv = _deriv_sq_norms(vphi, grid, 3, op)
    su = _deriv_sq_norms(u, grid, 3, op)
    return {
        "phi_H3": float(sp.sum()),
        "vphi_H2": float(sv[:3].sum()),
        "eps_vphi_D3": float(p.epsilon * sv[3]),
        "u_H2": float(su[:3].sum()),
        "u_D3": float(su[3]),
    }


def dissipation_integrand(y: np.ndarray, grid: Grid, p: PhysParams, op: DiffOp = SPECTRAL) -> float:
    """``eps |vphi d^4 u|_2^2``."""
    return float(p.epsilon * grid.integrate((y[0] * deriv(y[2], grid, 4, op)) ** 2))


def apriori_parts(y: np.ndarray, grid: Grid, p: PhysParams, op: DiffOp = SPECTRAL) -> tuple[float, float]:
    return sum(apriori_components(y, grid, p, op).values()), dissipation_integrand(y, grid, p, op)


@dataclass
class AprioriRecord:
    t: float
    value: float
    components: dict


@dataclass
class AprioriSeries:
    records: list

    @property
    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.records])

    @property
    def sup(self) -> float:
        return float(np.max(self.values))


def apriori(traj, p: Optional[PhysParams] = None, op: DiffOp = SPECTRAL) -> AprioriSeries:
    """J(t) on the stored frames; the dissipation integral uses the trapezoid rule in t."""
    p = p or traj.params
    grid = traj.grid
    recs = []
    integral, prev = 0.0, None
    for t, s in zip(traj.times, traj.states):
        y = s.stack()
        comp = apriori_components(y, grid, p, op)
        g = dissipation_integrand(y, grid, p, op)
        if prev is not None:
            integral += 0.5 * (t - prev[0]) * (g + prev[1])
        prev = (t, g)
        comp["eps_vphi_d4u_int"] = integral
        recs.append(AprioriRecord(t, sum(comp.values()), comp))
    return AprioriSeries(recs)


# --------------------------------------------------------------------------- energy identity


@dataclass(frozen=True)
class EnergyTerms:
    """``E = int(phi^2 + a1 u^2)``; ``D`` dissipation; ``T`` the ``W^T (d_x A1) W`` term; ``S`` source."""

    E: float
    D: float
    T: float
    S: float


def energy_terms(y: np.ndarray, grid: Grid, p: PhysParams, mode: str = "ns",
                 op: DiffOp = SPECTRAL) -> EnergyTerms:
    vphi, phi, u = y
    a1 = p.a1
    u_x = deriv(u, grid, 1, op)
    phi_x = deriv(phi, grid, 1, op)
    E = grid.integrate(phi**2 + a1 * u**2)
    T = grid.integrate(u_x * phi**2 + (p.gamma - 1.0) * phi_x * phi * u + a1 * u_x * u**2)
    if mode == "euler" or p.epsilon == 0:
        return EnergyTerms(E, 0.0, T, 0.0)
    c = 2.0 * a1 * p.epsilon * p.lame
    D = c * grid.integrate((vphi * u_x) ** 2)
    h_x = 2.0 * vphi * deriv(vphi, grid, 1, op)
    S = c / (p.delta - 1.0) * grid.integrate(h_x * u * u_x)
    return EnergyTerms(E, D, T, S)


def energy_step_residual(e0: EnergyTerms, e1: EnergyTerms, dt: float) -> float:
    """``dE/dt + D - T - S`` over one interval (difference quotient, trapezoid for the rest)."""
    return (e1.E - e0.E) / dt + 0.5 * (e0.D + e1.D - e0.T - e1.T - e0.S - e1.S)


@dataclass
class EnergyBalance:
    times: np.ndarray
    residual: np.ndarray
    scale: float

    @property
    def max_normalized(self) -> float:
        if self.residual.size == 0:
            return 0.0
        m = float(np.max(np.abs(self.residual)))
        return 0.0 if m == 0.0 else m / self.scale


def energy_balance(traj, p: Optional[PhysParams] = None, op: DiffOp = SPECTRAL) -> EnergyBalance:
    """Per-frame-interval residual of the zero-order energy identity.

    Normalized by the largest magnitude among ``dE/dt``, ``D``, ``T``, ``S`` over the run.
    """
    p = p or traj.params
    mode = "euler" if traj.mode == "euler" else "ns"
    terms = [energy_terms(s.stack(), traj.grid, p, mode, op) for s in traj.states]
    ts = np.asarray(traj.times)
    res, scale = [], 0.0
    for i in range(len(terms) - 1):
        dt = ts[i + 1] - ts[i]
        res.append(energy_step_residual(terms[i], terms[i + 1], dt))
        scale = max(scale, abs(terms[i + 1].E - terms[i].E) / dt)
    for e in terms:
        scale = max(scale, abs(e.D), abs(e.T), abs(e.S))
    return EnergyBalance(0.5 * (ts[1:] + ts[:-1]), np.array(res), scale if scale > 0 else 1.0)


# --------------------------------------------------------------------------- vacuum condition


@dataclass
class VacuumResidual:
    applicable: bool
    times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    residual: np.ndarray = field(default_factory=lambda: np.zeros(0))
    interior_dudt: np.ndarray = field(default_factory=lambda: np.zeros(0))
    n_vacuum: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def max(self) -> float:
        return float(np.max(self.residual, initial=0.0))

    @property
    def relative(self) -> float:
        scale = float(np.max(self.interior_dudt, initial=0.0))
        return self.max / scale if scale > 0 else self.max

    def __str__(self):
        if not self.applicable:
            return "not applicable (no vacuum nodes)"
        return f"max |u_t + u u_x| on vacuum = {self.max:.3e} (relative {self.relative:.3e})"


def _central_dt(frames: np.ndarray, ts: np.ndarray, i: int) -> np.ndarray:
    """Three-point derivative at frame ``i`` (exact for quadratics on uneven spacing)."""
    h0, h1 = ts[i] - ts[i - 1], ts[i + 1] - ts[i]
    return (-h1 / (h0 * (h0 + h1)) * frames[i - 1]
            + (h1 - h0) / (h0 * h1) * frames[i]
            + h0 / (h1 * (h0 + h1)) * frames[i + 1])


def vacuum_residual(traj, rho_tol: float = RHO_TOL, p: Optional[PhysParams] = None,
                    op: DiffOp = FD4) -> VacuumResidual:
    """``max |u_t + u u_x|`` over nodes with ``rho < rho_tol``, ``u_t`` by centered frame differences."""
    p = p or traj.params
    grid = traj.grid
    ts = np.asarray(traj.times)
    us = np.array([s.u for s in traj.states])
    out_t, out_r, out_i, out_n = [], [], [], []
    any_vac = False
    for i in range(1, len(ts) - 1):
        rho = to_primitive(traj.states[i], p).rho
        vac = rho < rho_tol
        u_t = _central_dt(us, ts, i)
        r = np.abs(u_t + us[i] * deriv(us[i], grid, 1, op))
        out_t.append(ts[i])
        out_i.append(float(np.max(np.abs(u_t[~vac]), initial=0.0)))
        out_n.append(int(vac.sum()))
        if vac.any():
            any_vac = True
            out_r.append(float(np.max(r[vac])))
        else:
            out_r.append(0.0)
    if not any_vac:
        return VacuumResidual(False)
    return VacuumResidual(True, np.array(out_t), np.array(out_r), np.array(out_i), np.array(out_n))


# --------------------------------------------------------------------------- primitive form


_FD_TIME = {
    2: (np.array([-1, 0, 1]), np.array([-0.5, 0.0, 0.5])),
    4: (np.array([-2, -1, 0, 1, 2]), np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0),
}


@dataclass
class PrimitiveResidual:
    times: np.ndarray
    mass: np.ndarray
    momentum: np.ndarray

    @property
    def max(self) -> float:
        return float(max(np.max(self.mass, initial=0.0), np.max(self.momentum, initial=0.0)))


def primitive_residual(traj, p: Optional[PhysParams] = None, forcing=None, rho_tol: float = RHO_TOL,
                       op: DiffOp = SPECTRAL, time_order: int = 4) -> PrimitiveResidual:
    """Masked max-norm residuals of the primitive mass and momentum balances.

    ``forcing(t, x) -> (f_mass, f_momentum)`` is subtracted when given (manufactured
    solutions).  Time derivatives use central differences of uniformly spaced frames.
    """
    p = p or traj.params
    grid = traj.grid
    ts = np.asarray(traj.times)
    offs, w = _FD_TIME[time_order]
    m = int(offs.max())
    if len(ts) < 2 * m + 1:
        raise ValueError(f"need at least {2 * m + 1} frames for order-{time_order} time differences")
    h = np.diff(ts)
    if np.max(np.abs(h - h.mean())) > 1e-9 * h.mean():
        raise ValueError("primitive_residual needs uniformly spaced frames")
    h = h.mean()
    prims = [to_primitive(s, p) for s in traj.states]
    rho = np.array([q.rho for q in prims])
    u = np.array([q.u for q in prims])
    mom = rho * u
    out_t, out_m, out_q = [], [], []
    for i in range(m, len(ts) - m):
        rho_t = sum(c * rho[i + o] for o, c in zip(offs, w)) / h
        mom_t = sum(c * mom[i + o] for o, c in zip(offs, w)) / h
        r, v = rho[i], u[i]
        mass = rho_t + deriv(r * v, grid, 1, op)
        flux = r * v**2 + p.A * r**p.gamma
        visc = p.epsilon * p.lame * deriv(r**p.delta * deriv(v, grid, 1, op), grid, 1, op)
        momentum = mom_t + deriv(flux, grid, 1, op) - visc
        if forcing is not None:
            fm, fq = forcing(ts[i], grid.x)
            mass = mass - fm
            momentum = momentum - fq
        mask = r > rho_tol
        out_t.append(ts[i])
        out_m.append(float(np.max(np.abs(mass[mask]), initial=0.0)))
        out_q.append(float(np.max(np.abs(momentum[mask]), initial=0.0)))
    return PrimitiveResidual(np.array(out_t), np.array(out_m), np.array(out_q))


# --------------------------------------------------------------------------- eta -> 0


@dataclass
class EtaStudy:
    etas: list
    distances: list  # distances[i] = d(eta_i, eta_{i+1})
    failed: list

    @property
    def monotone(self) -> bool:
        d = self.distances
        return all(d[i + 1] < d[i] for i in range(len(d) - 1))

    @property
    def contraction(self) -> float:
        """Smallest over largest consecutive distance."""
        return min(self.distances) / max(self.distances) if max(self.distances) > 0 else 0.0


def sup_l2_distance(a, b) -> float:
    """``sup_t |a - b|_2`` over common frames, all three fields."""
    if len(a.times) != len(b.times) or np.max(np.abs(a.t - b.t), initial=0.0) > 1e-12:
        raise ValueError("trajectories have different frame times")
    grid = a.grid
    return float(max(np.sqrt(grid.integrate(np.sum((sa.stack() - sb.stack()) ** 2, axis=0)))
                     for sa, sb in zip(a.states, b.states)))


def eta_limit_study(initial, etas, cfg, coeffs) -> EtaStudy:
    """Solve the linearized problem for each eta with identical coefficients and compare neighbours."""
    from .solvers import solve_linearized

    etas = [float(e) for e in etas]
    if len(etas) < 3:
        raise ValueError("eta list needs at least 3 entries")
    if any(etas[i + 1] >= etas[i] for i in range(len(etas) - 1)):
        raise ValueError("eta list must be strictly decreasing")
    trajs = [solve_linearized(initial, coeffs, cfg, eta=e) for e in etas]
    failed = [e for e, tr in zip(etas, trajs) if tr.failed]
    if failed:
        raise RuntimeError(f"linearized solve failed for eta in {failed}")
    dist = [sup_l2_distance(trajs[i], trajs[i + 1]) for i in range(len(etas) - 1)]
    return EtaStudy(etas, dist, failed)
