"""Physical parameters and the primitive <-> symmetrized change of variables.

The primitive unknowns are the density ``rho`` and velocity ``u``.  The solvers
work with the symmetrized triple

    vphi = rho**((delta - 1) / 2)      (drives the degenerate viscosity)
    phi  = rho**((gamma - 1) / 2)      (scaled sound speed)
    u

which stays well defined, and smooth, across vacuum regions.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np


@dataclass(frozen=True)
class PhysParams:
    """Pressure law ``P = A rho**gamma`` and viscosities ``eps*alpha*rho**delta``,
    ``eps*beta*rho**delta``.  ``eta`` is the artificial regularization level
    (0 for the target problem)."""

    A: float = 1.0
    gamma: float = 2.0
    delta: float = 2.0
    alpha: float = 1.0
    beta: float = 0.0
    epsilon: float = 0.1
    eta: float = 0.0

    def with_(self, **changes) -> "PhysParams":
        return replace(self, **changes)

    @property
    def a1(self) -> float:
        return (self.gamma - 1.0) ** 2 / (4.0 * self.A * self.gamma)

    @property
    def a2(self) -> float:
        return min(1.0, self.a1)

    @property
    def lame(self) -> float:
        """``2*alpha + beta``: the 1D Lame coefficient."""
        return 2.0 * self.alpha + self.beta

    @property
    def pressure_coeff(self) -> float:
        """Coefficient ``2 A gamma / (gamma - 1)`` of ``phi * phi_x`` in the velocity equation."""
        return 2.0 * self.A * self.gamma / (self.gamma - 1.0)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("A", "gamma", "delta", "alpha", "beta", "epsilon", "eta")}


def validate_params(p: PhysParams) -> list[str]:
    """Return every violated constraint; an empty list means ``p`` is admissible."""
    problems = []
    if not p.A > 0:
        problems.append(f"A>0 fails (A={p.A})")
    if not p.gamma > 1:
        problems.append(f"gamma>1 fails (gamma={p.gamma})")
    if not p.alpha > 0:
        problems.append(f"alpha>0 fails (alpha={p.alpha})")
    if not 2 * p.alpha + 3 * p.beta >= 0:
        problems.append(f"2α+3β≥0 fails (2α+3β={2 * p.alpha + 3 * p.beta})")
    m = min(p.delta, p.gamma)
    if not 1 < m <= 3:
        problems.append(f"1<min{{delta,gamma}}≤3 fails (min={m})")
    if not 0 < p.epsilon <= 1:
        problems.append(f"0<epsilon≤1 fails (epsilon={p.epsilon})")
    if not 0 <= p.eta <= 1:
        problems.append(f"0≤eta≤1 fails (eta={p.eta})")
    return problems


def _power(x: np.ndarray, e: float) -> np.ndarray:
    # 0**e = 0 for e > 0; no floor on x
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] ** e
    return out


@dataclass(frozen=True)
class PrimState:
    rho: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        if np.shape(self.rho) != np.shape(self.u):
            raise ValueError("rho and u must live on the same grid")


@dataclass(frozen=True)
class SymState:
    """Nodal values of ``(vphi, phi, u)``."""

    vphi: np.ndarray
    phi: np.ndarray
    u: np.ndarray
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if not (np.shape(self.vphi) == np.shape(self.phi) == np.shape(self.u)):
            raise ValueError("vphi, phi and u must share one grid")

    def stack(self) -> np.ndarray:
        return np.stack([self.vphi, self.phi, self.u])

    @classmethod
    def from_stack(cls, arr: np.ndarray) -> "SymState":
        return cls(arr[0].copy(), arr[1].copy(), arr[2].copy())

    @property
    def n(self) -> int:
        return np.shape(self.u)[-1]


def to_symmetric(s: PrimState, p: PhysParams) -> SymState:
    rho = np.asarray(s.rho, dtype=float)
    bad = np.flatnonzero(rho < 0)
    if bad.size:
        raise ValueError(f"negative density at node {bad[0]} (rho={rho[bad[0]]:.3e})")
    return SymState(
        vphi=_power(rho, 0.5 * (p.delta - 1.0)),
        phi=_power(rho, 0.5 * (p.gamma - 1.0)),
        u=np.array(s.u, dtype=float),
    )


def to_primitive(w: SymState, p: PhysParams) -> PrimState:
    return PrimState(rho=_power(w.phi, 2.0 / (p.gamma - 1.0)), u=np.array(w.u, dtype=float))


def pressure(rho, p: PhysParams) -> np.ndarray:
    return p.A * _power(rho, p.gamma)


def viscosities(rho, p: PhysParams) -> tuple[np.ndarray, np.ndarray]:
    r = _power(rho, p.delta)
    return p.epsilon * p.alpha * r, p.epsilon * p.beta * r


def sound_speed(w: SymState, p: PhysParams) -> np.ndarray:
    return np.sqrt(p.A * p.gamma) * np.asarray(w.phi, dtype=float)


def consistency_error(w: SymState, p: PhysParams) -> float:
    """Max relative mismatch between ``vphi`` and ``phi**((delta-1)/(gamma-1))`` where ``phi > 0``."""
    phi = np.asarray(w.phi)
    pos = phi > 0
    if not pos.any():
        return float(np.max(np.abs(w.vphi), initial=0.0))
    expect = phi[pos] ** ((p.delta - 1.0) / (p.gamma - 1.0))
    return float(np.max(np.abs(w.vphi[pos] - expect) / expect))


def check_sym_state(w: SymState, p: PhysParams, rtol: float = 1e-8) -> list[str]:
    issues = []
    if np.any(w.vphi < 0):
        issues.append("vphi has negative entries")
    if np.any(w.phi < 0):
        issues.append("phi has negative entries")
    err = consistency_error(w, p)
    if err > rtol:
        issues.append(f"vphi/phi inconsistency {err:.2e} > {rtol:.0e}")
    return issues
