"""Coefficient matrices and differential operators of the symmetrized system.

For ``W = (phi, u)`` the momentum/pressure pair obeys

    A0 W_t + sum_j Aj(W) d_j W = -eps vphi^2 LL(W) + eps H(vphi) . QQ(W)

with ``A0 = diag(1, a1 I_d)`` and the symmetric blocks ``Aj`` assembled below.
The scalar-field operators (``lame_L``, ``stress_S``, ...) are the 1D reductions.
"""

from __future__ import annotations

import numpy as np

from .grid import FD4, DiffOp, Grid, deriv
from .model import PhysParams


def assemble_A0(p: PhysParams, d: int = 1) -> np.ndarray:
    return np.diag([1.0] + [p.a1] * d)


def assemble_A0_inv(p: PhysParams, d: int = 1) -> np.ndarray:
    return np.diag([1.0] + [1.0 / p.a1] * d)


def assemble_Aj(phi: float, u, p: PhysParams, j: int = 0) -> np.ndarray:
    """Symmetric coefficient matrix for direction ``j`` (0-based) at one point.

    ``u`` is a scalar in 1D or a length-d velocity vector.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    d = u.size
    if not 0 <= j < d:
        raise ValueError(f"direction {j} out of range for d={d}")
    M = np.zeros((d + 1, d + 1))
    uj = u[j]
    M[0, 0] = uj
    M[1:, 1:] = p.a1 * uj * np.eye(d)
    off = 0.5 * (p.gamma - 1.0) * phi
    M[0, 1 + j] = off
    M[1 + j, 0] = off
    return M


def lame_L(u: np.ndarray, grid: Grid, p: PhysParams, op: DiffOp = FD4) -> np.ndarray:
    """1D Lame operator ``L u = -(2 alpha + beta) u_xx``."""
    return -p.lame * deriv(u, grid, 2, op)


def stress_S(u: np.ndarray, grid: Grid, p: PhysParams, op: DiffOp = FD4) -> np.ndarray:
    return p.lame * deriv(u, grid, 1, op)


def source_Q(u: np.ndarray, grid: Grid, p: PhysParams, op: DiffOp = FD4) -> np.ndarray:
    return p.delta / (p.delta - 1.0) * stress_S(u, grid, p, op)


def gradH(vphi: np.ndarray, grid: Grid, op: DiffOp = FD4) -> np.ndarray:
    """``(vphi^2)_x`` in product form ``2 vphi vphi_x`` (vanishes exactly where vphi does)."""
    return 2.0 * vphi * deriv(vphi, grid, 1, op)


def char_speeds(phi: float, u, p: PhysParams, direction=None) -> np.ndarray:
    """Characteristic speeds in ``direction``, listed with multiplicity, ascending.

    1D returns ``[u - c, u + c]`` with ``c = sqrt(A gamma) phi``; in d dimensions
    ``u.l`` appears with multiplicity ``d - 1`` between them.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    d = u.size
    if direction is None:
        direction = np.eye(d)[0]
    l = np.asarray(direction, dtype=float)
    l = l / np.linalg.norm(l)
    un = float(u @ l)
    c = np.sqrt(p.A * p.gamma) * phi
    return np.array([un - c] + [un] * (d - 1) + [un + c])


def max_char_speed(phi: np.ndarray, u: np.ndarray, p: PhysParams) -> float:
    return float(np.max(np.abs(u) + np.sqrt(p.A * p.gamma) * np.abs(phi), initial=0.0))
