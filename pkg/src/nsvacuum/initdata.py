"""Named initial-data generators returning symmetrized states on a grid."""

from __future__ import annotations

import numpy as np

from .grid import Grid
from .model import PhysParams, PrimState, SymState, to_symmetric


def bump(grid: Grid, p: PhysParams, *, center=None, radius=1.0, amp=1.0, smooth=4,
         u_amp=0.5, u_radius=0.8, u_smooth=5) -> SymState:
    """Compactly supported density with vacuum outside ``|x - center| < radius``.

    ``rho0 = amp * b**(2*smooth/(gamma-1))`` with ``b = max(0, 1 - s^2)``, so that
    ``phi0 = amp**((gamma-1)/2) * b**smooth`` has ``smooth - 1`` continuous derivatives
    (``smooth >= 4`` puts it in H^3).  The velocity is an odd profile supported in the
    smaller ball of relative radius ``u_radius``.
    """
    x = grid.x
    if center is None:
        center = 0.5 * grid.L
    s = (x - center) / radius
    b = np.maximum(0.0, 1.0 - s**2)
    rho = amp * b ** (2.0 * smooth / (p.gamma - 1.0))
    su = s / u_radius
    bu = np.maximum(0.0, 1.0 - su**2)
    u = u_amp * np.sin(np.pi * su) * bu**u_smooth
    return to_symmetric(PrimState(rho, u), p)


def gauss_floorless(grid: Grid, p: PhysParams, *, center=None, width=0.6, amp=1.0,
                    u_amp=0.2) -> SymState:
    """Periodized Gaussian density without an added floor (strictly positive, no vacuum).

    The distance ``(L/pi) sin(pi (x - center)/L)`` replaces ``x - center`` so every
    power of rho stays smooth across the periodic wrap.
    """
    x = grid.x
    if center is None:
        center = 0.5 * grid.L
    s = grid.L / np.pi * np.sin(np.pi * (x - center) / grid.L) / width
    rho = amp * np.exp(-(s**2))
    u = u_amp * np.sin(2 * np.pi * x / grid.L)
    return to_symmetric(PrimState(rho, u), p)


def acoustic(grid: Grid, p: PhysParams, *, rho_bar=1.0, amp=1e-4, mode=1, direction=1) -> SymState:
    """Small-amplitude simple wave on the constant state ``(rho_bar, 0)``.

    ``direction=+1`` excites only the right-going family (``u' = 2 sqrt(A gamma)/(gamma-1) phi'``),
    ``direction=0`` starts at rest.
    """
    k = 2 * np.pi * mode / grid.L
    rho = rho_bar * (1.0 + amp * np.sin(k * grid.x))
    w = to_symmetric(PrimState(rho, np.zeros(grid.N)), p)
    phi_bar = rho_bar ** (0.5 * (p.gamma - 1.0))
    u = direction * 2.0 * np.sqrt(p.A * p.gamma) / (p.gamma - 1.0) * (w.phi - phi_bar)
    return SymState(w.vphi, w.phi, u)


def constant(grid: Grid, p: PhysParams, *, rho=1.0, u=0.0) -> SymState:
    return to_symmetric(PrimState(np.full(grid.N, float(rho)), np.full(grid.N, float(u))), p)


def zero(grid: Grid, p: PhysParams) -> SymState:
    z = np.zeros(grid.N)
    return SymState(z, z.copy(), z.copy())


GENERATORS = {
    "bump": bump,
    "gauss-floorless": gauss_floorless,
    "acoustic": acoustic,
    "constant": constant,
    "zero": zero,
}


def make_initial(name: str, grid: Grid, p: PhysParams, **kwargs) -> SymState:
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise ValueError(f"unknown initial data {name!r}; choose from {sorted(GENERATORS)}") from None
    return gen(grid, p, **kwargs)
