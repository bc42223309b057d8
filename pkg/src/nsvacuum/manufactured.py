"""Manufactured smooth solutions and the matching forcing terms (symbolic, via sympy)."""

from __future__ import annotations

import numpy as np
import sympy as sy

from .model import PhysParams, SymState


class ManufacturedSolution:
    """Exact ``rho(x, t) > 0`` and ``u(x, t)`` on a periodic box, with the forcing that makes them
    solve the viscous system.

    ``sym_forcing`` feeds the solver (symmetrized variables); ``prim_forcing`` is the
    corresponding forcing of the primitive mass and momentum balances.
    """

    def __init__(self, p: PhysParams, L: float = 2 * np.pi, rho_expr=None, u_expr=None):
        self.p, self.L = p, L
        x, t = sy.symbols("x t", real=True)
        k = 2 * sy.pi / sy.nsimplify(L)
        if rho_expr is None:
            rho_expr = 1 + sy.Rational(3, 10) * sy.sin(k * x - t) + sy.Rational(1, 10) * sy.cos(2 * k * x)
        if u_expr is None:
            u_expr = sy.Rational(1, 5) * sy.cos(k * x) * sy.cos(t) + sy.Rational(1, 10) * sy.sin(2 * k * x + t)
        A, g, d = (sy.nsimplify(v) for v in (p.A, p.gamma, p.delta))
        eps, lame = sy.nsimplify(p.epsilon), sy.nsimplify(p.lame)
        rho, u = rho_expr, u_expr
        vphi = rho ** ((d - 1) / 2)
        phi = rho ** ((g - 1) / 2)
        Dx = lambda f: sy.diff(f, x)  # noqa: E731
        Dt = lambda f: sy.diff(f, t)  # noqa: E731

        f_vphi = Dt(vphi) + u * Dx(vphi) + (d - 1) / 2 * vphi * Dx(u)
        f_phi = Dt(phi) + u * Dx(phi) + (g - 1) / 2 * phi * Dx(u)
        f_u = (Dt(u) + u * Dx(u) + 2 * A * g / (g - 1) * phi * Dx(phi)
               - eps * lame * (vphi**2 * Dx(Dx(u)) + d / (d - 1) * Dx(vphi**2) * Dx(u)))
        f_mass = Dt(rho) + Dx(rho * u)
        f_mom = Dt(rho * u) + Dx(rho * u**2 + A * rho**g) - eps * lame * Dx(rho**d * Dx(u))

        self.exprs = {"rho": rho, "u": u, "vphi": vphi, "phi": phi}
        mk = lambda e: sy.lambdify((t, x), e, "numpy")  # noqa: E731
        self._vphi, self._phi, self._u, self._rho = mk(vphi), mk(phi), mk(u), mk(rho)
        self._fs = [mk(f) for f in (f_vphi, f_phi, f_u)]
        self._fp = [mk(f) for f in (f_mass, f_mom)]

    @staticmethod
    def _eval(f, t, x):
        return np.broadcast_to(np.asarray(f(t, x), dtype=float), np.shape(x)).copy()

    def state(self, t: float, x: np.ndarray) -> SymState:
        return SymState(self._eval(self._vphi, t, x), self._eval(self._phi, t, x), self._eval(self._u, t, x))

    def rho(self, t, x):
        return self._eval(self._rho, t, x)

    def sym_forcing(self, t: float, x: np.ndarray) -> np.ndarray:
        return np.stack([self._eval(f, t, x) for f in self._fs])

    def prim_forcing(self, t: float, x: np.ndarray):
        return tuple(self._eval(f, t, x) for f in self._fp)
