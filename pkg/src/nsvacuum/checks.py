"""Fast built-in invariant checks, shared by the ``check`` subcommand and the tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid
from .model import PhysParams, SymState
from .symops import assemble_A0, assemble_A0_inv, assemble_Aj


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def a0_definiteness(p: PhysParams, rng, n: int = 10_000, d: int = 1) -> CheckResult:
    xi = rng.standard_normal((n, d + 1))
    A0 = assemble_A0(p, d)
    q = np.einsum("ni,ij,nj->n", xi, A0, xi) - p.a2 * np.sum(xi**2, axis=1)
    worst = float(q.min())
    return CheckResult(f"A0 >= a2 I (d={d})", worst >= -1e-14, f"min(xi.A0.xi - a2|xi|^2) = {worst:.3e}")


def aj_symmetry(p: PhysParams, rng, n: int = 1000, d: int = 1) -> CheckResult:
    worst = 0.0
    for _ in range(n):
        phi = abs(rng.standard_normal())
        u = rng.standard_normal(d)
        for j in range(d):
            M = assemble_Aj(phi, u, p, j)
            worst = max(worst, float(np.max(np.abs(M - M.T))))
    return CheckResult(f"Aj symmetric (d={d})", worst == 0.0, f"max |Aj - Aj^T| = {worst:.1e}")


def eigen_speeds(p: PhysParams, rng, n: int = 1000) -> CheckResult:
    A0i = assemble_A0_inv(p, 1)
    c = np.sqrt(p.A * p.gamma)
    worst = 0.0
    for _ in range(n):
        phi = abs(rng.standard_normal()) * 2
        u = rng.standard_normal() * 2
        ev = np.sort(np.linalg.eigvals(A0i @ assemble_Aj(phi, u, p, 0)).real)
        worst = max(worst, float(np.max(np.abs(ev - np.array([u - c * phi, u + c * phi])))))
    return CheckResult("eig(A0^-1 A1) = u -/+ sqrt(A gamma) phi", worst <= 1e-10, f"max error {worst:.2e}")


def constant_state_rhs(p: PhysParams) -> CheckResult:
    from .solvers import full_rhs

    g = Grid(2 * np.pi, 64)
    worst = 0.0
    for mode in ("euler", "ns"):
        y = SymState(np.full(g.N, 0.7), np.full(g.N, 0.9), np.zeros(g.N)).stack()
        worst = max(worst, float(np.max(np.abs(full_rhs(y, g, p, mode)))))
    return CheckResult("constant state has zero RHS", worst == 0.0, f"max |rhs| = {worst:.1e}")


def vacuum_locality(p: PhysParams) -> CheckResult:
    from .initdata import bump
    from .solvers import full_rhs
    from .grid import deriv

    g = Grid(6.0, 256)
    w = bump(g, p, center=3.0, radius=2.0)
    y = w.stack()
    y[2] += 0.3  # nonzero velocity inside the vacuum region
    r = full_rhs(y, g, p, "ns")
    vac = (y[0] == 0) & (y[1] == 0)
    resid = r[2][vac] + y[2][vac] * deriv(y[2], g)[vac]
    worst = float(np.max(np.abs(resid), initial=0.0))
    return CheckResult("du/dt = -u u_x on vacuum nodes", bool(vac.any()) and worst <= 1e-14,
                       f"{int(vac.sum())} vacuum nodes, max residual {worst:.1e}")


def inequality_stability(seed: int) -> CheckResult:
    from .inequalities import inequality_suite

    res = inequality_suite(seed, n_samples=60, N=128)
    ch = res.changes()
    worst = max(ch, key=ch.get)
    ends = [res.coarse[k].ratios for k in ("interp_s0", "interp_s3")]
    exact = all(np.all(r == 1.0) for r in ends)
    return CheckResult("inequality ratios grid-stable", res.ok() and exact,
                       f"largest N->2N change {ch[worst]:.2e} ({worst}); endpoints exact: {exact}")


def fit_exactness() -> CheckResult:
    from .harness import fit_rate

    eps = np.array([1e-2, 5e-3, 2.5e-3])
    f = fit_rate(zip(eps, 3.0 * eps**0.5))
    err = abs(f.slope - 0.5) + abs(f.intercept - np.log(3.0))
    return CheckResult("rate fit exact on power law", err < 1e-12, f"slope {f.slope:.15f}")


def run_checks(seed: int = 0, p: PhysParams | None = None) -> list:
    p = p or PhysParams(A=1.0, gamma=2.0, delta=3.0, epsilon=0.01)
    rng = np.random.default_rng(seed)
    return [
        a0_definiteness(p, rng),
        a0_definiteness(p, rng, 2000, d=3),
        aj_symmetry(p, rng),
        aj_symmetry(p, rng, 200, d=3),
        eigen_speeds(p, rng),
        constant_state_rhs(p),
        vacuum_locality(p),
        inequality_stability(seed),
        fit_exactness(),
    ]
