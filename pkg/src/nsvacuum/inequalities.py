"""Empirical constants of the 1D Gagliardo-Nirenberg, Moser commutator and interpolation
inequalities on band-limited random fields.

Each check returns lhs/rhs with the constant omitted; a bounded, grid-stable maximum
over many samples is the property of interest.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import SPECTRAL, Grid, deriv, hs_frac_norm, lp_norm


@dataclass
class InequalityReport:
    name: str
    params: dict
    ratios: np.ndarray
    skipped: int = 0

    @property
    def max(self) -> float:
        return float(np.max(self.ratios)) if self.ratios.size else float("nan")

    @property
    def finite(self) -> bool:
        return bool(self.ratios.size and np.all(np.isfinite(self.ratios)))

    def relative_change(self, other: "InequalityReport") -> float:
        return abs(other.max - self.max) / self.max


def random_coefficients(n: int, rng: np.random.Generator, modes: int = 8, decay: float = 1.0,
                        mean: bool = False) -> np.ndarray:
    """``(n, modes+1, 2)`` cosine/sine amplitudes; entry 0 is the mean (zero unless ``mean``)."""
    c = rng.standard_normal((n, modes + 1, 2))
    c /= (1.0 + np.arange(modes + 1))[None, :, None] ** decay
    c[:, 0, 1] = 0.0
    if not mean:
        c[:, 0, 0] = 0.0
    return c


def sample_fields(coefs: np.ndarray, grid: Grid) -> np.ndarray:
    k = np.arange(coefs.shape[1])
    th = 2 * np.pi * np.outer(k, grid.x) / grid.L
    return coefs[:, :, 0] @ np.cos(th) + coefs[:, :, 1] @ np.sin(th)


def _ratios(pairs):
    out, skipped = [], 0
    for lhs, rhs in pairs:
        if rhs == 0.0:
            skipped += 1
            continue
        out.append(lhs / rhs)
    return np.array(out), skipped


def check_GN(samples, grid: Grid, p: float = 4.0) -> InequalityReport:
    """``|f|_p <= C |f|_2^(1-theta) |f_x|_2^theta`` with ``theta = 1/2 - 1/p`` (mean-zero f).

    ``p = inf`` gives the ``L^infty`` bound with ``theta = 1/2``.
    """
    theta = 0.5 if np.isinf(p) else 0.5 - 1.0 / p
    pairs = []
    for f in samples:
        a = lp_norm(f, grid, 2.0)
        b = lp_norm(deriv(f, grid, 1, SPECTRAL), grid, 2.0)
        pairs.append((lp_norm(f, grid, p), a ** (1 - theta) * b**theta))
    r, sk = _ratios(pairs)
    return InequalityReport("gagliardo-nirenberg", {"p": p, "theta": theta}, r, sk)


def check_moser(f_samples, g_samples, grid: Grid, s: int = 2) -> InequalityReport:
    """``|d^s(fg) - f d^s g|_2 <= C (|f_x|_inf |d^{s-1} g|_2 + |d^s f|_2 |g|_inf)``."""
    pairs = []
    for f, g in zip(f_samples, g_samples):
        lhs = lp_norm(deriv(f * g, grid, s, SPECTRAL) - f * deriv(g, grid, s, SPECTRAL), grid, 2.0)
        rhs = (lp_norm(deriv(f, grid, 1, SPECTRAL), grid, np.inf) * lp_norm(deriv(g, grid, s - 1, SPECTRAL), grid, 2.0)
               + lp_norm(deriv(f, grid, s, SPECTRAL), grid, 2.0) * lp_norm(g, grid, np.inf))
        pairs.append((lhs, rhs))
    r, sk = _ratios(pairs)
    return InequalityReport("moser-commutator", {"s": s}, r, sk)


def check_interp(samples, grid: Grid, s_prime: float, s: float = 3.0) -> InequalityReport:
    """``||u||_{s'} <= C ||u||_0^(1-s'/s) ||u||_s^(s'/s)`` for ``0 <= s' <= s``."""
    if not 0 <= s_prime <= s:
        raise ValueError("need 0 <= s' <= s")
    th = s_prime / s
    pairs = []
    for f in samples:
        pairs.append((hs_frac_norm(f, grid, s_prime),
                      hs_frac_norm(f, grid, 0.0) ** (1 - th) * hs_frac_norm(f, grid, s) ** th))
    r, sk = _ratios(pairs)
    return InequalityReport("interpolation", {"s_prime": s_prime, "s": s}, r, sk)


@dataclass
class SuiteResult:
    coarse: dict = field(default_factory=dict)
    fine: dict = field(default_factory=dict)

    def changes(self) -> dict:
        return {k: self.coarse[k].relative_change(self.fine[k]) for k in self.coarse}

    def ok(self, tol: float = 0.05) -> bool:
        return all(self.coarse[k].finite and self.fine[k].finite for k in self.coarse) and all(
            c < tol for c in self.changes().values())


def inequality_suite(seed: int = 0, n_samples: int = 200, N: int = 256, L: float = 2 * np.pi,
                     modes: int = 8) -> SuiteResult:
    """Run every check on the same random fields sampled at ``N`` and ``2N``."""
    rng = np.random.default_rng(seed)
    cf = random_coefficients(n_samples, rng, modes)
    cg = random_coefficients(n_samples, rng, modes, mean=True)
    res = SuiteResult()
    for grid, dest in ((Grid(L, N), res.coarse), (Grid(L, 2 * N), res.fine)):
        f, g = sample_fields(cf, grid), sample_fields(cg, grid)
        for p in (4.0, 6.0, np.inf):
            dest[f"GN_p{p:g}"] = check_GN(f, grid, p)
        for s in (1, 2, 3):
            dest[f"moser_s{s}"] = check_moser(g, f, grid, s)
        for sp in (0.0, 1.5, 3.0):
            dest[f"interp_s{sp:g}"] = check_interp(f, grid, sp, 3.0)
    return res
