"""Uniform periodic grid, derivative operators, quadrature and Sobolev-type norms."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_DERIV = 4


@dataclass(frozen=True)
class Grid:
    L: float = 2 * np.pi
    N: int = 256
    periodic: bool = True

    def __post_init__(self):
        if self.N < 16:
            raise ValueError(f"grid needs N >= 16, got {self.N}")
        if not self.L > 0:
            raise ValueError("domain length must be positive")
        if not self.periodic:
            raise ValueError("only periodic grids are supported")

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.N) * self.dx

    @property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers of the full FFT ordering."""
        return 2 * np.pi * np.fft.fftfreq(self.N, d=self.dx)

    def integrate(self, f: np.ndarray) -> float:
        # rectangle rule == trapezoid rule for periodic data
        return float(np.sum(f) * self.dx)

    def refine(self, factor: int = 2) -> "Grid":
        return Grid(self.L, self.N * factor)


@dataclass(frozen=True)
class DiffOp:
    """``kind`` is ``"fd"`` (central differences of ``order`` 2 or 4) or ``"spectral"``."""

    kind: str = "fd"
    order: int = 4

    def __post_init__(self):
        if self.kind not in ("fd", "spectral"):
            raise ValueError(f"unknown derivative kind {self.kind!r}")
        if self.kind == "fd" and self.order not in (2, 4):
            raise ValueError("central FD supports order 2 or 4")

    def __str__(self):
        return "spectral" if self.kind == "spectral" else f"fd{self.order}"

    @classmethod
    def parse(cls, text: str) -> "DiffOp":
        text = text.strip().lower()
        if text == "spectral":
            return cls("spectral", 0)
        if text in ("fd2", "fd4"):
            return cls("fd", int(text[-1]))
        raise ValueError(f"cannot parse derivative operator {text!r}")


FD4 = DiffOp("fd", 4)
FD2 = DiffOp("fd", 2)
SPECTRAL = DiffOp("spectral", 0)


@lru_cache(maxsize=None)
def fd_weights(k: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Central stencil (offsets, weights) for the k-th derivative at the given order, unit spacing."""
    npts = 2 * ((k + 1) // 2) - 1 + order
    m = npts // 2
    offsets = np.arange(-m, m + 1)
    V = np.vander(offsets.astype(float), increasing=True).T
    rhs = np.zeros(len(offsets))
    rhs[k] = float(np.prod(np.arange(1, k + 1)))
    w = np.linalg.solve(V, rhs)
    # antisymmetric / symmetric stencils: clean rounding so constants map to exactly 0
    w = 0.5 * (w + (-1) ** k * w[::-1])
    return offsets, w


def deriv(f: np.ndarray, grid: Grid, k: int = 1, op: DiffOp = FD4) -> np.ndarray:
    """k-th periodic derivative along the last axis."""
    if k < 0 or k > MAX_DERIV:
        raise ValueError(f"derivative order {k} outside 0..{MAX_DERIV}")
    f = np.asarray(f, dtype=float)
    if k == 0:
        return f.copy()
    if op.kind == "spectral":
        return _spectral_deriv(f, grid, k)
    offsets, w = fd_weights(k, op.order)
    m = len(offsets) // 2
    out = np.zeros_like(f)
    # paired differences: constants map to exactly 0
    for o in range(1, m + 1):
        fp, fm = np.roll(f, -o, axis=-1), np.roll(f, o, axis=-1)
        if k % 2:
            out += w[m + o] * (fp - fm)
        else:
            out += w[m + o] * ((fp - f) + (fm - f))
    return out / grid.dx**k


def _spectral_deriv(f: np.ndarray, grid: Grid, k: int) -> np.ndarray:
    n = f.shape[-1]
    fh = np.fft.rfft(f, axis=-1)
    kk = 2 * np.pi * np.fft.rfftfreq(n, d=grid.dx)
    mult = (1j * kk) ** k
    if k % 2 == 1 and n % 2 == 0:
        mult[-1] = 0.0
    return np.fft.irfft(fh * mult, n=n, axis=-1)


def fd_matrix(grid: Grid, k: int, op: DiffOp = FD4):
    """Sparse circulant matrix of the FD k-th derivative (used by the implicit solves)."""
    import scipy.sparse as sp

    if op.kind != "fd":
        raise ValueError("fd_matrix needs an FD operator")
    offsets, w = fd_weights(k, op.order)
    n = grid.N
    rows, cols, vals = [], [], []
    idx = np.arange(n)
    for o, c in zip(offsets, w):
        if c == 0.0:
            continue
        rows.append(idx)
        cols.append((idx + o) % n)
        vals.append(np.full(n, c / grid.dx**k))
    return sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


# --------------------------------------------------------------------------- norms


@dataclass(frozen=True)
class NormSpec:
    """One of ``Lp(p)``, ``Hs_int(s)``, ``Hs_frac(s)``, ``Dk(k, r)``."""

    kind: str
    s: float = 0.0
    p: float = 2.0

    def __post_init__(self):
        if self.kind not in ("Lp", "Hs_int", "Hs_frac", "Dk"):
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.kind == "Hs_int" and (self.s != int(self.s) or not 0 <= self.s <= 3):
            raise ValueError("Hs_int needs an integer s in 0..3")
        if self.kind == "Hs_frac" and not 0 <= self.s < 3 + 1e-12:
            raise ValueError("Hs_frac needs s in [0, 3]")
        if self.kind == "Dk" and (self.s != int(self.s) or not 0 <= self.s <= MAX_DERIV):
            raise ValueError("Dk needs an integer k in 0..4")

    @classmethod
    def lp(cls, p: float = 2.0):
        return cls("Lp", 0.0, p)

    @classmethod
    def hs(cls, s: int):
        return cls("Hs_int", float(s))

    @classmethod
    def hs_frac(cls, s: float):
        return cls("Hs_frac", float(s))

    @classmethod
    def dk(cls, k: int, r: float = 2.0):
        return cls("Dk", float(k), r)

    @property
    def label(self) -> str:
        if self.kind == "Lp":
            return "Linf" if np.isinf(self.p) else f"L{self.p:g}"
        if self.kind == "Hs_int":
            return f"H{int(self.s)}"
        if self.kind == "Hs_frac":
            return f"Hs{self.s:g}"
        return f"D{int(self.s)}" if self.p == 2 else f"D{int(self.s)},{self.p:g}"


def lp_norm(f: np.ndarray, grid: Grid, p: float = 2.0) -> float:
    f = np.abs(np.asarray(f, dtype=float))
    if np.isinf(p):
        return float(np.max(f, initial=0.0))
    return float((np.sum(f**p) * grid.dx) ** (1.0 / p))


def sobolev_symbol(ksq: np.ndarray, s: float) -> np.ndarray:
    """Fourier weight of the squared H^s norm: ``sum_{j<=s} q**j`` with ``q = |k|^2``.

    Non-integer ``s`` uses the closed form ``(q**(s+1) - 1) / (q - 1)``, which agrees with
    the integer sums, increases with s, and is equivalent to ``(1+q)**s`` up to constants.
    """
    q = np.asarray(ksq, dtype=float)
    if float(s).is_integer():
        return sum(q**j for j in range(int(s) + 1)) + 0.0 * q
    d = q - 1.0
    out = np.full_like(q, s + 1.0)
    far = np.abs(d) > 1e-12
    with np.errstate(divide="ignore"):  # q = 0 gives log1p(-1) = -inf, expm1(-inf) = -1: exact
        out[far] = np.expm1((s + 1.0) * np.log1p(d[far])) / d[far]
    return out


def hs_frac_norm(f: np.ndarray, grid: Grid, s: float) -> float:
    f = np.asarray(f, dtype=float)
    fh = np.fft.fft(f) / grid.N
    ksq = grid.wavenumbers**2
    return float(np.sqrt(grid.L * np.sum(sobolev_symbol(ksq, s) * np.abs(fh) ** 2)))


def hs_int_norm(f: np.ndarray, grid: Grid, s: int, op: DiffOp = SPECTRAL) -> float:
    tot = 0.0
    for j in range(int(s) + 1):
        tot += lp_norm(deriv(f, grid, j, op), grid, 2.0) ** 2
    return float(np.sqrt(tot))


def dk_norm(f: np.ndarray, grid: Grid, k: int, r: float = 2.0, op: DiffOp = SPECTRAL) -> float:
    return lp_norm(deriv(f, grid, int(k), op), grid, r)


def norm(f: np.ndarray, grid: Grid, spec: NormSpec, op: DiffOp = SPECTRAL) -> float:
    if spec.kind == "Lp":
        return lp_norm(f, grid, spec.p)
    if spec.kind == "Hs_int":
        return hs_int_norm(f, grid, int(spec.s), op)
    if spec.kind == "Hs_frac":
        return hs_frac_norm(f, grid, spec.s)
    return dk_norm(f, grid, int(spec.s), spec.p, op)
