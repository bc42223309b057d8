"""Experiment orchestration and file output: epsilon sweeps, rate fits, config files,
CSV tables and NDJSON trajectories."""

from __future__ import annotations

import base64
import configparser
import csv
import io
import json
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .grid import DiffOp, Grid, NormSpec, norm
from .model import PhysParams, SymState, validate_params
from .solvers import SimConfig, Trajectory, run

DEFAULT_EPSILONS = (1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4)
DEFAULT_NORMS = (NormSpec.lp(2), NormSpec.hs(1), NormSpec.dk(2), NormSpec.hs_frac(1.5), NormSpec.hs_frac(2.5))


# --------------------------------------------------------------------------- rate fitting


@dataclass
class RateFit:
    norm: str
    eps: np.ndarray
    errors: np.ndarray
    slope: float
    intercept: float
    residual: float

    @property
    def n_points(self) -> int:
        return int(self.eps.size)

    @property
    def constant(self) -> float:
        return float(np.exp(self.intercept))


def fit_rate(pairs, norm_id: str = "") -> RateFit:
    """Least-squares line through ``(log eps, log err)``; ``residual`` is the RMS misfit in log space."""
    pairs = list(pairs)
    if len(pairs) < 3:
        raise ValueError(f"need ≥3 points for a rate fit, got {len(pairs)}")
    e = np.array([float(a) for a, _ in pairs])
    r = np.array([float(b) for _, b in pairs])
    if np.any(e <= 0) or np.any(r <= 0) or not np.all(np.isfinite(r)):
        raise ValueError("rate fit needs positive finite epsilons and errors")
    X = np.column_stack([np.log(e), np.ones_like(e)])
    (slope, icpt), *_ = np.linalg.lstsq(X, np.log(r), rcond=None)
    res = np.log(r) - X @ np.array([slope, icpt])
    return RateFit(norm_id, e, r, float(slope), float(icpt), float(np.sqrt(np.mean(res**2))))


def candidate_exponents(spec: NormSpec) -> dict:
    """Decay exponents to compare against for the fractional norms: ``1 - s/3`` and ``2 (1 - s/3)``."""
    if spec.kind != "Hs_frac":
        return {}
    base = 1.0 - spec.s / 3.0
    return {"single": base, "double": 2.0 * base}


# --------------------------------------------------------------------------- sweep


@dataclass
class SweepConfig:
    base: SimConfig
    epsilons: Sequence[float] = DEFAULT_EPSILONS
    norms: Sequence[NormSpec] = DEFAULT_NORMS
    threads: int = 1

    def __post_init__(self):
        eps = [float(e) for e in self.epsilons]
        if any(not 0 < e <= 1 for e in eps):
            raise ValueError("every epsilon must lie in (0, 1]")
        if any(eps[i + 1] > eps[i] for i in range(len(eps) - 1)):
            raise ValueError("epsilons must be non-increasing")
        self.epsilons = eps


@dataclass
class SweepResult:
    epsilons: list
    norms: list
    rows: list                       # (eps, {label: error}, sup_t J) per successful member, in list order
    fits: list
    failed: dict = field(default_factory=dict)
    reference: Optional[Trajectory] = None

    @property
    def labels(self) -> list:
        return [n.label for n in self.norms]

    def column(self, label: str) -> list:
        return [errs[label] for _, errs, _ in self.rows]

    def monotone(self, label: str) -> bool:
        """Errors nonincreasing as epsilon decreases."""
        col = self.column(label)
        return all(col[i + 1] <= col[i] for i in range(len(col) - 1))

    def fit(self, label: str) -> RateFit:
        return next(f for f in self.fits if f.norm == label)

    @property
    def sup_apriori(self) -> list:
        return [j for _, _, j in self.rows]

    @property
    def apriori_spread(self) -> float:
        v = self.sup_apriori
        return max(v) / min(v)


def state_error(a: SymState, b: SymState, grid: Grid, spec: NormSpec) -> float:
    """``||phi_a - phi_b|| + ||u_a - u_b||`` in the given norm."""
    return norm(a.phi - b.phi, grid, spec) + norm(a.u - b.u, grid, spec)


def trajectory_errors(traj: Trajectory, ref: Trajectory, norms) -> dict:
    """Sup over common frames of each error norm."""
    if len(traj.times) != len(ref.times) or np.max(np.abs(traj.t - ref.t)) > 1e-12:
        raise ValueError("frame times of run and reference differ")
    return {spec.label: max(state_error(a, b, traj.grid, spec) for a, b in zip(traj.states, ref.states))
            for spec in norms}


def sweep(cfg: SweepConfig) -> SweepResult:
    from .diagnostics import apriori

    if len(cfg.epsilons) < 3:
        raise ValueError("need ≥3 points")
    base = cfg.base.with_(mode="ns")
    ref = run(base.with_(mode="euler"))
    if ref.failed:
        raise RuntimeError(f"euler reference failed at t={ref.failure_time}: {ref.failure_reason}")

    def member(eps):
        c = base.with_(params=base.params.with_(epsilon=eps))
        tr = run(c)
        if tr.failed:
            return eps, None, tr
        return eps, trajectory_errors(tr, ref, cfg.norms), tr

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as ex:
            results = list(ex.map(member, cfg.epsilons))
    else:
        results = [member(e) for e in cfg.epsilons]
    rows, failed = [], {}
    for eps, errs, tr in results:  # map() preserves epsilon order
        if errs is None:
            failed[eps] = f"t={tr.failure_time}: {tr.failure_reason}"
        else:
            rows.append((eps, errs, apriori(tr).sup))
    if len(rows) < 3:
        raise RuntimeError(f"only {len(rows)} sweep members succeeded; need ≥3 points")
    fits = [fit_rate([(e, errs[n.label]) for e, errs, _ in rows], n.label) for n in cfg.norms]
    return SweepResult(list(cfg.epsilons), list(cfg.norms), rows, fits, failed, ref)


def rate_comparison(res: SweepResult, tol: float = 0.05) -> list:
    """For each fractional norm: measured slope against both candidate exponents."""
    rows = []
    for spec in res.norms:
        for name, p in candidate_exponents(spec).items():
            f = res.fit(spec.label)
            rows.append({"norm": spec.label, "candidate": name, "exponent": p, "slope": f.slope,
                         "supported": f.slope >= p - tol})
    return rows


# --------------------------------------------------------------------------- configuration


def git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True, text=True,
                             timeout=10, cwd=Path(__file__).resolve().parent)
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


DEFAULT_INI = """\
# nsvacuum run configuration (INI: [section] then key = value)
[params]
A = 1
gamma = 2
delta = 3
alpha = 1
beta = 0
epsilon = 0.01
eta = 0

[grid]
L = 6
N = 512

[run]
t_end = 0.05
mode = ns
integrator = ssprk3
cfl_hyp = 0.4
cfl_par = 0.25
n_frames = 20
op = fd4
blowup_factor = 1000

[initial]
name = bump
center = 3
radius = 2

[sweep]
epsilons = 1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4

[picard]
K = 6
t_end = 0.02
init = warm
eps_scaled_heat = false
provider = stage

[eta]
etas = 1e-1, 1e-2, 1e-3, 1e-4
"""


def load_config(path: Optional[str] = None, text: Optional[str] = None) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    cp.read_string(DEFAULT_INI)
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    if text is not None:
        cp.read_string(text)
    return cp


def _num(v: str):
    try:
        return int(v)
    except ValueError:
        return float(v)


def float_list(v: str) -> list:
    return [float(x) for x in v.replace(",", " ").split()]


def params_from(cp) -> PhysParams:
    s = cp["params"]
    p = PhysParams(**{k: float(s[k]) for k in ("A", "gamma", "delta", "alpha", "beta", "epsilon", "eta")})
    bad = validate_params(p)
    if bad:
        raise ValueError("invalid parameters: " + "; ".join(bad))
    return p


def sim_config_from(cp) -> SimConfig:
    r = cp["run"]
    init = dict(cp["initial"])
    name = init.pop("name", "bump")
    return SimConfig(
        params=params_from(cp),
        grid=Grid(float(cp["grid"]["L"]), int(cp["grid"]["N"])),
        t_end=float(r["t_end"]),
        mode=r.get("mode", "ns"),
        integrator=r.get("integrator", "ssprk3"),
        cfl_hyp=float(r.get("cfl_hyp", 0.4)),
        cfl_par=float(r.get("cfl_par", 0.25)),
        n_frames=int(r.get("n_frames", 20)),
        op=DiffOp.parse(r.get("op", "fd4")),
        blowup_factor=float(r.get("blowup_factor", 1000)),
        blowup_threshold=float(r["blowup_threshold"]) if "blowup_threshold" in r else None,
        initial_data=name,
        initial_kwargs={k: _num(v) for k, v in init.items()},
    )


# --------------------------------------------------------------------------- CSV / NDJSON


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def header_block(params: PhysParams, grid: Grid, extra: Optional[dict] = None) -> str:
    lines = [f"# params: {json.dumps(params.as_dict(), sort_keys=True)}",
             f"# grid: L={grid.L!r} N={grid.N}",
             f"# git: {git_describe()}"]
    for k, v in (extra or {}).items():
        lines.append(f"# {k}: {v}")
    return "\n".join(lines) + "\n"


def write_csv(path, columns: Sequence[str], rows, header: str = "") -> None:
    buf = io.StringIO()
    buf.write(header)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise ValueError("row length does not match the column list")
        w.writerow([_fmt(v) for v in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_csv(path) -> tuple[list, list]:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


SWEEP_COLUMNS = {"L2": "err_L2", "H1": "err_H1", "D2": "err_D2", "Hs1.5": "err_Hs1.5", "Hs2.5": "err_Hs2.5"}


def write_sweep(res: SweepResult, outdir, seed: Optional[int] = None) -> list:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    grid, p = res.reference.grid, res.reference.params
    hdr = header_block(p, grid, {"seed": seed, "epsilons": " ".join(repr(e) for e in res.epsilons),
                                 "failed": json.dumps({repr(k): v for k, v in res.failed.items()})})
    cols = ["epsilon"] + [SWEEP_COLUMNS.get(l, "err_" + l) for l in res.labels]
    rows = [[e] + [errs[l] for l in res.labels] for e, errs, _ in res.rows]
    paths = [outdir / "sweep.csv", outdir / "fit.csv", outdir / "rate_compare.csv", outdir / "apriori.csv"]
    write_csv(paths[0], cols, rows, hdr)
    write_csv(paths[1], ["norm", "slope", "intercept", "residual", "n_points"],
              [[f.norm, f.slope, f.intercept, f.residual, f.n_points] for f in res.fits], hdr)
    cmp_rows = rate_comparison(res)
    write_csv(paths[2], ["norm", "candidate", "exponent", "slope", "supported"],
              [[r[c] for c in ("norm", "candidate", "exponent", "slope", "supported")] for r in cmp_rows], hdr)
    write_csv(paths[3], ["epsilon", "sup_J"], [[e, j] for e, _, j in res.rows], hdr)
    return paths


def _b64(a: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(a, dtype="<f8").tobytes()).decode("ascii")


def _unb64(s: str) -> np.ndarray:
    return np.frombuffer(base64.b64decode(s), dtype="<f8").astype(float)


def write_trajectory(traj: Trajectory, path) -> None:
    """NDJSON: one header record, one record per frame, then a failure record if the run aborted."""
    with open(path, "w", encoding="utf-8") as fh:
        head = {"type": "header", "params": traj.params.as_dict(), "grid": {"L": traj.grid.L, "N": traj.grid.N},
                "mode": traj.mode, "eta": traj.eta, "fields": ["vphi", "phi", "u"], "dtype": "<f8",
                "git": git_describe()}
        fh.write(json.dumps(head, sort_keys=True) + "\n")
        for t, s in zip(traj.times, traj.states):
            rec = {"type": "frame", "t": t, "vphi": _b64(s.vphi), "phi": _b64(s.phi), "u": _b64(s.u)}
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
        if traj.failed:
            fh.write(json.dumps({"type": "failure", "t": traj.failure_time, "reason": traj.failure_reason},
                                sort_keys=True) + "\n")


def read_trajectory(path) -> Trajectory:
    with open(path, encoding="utf-8") as fh:
        recs = [json.loads(line) for line in fh if line.strip()]
    head = recs[0]
    if head.get("type") != "header":
        raise ValueError("trajectory file lacks a header record")
    traj = Trajectory(Grid(head["grid"]["L"], head["grid"]["N"]), PhysParams(**head["params"]), head["mode"],
                      head.get("eta", 0.0))
    for r in recs[1:]:
        if r["type"] == "frame":
            traj.add_frame(r["t"], np.stack([_unb64(r[k]) for k in ("vphi", "phi", "u")]))
        elif r["type"] == "failure":
            traj.failed, traj.failure_time, traj.failure_reason = True, r["t"], r["reason"]
    return traj


def write_step_diagnostics(traj: Trajectory, path) -> None:
    write_csv(path, ["t", "dt", "max_speed", "apriori", "energy_residual"],
              [[s.t, s.dt, s.max_speed, s.apriori, s.energy_residual] for s in traj.steps],
              header_block(traj.params, traj.grid, {"mode": traj.mode}))
