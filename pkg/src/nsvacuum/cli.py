"""Command line entry point: ``nsvacuum {simulate,sweep,picard,check,eta-study}``.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 check failed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness as hs

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_CHECK = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(sp):
    sp.add_argument("--config", help="INI configuration file (defaults are built in)")
    sp.add_argument("--out", default="out", help="output directory")
    sp.add_argument("--seed", type=int, default=0, help="seed for random fields")
    sp.add_argument("--threads", type=int, default=1, help="concurrent runs")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="nsvacuum", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", parser_class=_Parser)
    s = sub.add_parser("simulate", help="one run: trajectory + per-step diagnostics")
    _common(s)
    s = sub.add_parser("sweep", help="epsilon sweep against the inviscid run, with rate fits")
    _common(s)
    s.add_argument("--epsilons", help="comma-separated list overriding [sweep] epsilons")
    s = sub.add_parser("picard", help="Picard iteration and contraction report")
    _common(s)
    s.add_argument("--K", type=int, help="number of Picard steps")
    s.add_argument("--t-end", type=float, help="time horizon (overrides [picard] t_end)")
    s = sub.add_parser("check", help="built-in invariant suite")
    _common(s)
    s = sub.add_parser("eta-study", help="distances between linearized solves as eta -> 0")
    _common(s)
    s.add_argument("--etas", help="comma-separated, strictly decreasing")
    ap.add_argument("--version", action="store_true", help="print version and exit")
    return ap


def _numeric_failure(what: str, t, reason: str) -> int:
    print(f"numerical failure in {what} at t={t}: {reason}", file=sys.stderr)
    return EXIT_NUMERIC


def cmd_simulate(args, cp) -> int:
    from .diagnostics import vacuum_residual
    from .solvers import run

    cfg = hs.sim_config_from(cp)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    traj = run(cfg)
    hs.write_trajectory(traj, out / "trajectory.ndjson")
    hs.write_step_diagnostics(traj, out / "steps.csv")
    if traj.failed:
        return _numeric_failure("simulate", traj.failure_time, traj.failure_reason)
    print(f"{len(traj.steps)} steps to t={traj.times[-1]:g}; sup J = {traj.sup_apriori:.6e}")
    print(vacuum_residual(traj))
    return EXIT_OK


def cmd_sweep(args, cp) -> int:
    eps = hs.float_list(args.epsilons if args.epsilons else cp["sweep"]["epsilons"])
    if len(eps) < 3:
        raise UsageError("need ≥3 points")
    base = hs.sim_config_from(cp)
    try:
        res = hs.sweep(hs.SweepConfig(base, eps, threads=max(1, args.threads)))
    except RuntimeError as exc:
        print(f"numerical failure in sweep: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    hs.write_sweep(res, args.out, seed=args.seed)
    for f in res.fits:
        print(f"{f.norm:>6}: slope {f.slope:.4f}  residual {f.residual:.2e}  ({f.n_points} points)")
    for lab in res.labels:
        if not res.monotone(lab):
            print(f"note: {lab} errors are not monotone in epsilon")
    print(f"sup J spread across epsilon: {res.apriori_spread:.4f}")
    return EXIT_OK


def cmd_picard(args, cp) -> int:
    from .picard import picard_run

    pc = cp["picard"]
    K = args.K if args.K is not None else int(pc["K"])
    if K < 2:
        raise UsageError("K must be >= 2")
    t_end = args.t_end if args.t_end is not None else float(pc["t_end"])
    cfg = hs.sim_config_from(cp).with_(t_end=t_end)
    rep = picard_run(None, K, cfg, init=pc.get("init", "warm"),
                     eps_scaled=pc.getboolean("eps_scaled_heat", False), provider=pc.get("provider", "stage"))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ratios = [float("nan")] + rep.ratios
    hs.write_csv(out / "picard.csv", ["k", "gamma", "ratio", "dissipation"],
                 [[k + 1, g, r, d] for k, (g, r, d) in enumerate(zip(rep.gammas, ratios, rep.dissipation))],
                 hs.header_block(cfg.params, cfg.grid, {"K": K, "t_end": t_end, "init": rep.init}))
    (out / "picard.txt").write_text(rep.summary() + "\n", encoding="utf-8")
    print(rep.summary())
    if rep.failed:
        return _numeric_failure("picard", rep.final.failure_time if rep.final else None, rep.failure)
    return EXIT_OK


def cmd_check(args, cp) -> int:
    from .checks import run_checks

    results = run_checks(args.seed, hs.params_from(cp))
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


def cmd_eta(args, cp) -> int:
    from .diagnostics import eta_limit_study
    from .solvers import InterpolatedCoefficients, initial_state, run

    etas = hs.float_list(args.etas if args.etas else cp["eta"]["etas"])
    cfg = hs.sim_config_from(cp).with_(mode="ns")
    coeff = run(cfg)
    if coeff.failed:
        return _numeric_failure("eta-study coefficients", coeff.failure_time, coeff.failure_reason)
    try:
        st = eta_limit_study(initial_state(cfg), etas, cfg, InterpolatedCoefficients(coeff))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    except RuntimeError as exc:
        print(f"numerical failure in eta-study: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    hs.write_csv(out / "eta.csv", ["eta", "eta_next", "distance"],
                 [[a, b, d] for a, b, d in zip(etas, etas[1:], st.distances)],
                 hs.header_block(cfg.params, cfg.grid, {"monotone": st.monotone}))
    for a, b, d in zip(etas, etas[1:], st.distances):
        print(f"d({a:g}, {b:g}) = {d:.6e}")
    print(f"monotone decrease: {st.monotone}; smallest/largest = {st.contraction:.3e}")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "picard": cmd_picard, "check": cmd_check,
            "eta-study": cmd_eta}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        if args.version:
            from . import __version__

            print(__version__)
            return EXIT_OK
        if args.cmd is None:
            raise UsageError("a subcommand is required")
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        try:
            cp = hs.load_config(args.config)
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"bad config: {exc}") from None
        return COMMANDS[args.cmd](args, cp)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        ap.print_usage(sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
