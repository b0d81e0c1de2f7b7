"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 numeric or degenerate input.
"""
from __future__ import annotations

import argparse
import contextlib
import io
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import cluster, dobrushin, dynamics, peierls, sampler
from .dobrushin import fmt
from .exceptions import WRLabError
from .lattice import Box
from .model import AprioriMeasure, ModelParams, alpha_from_lambda_h

EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}")


def _alpha_triple(text: str) -> AprioriMeasure:
    vals = _floats(text)
    if len(vals) != 3:
        raise argparse.ArgumentTypeError("alpha needs three masses: minus,zero,plus")
    try:
        return AprioriMeasure.normalized(*vals)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{n}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


@contextlib.contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="\n") as fh:
            yield fh


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("WRLAB_THREADS", "1")))
    except ValueError:
        return 1


def _model_alpha(args, parser) -> AprioriMeasure:
    has_lh = args.lam is not None or args.h is not None
    if args.alpha is not None and has_lh:
        parser.error("give either --alpha or --lambda/--h, not both")
    if args.alpha is not None:
        return args.alpha
    return alpha_from_lambda_h(args.lam if args.lam is not None else 1.0,
                               args.h if args.h is not None else 0.0)


def cmd_dobrushin_scan(args, parser) -> int:
    if args.res < 2:
        parser.error("--res must be >= 2")
    if args.B < 1:
        parser.error("--B must be >= 1")
    if args.hardcore == (args.beta is not None):
        parser.error("give exactly one of --beta or --hardcore")
    beta = math.inf if args.hardcore else args.beta
    grid = dobrushin.region_scan(beta, args.B, args.res, workers=args.threads)
    with _output(args.out) as fh:
        dobrushin.write_region_csv(grid, fh)
    return 0


def cmd_peierls(args, parser) -> int:
    if args.d < 2:
        parser.error("--d must be >= 2")
    with _output(args.out) as fh:
        if args.find_lambda_c:
            fh.write("beta,lambda_c\n")
            for beta in args.beta:
                lc = peierls.find_critical_lambda(beta, args.d, args.tol)
                fh.write(f"{fmt(beta)},{'none' if lc is None else fmt(lc)}\n")
        else:
            rows = [(b, lam) for b in args.beta for lam in args.lam]
            peierls.write_peierls_csv(rows, args.d, fh)
    return 0


def cmd_sample(args, parser) -> int:
    if args.hardcore and args.beta is not None:
        parser.error("give at most one of --beta or --hardcore")
    alpha = _model_alpha(args, parser)
    beta = math.inf if args.beta is None else args.beta
    params = ModelParams.from_alpha(alpha, beta)
    spec = sampler.ChainSpec(Box.cube(args.side, args.d), params, args.boundary,
                             args.sweeps, args.burn_in, args.seed, args.chains,
                             track_percolation=args.percolation)
    run = sampler.run_chains(spec, args.threads)
    with _output(args.out) as fh:
        run.write_csv(fh)
    if args.snapshot:
        with open(args.snapshot, "w", newline="\n") as fh:
            sampler.write_snapshot(run.traces[0].final, fh)
    est = run.origin_estimate()
    summary = (f"origin p_minus={fmt(est.p_minus)} p_zero={fmt(est.p_zero)} "
               f"p_plus={fmt(est.p_plus)} stderr={','.join(fmt(s) for s in est.stderr)}")
    if args.percolation:
        p, se = run.percolation_estimate()
        summary += f" percolation={fmt(p)} percolation_stderr={fmt(se)}"
    print(summary, file=sys.stderr)
    return 0


def cmd_evolve(args, parser) -> int:
    if args.t < 0:
        parser.error("--t must be >= 0")
    with open(args.input) as fh:
        cfg = sampler.read_snapshot(fh)
    out = dynamics.evolve_config(cfg, args.t, sampler.chain_rng(args.seed, 0))
    out.boundary_name = cfg.boundary_name
    with _output(args.out) as fh:
        sampler.write_snapshot(out, fh)
    return 0


def cmd_badness(args, parser) -> int:
    if (args.alpha is None) == (args.alpha_r is None):
        parser.error("give exactly one of --alpha or --alpha-r")
    alpha = args.alpha if args.alpha is not None else cluster.alpha_for_ratio(args.alpha_r, args.p_zero)
    buf = io.StringIO()
    cluster.write_probe_csv(alpha, args.t, args.L, buf, r=args.r, d=args.d)
    with _output(args.out) as fh:
        fh.write(buf.getvalue())
    if args.crossover:
        tc = cluster.locate_crossover(alpha, max(args.L), args.threshold, d=args.d)
        print(f"crossover_t={fmt(tc)} t_G={fmt(dynamics.t_G(alpha))}", file=sys.stderr)
    return 0


def cmd_transition_times(args, parser) -> int:
    if args.t_sweep and args.beta is None:
        parser.error("--t-sweep needs --beta")
    alpha = _model_alpha(args, parser)
    times = dynamics.transition_times(alpha, args.beta, args.d)
    lines = [f"t_G={fmt(times.t_G)}"]
    if args.beta is not None:
        t0 = times.t_0
        lines.append(f"t_0={'undefined' if t0 is None else fmt(t0)}")
        lines.append(f"gibbs_all_times={'true' if times.gibbs_all_times else 'false'}")
    with _output(args.out) as fh:
        for line in lines:
            fh.write(line + "\n")
        if args.t_sweep:
            dynamics.write_time_sweep_csv(alpha, args.beta, args.d, args.t_sweep, fh)
    return 0


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value file; command-line flags override it")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--threads", type=int, default=_default_threads(),
                   help="worker count (default: $WRLAB_THREADS or 1)")
    p.add_argument("--seed", type=int, default=0, help="64-bit seed")


def _model_flags(p: argparse.ArgumentParser):
    p.add_argument("--alpha", type=_alpha_triple, help="a priori masses minus,zero,plus")
    p.add_argument("--lambda", dest="lam", type=float, help="intensity lambda > 0")
    p.add_argument("--h", type=float, help="field h")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wrlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dobrushin-scan", help="Dobrushin uniqueness verdicts on a simplex grid")
    _common(p)
    p.add_argument("--B", type=int, required=True, help="maximal degree")
    p.add_argument("--beta", type=float, help="soft-core repulsion")
    p.add_argument("--hardcore", action="store_true", help="scan the hard-core model")
    p.add_argument("--res", type=int, default=60, help="simplex resolution N >= 2")
    p.set_defaults(func=cmd_dobrushin_scan)

    p = sub.add_parser("peierls", help="Peierls bound a(beta, lambda) and certificate")
    _common(p)
    p.add_argument("--d", type=int, default=2, help="dimension >= 2")
    p.add_argument("--beta", type=_floats, default=[math.inf], help="comma list; inf = hard-core")
    p.add_argument("--lambda", dest="lam", type=_floats, default=[1e10], help="comma list")
    p.add_argument("--find-lambda-c", action="store_true", help="bisect for the certified lambda")
    p.add_argument("--tol", type=float, default=1e-6, help="relative bisection tolerance")
    p.set_defaults(func=cmd_peierls)

    p = sub.add_parser("sample", help="heat-bath Monte Carlo on a centred cube")
    _common(p)
    _model_flags(p)
    p.add_argument("--beta", type=float, help="soft-core repulsion (omit for hard-core)")
    p.add_argument("--hardcore", action="store_true", help="hard-core model (the default)")
    p.add_argument("--d", type=int, default=2, help="dimension")
    p.add_argument("--side", type=int, default=16, help="sites per axis")
    p.add_argument("--boundary", choices=sorted(sampler.BOUNDARY_NAMES), default="AllPlus")
    p.add_argument("--sweeps", type=int, default=10_000)
    p.add_argument("--burn-in", type=int, default=1_000)
    p.add_argument("--chains", type=int, default=1)
    p.add_argument("--percolation", action="store_true", help="track origin-to-edge connection")
    p.add_argument("--snapshot", help="write chain 0's final configuration here")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("evolve", help="apply the spin-flip dynamics to a snapshot")
    _common(p)
    p.add_argument("--input", required=True, help="snapshot file")
    p.add_argument("--t", type=float, required=True, help="time >= 0")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("badness", help="gamma^f gap on the line-connector geometry")
    _common(p)
    p.add_argument("--alpha", type=_alpha_triple, help="a priori masses minus,zero,plus")
    p.add_argument("--alpha-r", type=float, help="ratio alpha(1)/alpha(-1)")
    p.add_argument("--p-zero", type=float, default=1 / 3, help="alpha(0) used with --alpha-r")
    p.add_argument("--t", type=_floats, required=True, help="comma list of times")
    p.add_argument("--L", type=_ints, default=[30], help="comma list of connector lengths")
    p.add_argument("--r", type=int, default=0, help="inner radius with +1 decoration")
    p.add_argument("--d", type=int, default=2, help="dimension")
    p.add_argument("--crossover", action="store_true", help="also bisect for the crossover time")
    p.add_argument("--threshold", type=float, default=0.05, help="gap threshold for --crossover")
    p.set_defaults(func=cmd_badness)

    p = sub.add_parser("transition-times", help="t_G, t_0 and the all-time Gibbs test")
    _common(p)
    _model_flags(p)
    p.add_argument("--beta", type=float, help="soft-core repulsion for t_0")
    p.add_argument("--d", type=int, default=2, help="dimension")
    p.add_argument("--t-sweep", type=_floats, help="comma list of times for a CSV sweep")
    p.set_defaults(func=cmd_transition_times)
    return parser


def _find_config(argv: Sequence[str]) -> Optional[str]:
    for k, tok in enumerate(argv):
        if tok == "--config" and k + 1 < len(argv):
            return argv[k + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    choices = parser._subparsers._group_actions[0].choices
    path = _find_config(argv)
    command = next((tok for tok in argv if tok in choices), None)
    if path is None or command is None:
        return parser.parse_args(argv)
    sub = choices[command]
    try:
        values = read_config(path)
    except (OSError, ValueError) as exc:
        sub.error(str(exc))
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in values.items():
        action = known.get(key)
        if action is None or key in ("config", "help"):
            sub.error(f"unknown config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            try:
                defaults[key] = action.type(raw)
            except (argparse.ArgumentTypeError, ValueError) as exc:
                sub.error(f"config key {key}: {exc}")
        else:
            defaults[key] = raw
    # required flags may come from the file
    for action in sub._actions:
        if action.dest in defaults:
            action.required = False
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config(parser, argv)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        return args.func(args, sub)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except (WRLabError, ValueError, ZeroDivisionError, OverflowError, np.linalg.LinAlgError) as exc:
        print(f"wrlab: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
