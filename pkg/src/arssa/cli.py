"""Command-line entry point: ``arssa {gen-dist,validate,oracle,simulate,bench}``.

Every file written starts with a ``# arssa <command> {json config}`` line
echoing the full configuration, followed by CSV (or JSON for reports).
Environment variables are never consulted.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

from . import engine, validate
from .model import gen_discrete_gaussian, load_network, load_propensity_row, save_propensity_row
from .oracle import win_probabilities
from .select_ar import ThresholdPolicy, compute_threshold

__all__ = ["main", "build_parser"]


def _echo(command, args):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")}
    return f"arssa {command} " + json.dumps(cfg, sort_keys=True, default=str)


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def cmd_gen_dist(args):
    if args.kind != "gaussian":
        raise ValueError(f"unknown distribution kind {args.kind!r}")
    row = gen_discrete_gaussian(args.m)
    header = _echo("gen-dist", args)
    if args.out in (None, "-"):
        sys.stdout.write(f"# {header}\n")
        sys.stdout.write("".join(f"{float(v)!r}\n" for v in row.values))
    else:
        save_propensity_row(row, args.out, header=header)


def _distributions(args):
    if args.dist:
        return {Path(p).stem: load_propensity_row(p) for p in args.dist}
    return {f"gaussian-{m}": gen_discrete_gaussian(m) for m in args.m}


def cmd_validate(args):
    dists = _distributions(args)
    header = _echo("validate", args)

    def progress(rep):
        if not args.quiet:
            print(f"{rep.distribution} K={rep.K} w={rep.w:g} repeat={rep.repeat}: "
                  f"mse={rep.mse_vs_propensity:.4g} mse_oracle={rep.mse_vs_oracle:.4g} "
                  f"rejections={rep.rejections} max_z={rep.max_z_vs_oracle:.3g}",
                  file=sys.stderr)

    reports = validate.run_grid(dists, Ks=args.k, ws=args.w, total_selections=args.n,
                                seed=args.seed, repeats=args.repeats, workers=args.workers,
                                progress=progress)
    out = Path(args.out)
    validate.write_grid_csv(reports, out, header=header)
    report = Path(args.report) if args.report else out.with_suffix(".json")
    validate.write_reports_json(reports, report, config={"echo": header})


def cmd_oracle(args):
    row = load_propensity_row(args.dist)
    probs = win_probabilities(row, compute_threshold(row, ThresholdPolicy(args.w)), tol=args.tol)
    fh, close = _open_out(args.out)
    try:
        fh.write(f"# {_echo('oracle', args)}\n")
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["index", "probability"])
        for j, p in enumerate(probs.per_reaction):
            out.writerow([j, repr(float(p))])
        out.writerow(["reject", repr(float(probs.reject))])
    finally:
        if close:
            fh.close()


def cmd_simulate(args):
    net = load_network(args.network)
    run = engine.run_batch(net, args.k, args.t_end, selector=args.selector,
                           policy=ThresholdPolicy(args.w), seed=args.seed,
                           max_retries=args.max_retries, workers=args.workers,
                           record_every=args.record_every if args.trajectory else None)
    header = _echo("simulate", args)
    engine.write_summary_csv(run, args.out, header=header)
    if args.trajectory:
        engine.write_trajectory_csv(run, args.trajectory, header=header)


def cmd_bench(args):
    fh, close = _open_out(args.out)
    try:
        fh.write(f"# {_echo('bench', args)}\n")
        out = csv.writer(fh, lineterminator="\n")
        cols = ["M", "K", "rounds", "workers", "repeats", "mean_s", "std_s", "per_selection_s"]
        out.writerow(cols)
        for m in args.m:
            for k in args.k:
                for w in args.workers:
                    res = validate.bench_select(m, k, args.rounds, w, args.repeats, args.seed)
                    out.writerow([res[c] for c in cols])
                    fh.flush()
    finally:
        if close:
            fh.close()


def _positive_int(s):
    v = int(float(s))
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _seed(s):
    v = int(s, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _w(s):
    v = float(s)
    if not v >= 1:
        raise argparse.ArgumentTypeError("w must be >= 1")
    return v


def build_parser():
    p = argparse.ArgumentParser(
        prog="arssa",
        description="Batched acceptance-rejection next-reaction selection for the SSA.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-dist", help="write the discrete Gaussian test distribution")
    g.add_argument("--m", type=int, required=True, help="number of reactions (>= 2)")
    g.add_argument("--kind", default="gaussian", choices=["gaussian"])
    g.add_argument("--out", default="-", help="output file (default: stdout)")
    g.set_defaults(func=cmd_gen_dist)

    v = sub.add_parser("validate", help="selection accuracy experiments (MSE, oracle, rejections)")
    src = v.add_mutually_exclusive_group()
    src.add_argument("--dist", nargs="+", help="distribution file(s), one value per line")
    src.add_argument("--m", nargs="+", type=_positive_int, default=list(validate.TABLE_M),
                     help="Gaussian sizes used when no --dist is given (default: %(default)s)")
    v.add_argument("--k", nargs="+", type=_positive_int, default=list(validate.TABLE_K),
                   help="realization counts (default: %(default)s)")
    v.add_argument("--w", nargs="+", type=_w, default=list(validate.TABLE_W),
                   help="threshold multipliers (default: %(default)s)")
    v.add_argument("--n", type=_positive_int, default=10_000_000,
                   help="total selections per cell (default: %(default)s)")
    v.add_argument("--seed", type=_seed, default=0, help="base seed (default: 0)")
    v.add_argument("--repeats", type=_positive_int, default=1,
                   help="runs per cell; repeat r uses seed + r (default: 1)")
    v.add_argument("--workers", type=_positive_int, default=1)
    v.add_argument("--out", required=True, help="grid CSV path")
    v.add_argument("--report", help="JSON report path (default: --out with .json suffix)")
    v.add_argument("--quiet", action="store_true", help="no progress lines on stderr")
    v.set_defaults(func=cmd_validate)

    o = sub.add_parser("oracle", help="exact AR win probabilities for a distribution")
    o.add_argument("--dist", required=True)
    o.add_argument("--w", type=_w, default=1.0)
    o.add_argument("--tol", type=float, default=1e-12)
    o.add_argument("--out", default="-")
    o.set_defaults(func=cmd_oracle)

    s = sub.add_parser("simulate", help="run K SSA realizations of a network")
    s.add_argument("--network", required=True, help="network JSON file")
    s.add_argument("--k", type=_positive_int, default=100)
    s.add_argument("--t-end", type=float, required=True)
    s.add_argument("--selector", choices=engine.SELECTORS, default="ar")
    s.add_argument("--w", type=_w, default=1.0)
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("--max-retries", type=int, default=100)
    s.add_argument("--workers", type=_positive_int, default=1)
    s.add_argument("--out", required=True, help="summary CSV path")
    s.add_argument("--trajectory", help="optional trajectory CSV path")
    s.add_argument("--record-every", type=_positive_int, default=1)
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bench", help="time batched AR selection")
    b.add_argument("--m", nargs="+", type=_positive_int, default=[64, 256, 1024])
    b.add_argument("--k", nargs="+", type=_positive_int, default=[1000])
    b.add_argument("--rounds", type=_positive_int, default=100)
    b.add_argument("--workers", nargs="+", type=_positive_int, default=[1])
    b.add_argument("--repeats", type=_positive_int, default=10)
    b.add_argument("--seed", type=_seed, default=0)
    b.add_argument("--out", default="-")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "validate" and args.n < max(args.k):
        parser.error(f"--n ({args.n}) must be at least every --k (max {max(args.k)})")
    if args.command == "simulate" and not args.t_end > 0:
        parser.error("--t-end must be positive")
    try:
        args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"arssa: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
