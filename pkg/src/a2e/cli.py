"""a2e demo | verify | bench"""

import argparse
import sys

from .errors import A2EError


def parse_range(text):
    """'3' -> [3], '1..5' -> [1, 2, 3, 4, 5], '1,3,10' -> [1, 3, 10]."""
    try:
        if ".." in text:
            lo, hi = (int(v) for v in text.split("..", 1))
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; use a, a..b or a,b,c") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--lambda", dest="lam", type=int, default=128)
    common.add_argument("--L", type=int, default=256)
    common.add_argument("--N", type=parse_range, default=None)
    common.add_argument("--Nprime", type=parse_range, default=None)
    common.add_argument("--M", type=parse_range, default=None)
    common.add_argument("--U", type=parse_range, default=None)
    common.add_argument("--reps", type=int, default=None)
    common.add_argument("--preset", choices=["paper"], default=None)
    common.add_argument("--ring-mode", choices=["keys", "ids"], default="ids")
    common.add_argument("--out", default=None)

    p = argparse.ArgumentParser(prog="a2e", description="A2E protocol simulator and benchmarks")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("demo", parents=[common], help="run one full story and print a summary")
    v = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    v.add_argument("--only", type=parse_range, default=None, help="criterion numbers to run")
    b = sub.add_parser("bench", parents=[common], help="measure per-entity costs, write CSV")
    b.add_argument("--phases", default="issue,auth,trace,update")
    return p


def _first(values, default):
    return values[0] if values else default


def _demo(args):
    from .demo import run_demo

    world = run_demo(
        seed=7 if args.seed is None else args.seed,
        N=_first(args.N, 5),
        Nprime=_first(args.Nprime, 3),
        M=_first(args.M, 100),
        U=_first(args.U, 2),
        ring_mode=args.ring_mode,
    )
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(world.transport.transcript())
    return 0


def _verify(args):
    from . import acceptance

    results = acceptance.run_all(only=args.only, seed=0 if args.seed is None else args.seed,
                                 echo=lambda r: print(r.line(), flush=True))
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed or not results else 0


def _bench(args):
    from .bench import HEADER, PRESET_POINT, BenchConfig, bench_sweep

    point = PRESET_POINT
    cfg = BenchConfig(
        lam=args.lam,
        L=args.L,
        N=args.N or [point["N"]],
        Nprime=args.Nprime or [point["Nprime"]],
        M=args.M or [point["M"]],
        U=args.U or [point["U"]],
        reps=args.reps or 5,
        seed=0 if args.seed is None else args.seed,
        out=args.out,
        ring_mode=args.ring_mode,
        phases=[s for s in args.phases.split(",") if s],
    )
    if args.preset == "paper":
        cfg.N, cfg.Nprime, cfg.M, cfg.U = [5], [3], [100], [2]
    rows = bench_sweep(cfg)
    if not args.out:
        print(",".join(HEADER))
        for r in rows:
            print(",".join(str(v) for v in r.csv_row()))
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.lam != 128:
        print(f"error: unsupported lambda {args.lam} (only 128)", file=sys.stderr)
        return 2
    if args.L < args.lam or args.L % 8:
        print("error: --L must be a multiple of 8 and at least lambda", file=sys.stderr)
        return 2
    handler = {"demo": _demo, "verify": _verify, "bench": _bench}[args.command]
    try:
        return handler(args)
    except (A2EError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
