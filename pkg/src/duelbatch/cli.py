"""Command-line entry point: ``duelbatch {run,sweep,plot,bound,gen}``.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings

from . import bounds, harness
from .algos import POLICIES
from .errors import ConfigError, DomainError, DuelBatchError, ParamError, UsageError
from .prefmat import SYNTHETIC_KINDS, generate_synthetic, to_csv

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n\n{self.format_usage()}")


def _matrix_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("matrix source (CSV path or synthetic generator)")
    g.add_argument("--matrix", metavar="CSV", help="preference-matrix CSV file")
    g.add_argument("--kind", choices=SYNTHETIC_KINDS, default="uniform-gap")
    g.add_argument("--K", type=int, help="number of arms for a synthetic matrix")
    g.add_argument("--eps", type=float, default=0.2, help="gap parameter of the synthetic matrix")
    g.add_argument("--matrix-seed", type=int, default=0)


def _experiment_args(p: argparse.ArgumentParser) -> None:
    _matrix_args(p)
    p.add_argument("--algo", choices=sorted(POLICIES), default="c2b")
    p.add_argument("--T", type=int, required=True, help="total comparison budget")
    p.add_argument("--B", default="auto", help="round budget: integer, 'auto' or 'auto+k'")
    p.add_argument("--log-base", choices=("2", "e"), default="2", help="logarithm base for B=auto")
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--seed", type=int, default=0, help="trial k uses seed + k")
    p.add_argument("--f-k", type=float, default=None, help="override f(K) in the KL elimination threshold")
    p.add_argument("--checkpoints", type=int, default=harness.DEFAULT_GRID_SIZE)
    p.add_argument("--timing", action="store_true", help="record wall-clock time in the JSON sidecar")


def _config(args) -> harness.RunConfig:
    if args.matrix:
        source = harness.MatrixSource(path=args.matrix)
    else:
        if args.K is None:
            raise UsageError("give --matrix CSV or --K for a synthetic matrix")
        source = harness.MatrixSource(kind=args.kind, K=args.K, eps=args.eps, seed=args.matrix_seed)
    return harness.RunConfig(
        matrix=source,
        T=args.T,
        algorithm=args.algo,
        B=args.B,
        log_base=args.log_base,
        repeats=args.repeats,
        seed=args.seed,
        f_of_K=args.f_k,
        grid_size=args.checkpoints,
    )


def _write_outputs(agg: harness.AggregateTrace, prefix: str, timing: bool, svg: bool, log_x: bool) -> None:
    harness.emit_csv(agg, prefix + ".csv")
    harness.emit_json(agg, prefix + ".json", timing=timing)
    if svg:
        harness.emit_svg([(agg.label, agg.t, agg.mean)], prefix + ".svg", bound=harness.bound_overlay(agg), log_x=log_x)


def cmd_run(args) -> int:
    agg = harness.run_experiment(_config(args))
    _write_outputs(agg, args.out, args.timing, args.svg, args.log_x)
    print(f"{agg.label}: mean R(T) = {agg.final_mean:.6g} over {len(agg.finals)} trials -> {args.out}.csv")
    return EXIT_OK


def cmd_sweep(args) -> int:
    B_values = [b.strip() for b in args.B_list.split(",")] if args.B_list else []
    algos = [a.strip() for a in args.algos.split(",")] if args.algos else []
    for a in algos:
        if a not in POLICIES:
            raise UsageError(f"unknown algorithm {a!r}")
    results = harness.sweep(_config(args), B_values=B_values, algorithms=algos)
    os.makedirs(args.out_dir, exist_ok=True)
    for agg in results:
        stem = os.path.join(args.out_dir, f"{agg.config.algorithm}_B{agg.config.rounds}")
        harness.emit_csv(agg, stem + ".csv")
        harness.emit_json(agg, stem + ".json", timing=args.timing)
    summary = harness.sweep_summary_csv(results)
    harness._atomic_write(os.path.join(args.out_dir, "summary.csv"), summary)
    if args.svg:
        harness.emit_svg(
            [(a.label, a.t, a.mean) for a in results], os.path.join(args.out_dir, "sweep.svg"), log_x=args.log_x
        )
    sys.stdout.write(summary)
    return EXIT_OK


def cmd_plot(args) -> int:
    traces = []
    first_bound = None
    for path in args.csv:
        t, mean = harness.read_trace_csv(path)
        traces.append((os.path.splitext(os.path.basename(path))[0], t, mean))
        if args.bound and first_bound is None:
            first_bound = _bound_from_sidecar(path, t)
    overlays = [(os.path.splitext(os.path.basename(p))[0], p) for p in args.overlay or []]
    harness.emit_svg(traces, args.out, overlays=overlays, bound=first_bound, log_x=args.log_x, title=args.title or "")
    print(f"wrote {args.out}")
    return EXIT_OK


def _bound_from_sidecar(csv_path: str, t):
    sidecar = os.path.splitext(csv_path)[0] + ".json"
    if not os.path.exists(sidecar):
        raise UsageError(f"--bound needs the JSON sidecar {sidecar}")
    with open(sidecar, encoding="utf-8") as fh:
        meta = json.load(fh)
    gaps = [g for g in meta.get("gaps") or [] if g > 0]
    cfg = meta["config"]
    if not gaps or meta["K"] < 2:
        return None
    q = cfg["T"] ** (1.0 / cfg["B_resolved"])
    return "bound", bounds.bound_curve(t, meta["K"], q, min(gaps), meta["gaps"])


def cmd_bound(args) -> int:
    inputs = bounds.BoundInputs(K=args.K, T=args.T, B=args.B, delta_min=args.dmin, delta=args.delta)
    q = inputs.q
    A = bounds.a_constant(args.K, args.dmin)
    gaps = [0.0] + [args.dmin] * (args.K - 1)
    print(f"q = T^(1/B) = {q:.6g}")
    print(f"C(delta) = {bounds.c_delta(q, args.delta)}")
    print(f"A = {A:.6g}")
    print(f"r(delta) = {bounds.r_delta(q, args.delta, args.K, args.dmin)}")
    print(f"expected regret bound ({bounds.SHAPE_ONLY}, all gaps = dmin) = {bounds.regret_bound_expected(inputs, gaps):.6g}")
    print(f"high-probability bound ({bounds.SHAPE_ONLY}, all gaps = dmin) = {bounds.regret_bound_high_prob(inputs, gaps):.6g}")
    return EXIT_OK


def cmd_gen(args) -> int:
    text = to_csv(generate_synthetic(args.kind, args.K, args.eps, args.seed))
    if args.out:
        harness._atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="duelbatch", description="Batched dueling-bandit experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run one experiment")
    _experiment_args(p)
    p.add_argument("--out", required=True, help="output prefix; writes PREFIX.csv and PREFIX.json")
    p.add_argument("--svg", action="store_true", help="also write PREFIX.svg with a shape-only bound overlay")
    p.add_argument("--log-x", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="grid of experiments over B values and/or algorithms")
    _experiment_args(p)
    p.add_argument("--B-list", help="comma-separated B values, e.g. 4,8,16 or auto,auto+6")
    p.add_argument("--algos", help="comma-separated algorithms")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--svg", action="store_true")
    p.add_argument("--log-x", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plot", help="render result CSVs to SVG")
    p.add_argument("csv", nargs="+", help="results CSV files")
    p.add_argument("--overlay", action="append", help="external trace CSV (t,regret), resampled onto the first grid")
    p.add_argument("--bound", action="store_true", help="overlay the shape-only bound (reads the JSON sidecar)")
    p.add_argument("--log-x", action="store_true")
    p.add_argument("--title")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("bound", help="print analysis constants and shape-only bounds")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--B", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--dmin", type=float, required=True)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("gen", help="write a synthetic preference-matrix CSV")
    p.add_argument("--kind", choices=SYNTHETIC_KINDS, default="uniform-gap")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        warnings.showwarning = lambda message, *a, **k: print(f"warning: {message}", file=sys.stderr)
        try:
            return args.func(args)
        except (UsageError, ConfigError, ParamError, DomainError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except (DuelBatchError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
