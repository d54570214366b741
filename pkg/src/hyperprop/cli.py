"""Command line entry point: ``hyperprop {run,sweep,check,synth}``."""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from .checks import run_checks
from .pipeline import METHODS, InputError, RunSpec, TABLE_ORDER, ingest, read_labels, run, sweep
from .synthetic import triangle_blobs

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NOT_CONVERGED = 3
EXIT_INVARIANT = 4


def _bandwidth(value: str):
    return value if value.lower() == "auto" else float(value)


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", default="hyper-sym", choices=sorted(METHODS))
    p.add_argument("--solver", dest="mode", default="closed", choices=["iterative", "closed"])
    p.add_argument("--alpha", type=float, default=0.96)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--clusters", type=int, default=250, help="k-means clusters (hypergraph methods)")
    p.add_argument("--clusterings", type=int, default=1,
                   help="stack hyperedges from this many k-means runs (seed, seed+1, ...)")
    p.add_argument("--knn", type=int, default=10, help="neighbours per vertex (graph methods)")
    p.add_argument("--bandwidth", type=_bandwidth, default="auto")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--classes", type=int, default=None,
                   help="number of classes (default: inferred from label/truth files)")
    p.add_argument("--weighting", default="unit", choices=["unit", "inverse-variance"])
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--truth", default=None)
    p.add_argument("--out-dir", dest="out_dir", default=None)


def _spec(args: argparse.Namespace) -> RunSpec:
    names = {f.name for f in dataclasses.fields(RunSpec)}
    return RunSpec(**{k: v for k, v in vars(args).items() if k in names})


_CONVERTERS = {"int": int, "int | None": int, "float": float}


def _parse_grid(items: list[str]) -> dict[str, list]:
    types = {f.name: f.type for f in dataclasses.fields(RunSpec)}
    grid: dict[str, list] = {}
    for item in items:
        key, sep, values = item.partition("=")
        key = key.strip().replace("-", "_")
        if key == "solver":
            key = "mode"
        if not sep or key not in types:
            raise InputError(f"bad grid entry {item!r}; expected name=v1,v2,...")
        conv = _bandwidth if key == "bandwidth" else _CONVERTERS.get(str(types[key]), str)
        grid.setdefault(key, []).extend(conv(v) for v in values.split(",") if v.strip())
    return grid


def cmd_run(args) -> int:
    result = run(_spec(args))
    q = result.micro_q
    print(f"{result.spec.method}: labeled={result.metrics['labeled']} "
          f"iterations={result.metrics['solver']['iterations']} "
          f"residual={result.metrics['solver']['residual']:.2e}"
          + (f" Q={100 * q:.2f}%" if q is not None else ""))
    for w in result.metrics["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_sweep(args) -> int:
    spec = _spec(args)
    grid = _parse_grid(args.grid) if args.grid else {"method": TABLE_ORDER}
    x, pairs = ingest(spec.features, spec.labels)
    truth = read_labels(spec.truth, x.shape[0]) if spec.truth else None
    res = sweep(x, pairs, truth, spec, grid)
    text = res.table()
    print(text, end="")
    if spec.out_dir:
        out = Path(spec.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.txt").write_text(text)
        (out / "sweep.json").write_text(res.json())
    not_converged = any(r is not None and not r.converged for r in res.results)
    if res.failures:
        return EXIT_INPUT
    return EXIT_NOT_CONVERGED if not_converged else EXIT_OK


def cmd_check(args) -> int:
    if args.instances < 1:
        raise InputError("--instances must be at least 1")
    results = run_checks(args.instances, args.seed)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_INVARIANT


def cmd_synth(args) -> int:
    ds = triangle_blobs(n=args.n, side=args.side, spread=args.spread,
                        labeled_fraction=args.labeled_fraction, seed=args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "features.csv").write_text(
        "".join(",".join(repr(float(v)) for v in row) + "\n" for row in ds.features))
    (out / "labels.csv").write_text("".join(f"{i},{j}\n" for i, j in ds.label_pairs()))
    (out / "truth.csv").write_text("".join(f"{i},{j}\n" for i, j in ds.truth_pairs()))
    print(f"wrote {ds.features.shape[0]} samples ({ds.labeled.size} labeled) to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperprop",
        description="Semi-supervised label propagation on k-means hypergraphs and kNN graphs.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one method end to end")
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a Cartesian parameter grid and compare")
    _add_run_flags(p)
    p.add_argument("--grid", action="append", default=[],
                   help="name=v1,v2,... (repeatable); default: all six methods")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check", help="run the invariant suite on random instances")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("synth", help="write a seeded three-blob dataset")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--side", type=float, default=5.0)
    p.add_argument("--spread", type=float, default=1.0)
    p.add_argument("--labeled-fraction", dest="labeled_fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
