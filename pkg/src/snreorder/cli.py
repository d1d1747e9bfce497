"""Command-line front end: analyze | reorder | factor | compare.

All emitted CSVs carry a `# generated:` timestamp comment as their first
line; everything below it is deterministic for a fixed configuration and
seed, except for measured wall-clock columns in compare output.

Set SNREORDER_LOG=debug|info|warning to control log verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from . import pipeline
from .matrixio import (
    MatrixFormatError,
    PermutationError,
    emit_permutation,
    parse_matrix_market,
    parse_permutation,
    symmetric_matvec,
    synthesize_spd_values,
)
from .profiles import performance_profile, write_csv
from .rlb import SpdError, solve
from .workspace import AllocationMeter

log = logging.getLogger("snreorder")


def _configure_logging() -> None:
    level = os.environ.get("SNREORDER_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def _load_matrix(path: str):
    with open(path) as handle:
        return parse_matrix_market(handle)


def _analysis_from_args(args) -> pipeline.Analysis:
    matrix = _load_matrix(args.input)
    perm = None
    if args.perm:
        with open(args.perm) as handle:
            perm = parse_permutation(handle.read())
    return pipeline.analyze(matrix, perm=perm, use_mdo=args.mdo, cap=args.merge_cap)


def _method_from_args(args) -> pipeline.ReorderMethod:
    if args.method == "none":
        return pipeline.ReorderMethod("none")
    if args.method == "pr":
        return pipeline.ReorderMethod("pr", strategy=args.strategy)
    return pipeline.ReorderMethod("tsp", rule=args.rule, weighted=args.weighted)


def _median_seconds(fn, reps: int) -> float:
    if reps < 1 or reps % 2 == 0:
        raise ValueError("reps must be a positive odd integer")
    times = []
    for _ in range(reps):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times)


def cmd_analyze(args) -> int:
    analysis = _analysis_from_args(args)
    out = Path(args.out)
    row = {
        "n": analysis.matrix.n,
        "nnz_a": analysis.matrix.nnz_lower,
        "nnz_l": analysis.base_nnz,
        "flops": analysis.es.flops,
        "supernodes_fundamental": analysis.fundamental.count,
        "supernodes_merged": analysis.partition.count,
        "storage_entries": analysis.storage_nnz,
        "storage_growth": f"{analysis.storage_nnz / analysis.base_nnz - 1.0:.6g}",
        "work_growth": f"{analysis.storage_work / analysis.es.flops - 1.0:.6g}",
    }
    write_csv(out / "analyze.csv", list(row), [row])
    write_csv(
        out / "merges.csv",
        ["step", "child", "parent", "cost", "cumulative_ratio"],
        [
            {
                "step": m.step,
                "child": m.child,
                "parent": m.parent,
                "cost": m.cost,
                "cumulative_ratio": f"{m.ratio:.6g}",
            }
            for m in analysis.merges
        ],
    )
    print(
        f"n={row['n']} nnz(A)={row['nnz_a']} nnz(L)={row['nnz_l']} "
        f"flops={row['flops']} supernodes={row['supernodes_fundamental']}"
        f"->{row['supernodes_merged']} storage_growth={row['storage_growth']}"
    )
    return 0


def cmd_reorder(args) -> int:
    analysis = _analysis_from_args(args)
    method = _method_from_args(args)
    within = pipeline.reorder(analysis, method, seed=args.seed)
    stats = pipeline.stats_for(analysis, within)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "permutation.txt").write_text(
        emit_permutation(pipeline.full_ordering(analysis, within))
    )
    rows = []
    for t in range(analysis.partition.count):
        rows.append(
            {
                "supernode": t,
                "width": analysis.partition.width(t),
                "updaters": int(stats.updater_count[t]),
                "blocks": int(stats.per_target_bc[t]),
                "weighted_blocks": int(stats.per_target_weighted[t]),
                "max_block": int(stats.max_block[t]),
                "mean_block": f"{stats.mean_block(t):.6g}",
            }
        )
    write_csv(out / "blockstats.csv", list(rows[0]) if rows else [], rows)
    print(
        f"method={method.label} blocks={stats.total} weighted={stats.weighted_total}"
    )
    return 0


def cmd_factor(args) -> int:
    analysis = _analysis_from_args(args)
    method = _method_from_args(args)
    within = pipeline.reorder(analysis, method, seed=args.seed)
    storage, trace, _ = pipeline.factorize(analysis, within)
    reordered = synthesize_spd_values(
        pipeline.apply_symmetric_permutation(analysis.matrix, within)
    )
    rng = np.random.default_rng(args.seed)
    b = rng.standard_normal(analysis.matrix.n)
    x = solve(storage, b)
    residual = float(
        np.linalg.norm(symmetric_matvec(reordered, x) - b) / np.linalg.norm(b)
    )
    out = Path(args.out)
    counts = {kind: trace.count(kind) for kind in ("potrf", "trsm", "syrk", "gemm")}
    report = {
        "n": analysis.matrix.n,
        "nnz_l": analysis.base_nnz,
        "method": method.label,
        "residual": f"{residual:.6e}",
        **counts,
    }
    write_csv(out / "factor_report.csv", list(report), [report])
    write_csv(
        out / "kernel_trace.csv",
        ["kind", "source", "target", "m", "n", "k"],
        [
            {
                "kind": c.kind,
                "source": c.source,
                "target": c.target,
                "m": c.m,
                "n": c.n,
                "k": c.k,
            }
            for c in trace.calls
        ],
    )
    print(f"method={method.label} residual={residual:.3e} kernels={counts}")
    return 0


def cmd_compare(args) -> int:
    matrix_dir = Path(args.input)
    paths = sorted(matrix_dir.glob("*.mtx"))
    if not paths:
        raise ValueError(f"no .mtx files in {matrix_dir}")
    methods = [pipeline.parse_method(m) for m in args.methods.split(",")]
    rows = []
    times: dict[str, dict[str, float]] = {m.label: {} for m in methods}
    times_over: dict[str, dict[str, float]] = {m.label: {} for m in methods}
    space: dict[str, dict[str, float]] = {m.label: {} for m in methods}
    for path in paths:
        name = path.stem
        matrix = _load_matrix(str(path))
        analysis = pipeline.analyze(matrix, use_mdo=args.mdo, cap=args.merge_cap)
        for method in methods:
            meter = AllocationMeter()
            within = pipeline.reorder(analysis, method, seed=args.seed, meter=meter)
            t_reorder = _median_seconds(
                lambda: pipeline.reorder(analysis, method, seed=args.seed), args.reps
            )
            start = time.perf_counter()
            hadj = pipeline.reordered_hadj(analysis, within)
            blocks = pipeline.block_list(analysis.partition, hadj)
            reordered = synthesize_spd_values(
                pipeline.apply_symmetric_permutation(analysis.matrix, within)
            )
            t_rebuild = time.perf_counter() - start
            stats = pipeline.block_stats(blocks, analysis.partition)

            def run_factor():
                storage = pipeline.assemble(reordered, analysis.partition, hadj)
                start = time.perf_counter()
                pipeline.rlb_factor(storage, blocks)
                return time.perf_counter() - start

            t_factor = statistics.median(run_factor() for _ in range(args.reps))
            label = method.label
            times[label][name] = t_factor
            times_over[label][name] = t_factor + t_reorder + t_rebuild
            space[label][name] = float(max(meter.peak, 1))
            rows.append(
                {
                    "matrix": name,
                    "method": label,
                    "reorder_seconds": f"{t_reorder:.6e}",
                    "reorder_peak_words": meter.peak,
                    "blocks": stats.total,
                    "weighted_blocks": stats.weighted_total,
                    "factor_seconds": f"{t_factor:.6e}",
                    "factor_overhead_seconds": f"{t_factor + t_reorder + t_rebuild:.6e}",
                }
            )
            log.info("compare: %s %s done", name, label)
    out = Path(args.out)
    write_csv(out / "comparison.csv", list(rows[0]), rows)
    named = [
        ("profile_time", times, "factor time", False),
        ("profile_time_overhead", times_over, "factor + reorder overhead time", False),
        ("profile_space", space, "reorder working storage", True),
    ]
    for stem, values, title, logx in named:
        profile = performance_profile(values)
        write_csv(out / f"{stem}.csv", ["method", "tau", "fraction"], profile.rows())
        if not args.no_plot:
            from .plots import render_profile

            render_profile(profile, out / f"{stem}.png", title, logx=logx)
    print(f"compared {len(paths)} matrices x {len(methods)} methods -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snreorder",
        description="Supernodal analysis and within-supernode column reordering",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_method=False):
        p.add_argument("--input", required=True, help="Matrix Market file")
        p.add_argument("--perm", help="fill-reducing permutation file")
        p.add_argument("--mdo", action="store_true", help="minimum-degree fallback ordering")
        p.add_argument("--merge-cap", type=float, default=0.125, metavar="FRAC")
        p.add_argument("--out", default=".", help="output directory")
        if with_method:
            p.add_argument("--method", choices=("none", "pr", "tsp"), default="none")
            p.add_argument("--strategy", choices=("natural", "ndesc", "work"), default="work")
            p.add_argument("--rule", choices=("arbitrary", "nearest", "farthest"), default="farthest")
            p.add_argument("--weighted", action="store_true")
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("analyze", help="symbolic analysis and merge report")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("reorder", help="reorder columns within supernodes")
    common(p, with_method=True)
    p.set_defaults(func=cmd_reorder)

    p = sub.add_parser("factor", help="blocked factorization and residual check")
    common(p, with_method=True)
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("compare", help="compare methods over a matrix directory")
    p.add_argument("--input", required=True, help="directory of .mtx files")
    p.add_argument("--methods", default="FARwts,PR-work", help="comma-separated labels")
    p.add_argument("--mdo", action="store_true")
    p.add_argument("--merge-cap", type=float, default=0.125, metavar="FRAC")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=7, help="odd repetition count per timing")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MatrixFormatError, PermutationError, SpdError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
