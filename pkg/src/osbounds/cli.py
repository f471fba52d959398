"""Batch front end.

Subcommands: family verification, bound certification over matrices, and
parameter sweeps for ratio bands and embedding distortion.  All randomness
derives from the --seed flag through counter-based per-task streams, so
output is byte-identical for a fixed configuration regardless of the thread
count.

Exit codes: 0 all checks passed, 1 a certification failed, 2 usage or
malformed input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor

from .errors import BoundViolation, OsboundsError
from .finite_field import make_field
from .map_family import (MapFamily, WeightedSpace, affine_family,
                         full_function_family, symmetric_group,
                         verify_conditions)
from .order_stats import BivariateFunction, BoundReport, check_bounds
from .rv_order_stats import get_distribution, ratio_cell
from . import embedding as emb

DEFAULT_SEED = 0xC0FFEE

USAGE_ERROR = 2
CHECK_FAILED = 1


class UsageError(Exception):
    pass


def _parse_int_list(text, what):
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"cannot parse {what} list {text!r}") from None
    if not values:
        raise UsageError(f"empty {what} list")
    return values


def _dedup(values, what):
    seen = []
    for v in values:
        if v in seen:
            print(f"warning: duplicate {what} {v} ignored", file=sys.stderr)
        else:
            seen.append(v)
    return seen


def build_builtin_family(spec):
    """Builtins: affine:N, sym:N, product:NxM."""
    try:
        name, _, arg = spec.partition(":")
        if name == "affine":
            return affine_family(make_field(int(arg)))
        if name == "sym":
            return symmetric_group(int(arg))
        if name == "product":
            n_text, _, m_text = arg.partition("x")
            n, m = int(n_text), int(m_text)
            return full_function_family(n, WeightedSpace.uniform(m))
    except (ValueError, OsboundsError) as exc:
        raise UsageError(f"bad builtin family {spec!r}: {exc}") from None
    raise UsageError(f"unknown builtin family {spec!r}")


def _load_family(args):
    if args.builtin:
        return build_builtin_family(args.builtin)
    if args.family:
        try:
            with open(args.family) as fh:
                return MapFamily.from_json(fh.read())
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot load family {args.family!r}: {exc}") from None
    raise UsageError("provide --builtin or --family")


def _load_matrix(path):
    rows = []
    try:
        with open(path, newline="") as fh:
            for record in csv.reader(fh):
                if not record:
                    continue
                row = []
                for tok in record:
                    tok = tok.strip()
                    try:
                        row.append(int(tok))
                    except ValueError:
                        row.append(float(tok))
                rows.append(row)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read matrix {path!r}: {exc}") from None
    if not rows:
        raise UsageError(f"matrix file {path!r} is empty")
    return rows


def _load_weights(path):
    try:
        with open(path) as fh:
            weights = json.load(fh)
        return list(weights)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read weights {path!r}: {exc}") from None


def _emit(args, fieldnames, rows):
    if args.format == "json":
        text = json.dumps(rows if len(rows) != 1 else rows[0], indent=2)
        text += "\n"
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run_tasks(tasks, threads):
    """Run callables and return results in task order."""
    if threads <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(task) for task in tasks]
        return [f.result() for f in futures]


def cmd_verify_family(args):
    family = _load_family(args)
    report = verify_conditions(family, tol=args.tol)
    row = {
        "n": family.domain_size,
        "size": family.size,
        "marginal_ok": report.marginal_ok,
        "worst_marginal_deviation": float(report.worst_marginal_deviation),
        "best_CG": float(report.best_CG),
        "cardinality_ok": report.cardinality_ok,
        "required_size": (None if report.required_size is None
                          else float(report.required_size)),
        "passed": report.passed(args.cg, tol=args.tol),
    }
    _emit(args, list(row), [row])
    return 0 if row["passed"] else CHECK_FAILED


def cmd_check_bounds(args):
    family = _load_family(args)
    weights = _load_weights(args.weights) if args.weights else None
    matrix = _load_matrix(args.matrix)
    if any(len(r) != len(family.codomain) for r in matrix):
        raise UsageError("matrix width must match the family codomain size")
    a = BivariateFunction.from_matrix(
        matrix, weights if weights is not None
        else [w for w in family.codomain.weights])
    ells = _parse_int_list(args.ell, "ell")
    if any(not 1 <= e <= a.domain_size for e in ells):
        raise UsageError(f"ell values must lie in 1..{a.domain_size}")
    if args.cg is not None:
        cg = args.cg
    else:
        cg = verify_conditions(family, tol=args.tol).best_CG
    rows = []
    all_ok = True
    for ell in ells:
        try:
            report = check_bounds(a, family, ell, cg, mode=args.mode,
                                  trials=args.trials, seed=args.seed)
        except BoundViolation as exc:
            report = exc.report
            all_ok = False
        rows.append(dict(zip(BoundReport.CSV_FIELDS, report.to_csv_row())))
    _emit(args, list(BoundReport.CSV_FIELDS), rows)
    return 0 if all_ok else CHECK_FAILED


def cmd_sweep_ratio(args):
    dists = _dedup([t for t in args.dist.split(",") if t], "distribution")
    ns = _dedup(_parse_int_list(args.n, "n"), "n")
    ells = _parse_int_list(args.ell, "ell")
    cells = []
    for d in dists:
        get_distribution(d)  # validate the name early
        for n in ns:
            cell_ells = [e for e in ells if 1 <= e <= n]
            if cell_ells:
                cells.append((d, n, cell_ells))

    def make_task(index, dist_name, n, cell_ells):
        def task():
            dist = get_distribution(dist_name)
            return ratio_cell(dist, n, cell_ells, args.samples,
                              trials=args.trials, seed=args.seed + index)
        return task

    results = _run_tasks(
        [make_task(i, d, n, ce) for i, (d, n, ce) in enumerate(cells)],
        args.threads)
    rows = []
    for (d, n, cell_ells), ratios in zip(cells, results):
        for ell in cell_ells:
            r = ratios[ell]
            rows.append({
                "dist": d, "n": n, "ell": ell,
                "samples": args.samples, "trials": args.trials,
                "seed": args.seed,
                "ratio_min": float(r.min()),
                "ratio_mean": float(r.mean()),
                "ratio_max": float(r.max()),
            })
    _emit(args, ["dist", "n", "ell", "samples", "trials", "seed",
                 "ratio_min", "ratio_mean", "ratio_max"], rows)
    return 0


def cmd_sweep_embed(args):
    ns = _dedup(_parse_int_list(args.n, "n"), "n")

    def make_task(index, n):
        def task():
            seed = args.seed + index
            from ._streams import stream
            probes = emb.sphere_samples(n, args.samples, stream(seed, 3))
            spec, _ = emb.build_spec(n, delta=args.delta, probes=probes,
                                     seed=seed)
            return emb.distortion_report(spec, args.samples, seed=seed)
        return task

    results = _run_tasks([make_task(i, n) for i, n in enumerate(ns)],
                         args.threads)
    rows = [dict(zip(emb.DistortionReport.CSV_FIELDS, rep.to_csv_row()))
            for rep in results]
    _emit(args, list(emb.DistortionReport.CSV_FIELDS), rows)
    return 0


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--trials", type=int, default=100_000)
    parser.add_argument("--tol", type=float, default=1e-9)
    parser.add_argument("--format", choices=("json", "csv"), default="csv")
    parser.add_argument("--out", default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="osbounds",
        description="Certify order-statistic bounds, map families, and "
                    "norm equivalences.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-family", help="check the two family conditions")
    p.add_argument("--builtin", help="affine:N | sym:N | product:NxM")
    p.add_argument("--family", help="path to a family JSON file")
    p.add_argument("--cg", type=float, default=None,
                   help="require best_CG <= this value")
    _add_common(p)
    p.set_defaults(func=cmd_verify_family)

    p = sub.add_parser("check-bounds", help="certify the two-sided bounds")
    p.add_argument("--matrix", required=True, help="CSV matrix path")
    p.add_argument("--weights", help="JSON sidecar of atom weights")
    p.add_argument("--builtin", help="affine:N | sym:N | product:NxM")
    p.add_argument("--family", help="path to a family JSON file")
    p.add_argument("--ell", required=True, help="comma-separated levels")
    p.add_argument("--cg", type=float, default=None,
                   help="pairwise constant (default: verified best)")
    p.add_argument("--mode", choices=("exact", "mc"), default="exact")
    _add_common(p)
    p.set_defaults(func=cmd_check_bounds)

    p = sub.add_parser("sweep", help="grid sweeps")
    sweep_sub = p.add_subparsers(dest="sweep_kind", required=True)

    pr = sweep_sub.add_parser("ratio", help="expectation/norm ratio grid")
    pr.add_argument("--dist", required=True,
                    help="comma-separated: const,twopoint,uniform,exp")
    pr.add_argument("--n", required=True, help="comma-separated sizes")
    pr.add_argument("--ell", required=True, help="comma-separated levels")
    pr.add_argument("--samples", type=int, default=20,
                    help="random x vectors per cell")
    _add_common(pr)
    pr.set_defaults(func=cmd_sweep_ratio)

    pe = sweep_sub.add_parser("embed", help="embedding distortion per n")
    pe.add_argument("--n", required=True, help="comma-separated prime powers")
    pe.add_argument("--samples", type=int, default=100)
    pe.add_argument("--delta", type=float, default=0.25)
    _add_common(pe)
    pe.set_defaults(func=cmd_sweep_embed)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else USAGE_ERROR
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except OsboundsError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
