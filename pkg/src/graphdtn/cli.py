"""Command-line interface for batch computations on metric graph files.

Commands: assemble, synthesize, verify, sweep, export-dot. Exit codes:
0 success, 1 verification failure, 2 input error, 3 numerical failure
(spectral hit, pivot breakdown, degenerate decomposition, or residual above
tolerance). Primary output goes to stdout only on success; diagnostics go
to stderr.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .dtn import (
    SpectrumHit,
    dtn_matrix,
    eigenvalues_sym,
    read_matrix,
    require_symmetric,
    write_matrix,
)
from .graph import GraphError, GraphFormatError, deserialize, export_dot, serialize
from .oracle import (
    PivotBreakdown,
    _candidate_lambdas,
    counting_function,
    report_points_json,
    report_table,
    verify_counting_bounds,
    verify_neumann_dirichlet_count,
    verify_robin_count,
)
from .synthesis import DecompositionDegenerate, synthesize

__all__ = ["main"]

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


class _InputError(ValueError):
    """Bad user input (file contents, flags); maps to exit code 2."""


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise _InputError(f"cannot read {path!r}: {exc}") from exc


def _load_graph(path: str):
    try:
        return deserialize(_read_text(path))
    except GraphFormatError as exc:
        raise _InputError(f"{path}: {exc}") from exc


def _parse_grid(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 3:
        raise _InputError(f"grid spec must be start:stop:count, got {spec!r}")
    try:
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError as exc:
        raise _InputError(f"grid spec must be start:stop:count, got {spec!r}") from exc
    if count < 1:
        raise _InputError(f"grid count must be at least 1, got {count}")
    return np.linspace(start, stop, count)


def _parse_robin(spec: str) -> tuple[float, float]:
    parts = spec.split(",")
    if len(parts) != 2:
        raise _InputError(f"robin spec must be a,b with 0 <= a < b, got {spec!r}")
    try:
        a, b = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise _InputError(f"robin spec must be a,b, got {spec!r}") from exc
    if not (0 <= a < b):
        raise _InputError(f"robin spec needs 0 <= a < b, got a={a}, b={b}")
    return a, b


def cmd_assemble(args) -> tuple[str, int]:
    g = _load_graph(args.graph)
    r = dtn_matrix(g, args.lam)
    return write_matrix(r) + "\n", EXIT_OK


def cmd_synthesize(args) -> tuple[str, int]:
    try:
        target = read_matrix(_read_text(args.matrix))
        target = require_symmetric(target)
        if target.shape[0] < 2:
            raise ValueError(
                f"synthesis needs a k x k target with k >= 2, got k={target.shape[0]}"
            )
        if not args.lam > 0:
            raise ValueError(f"synthesis needs a positive spectral parameter, got {args.lam}")
    except ValueError as exc:
        raise _InputError(str(exc)) from exc
    g = synthesize(target, args.lam)
    with open(args.out, "w", encoding="utf-8") as handle:
        handle.write(serialize(g) + "\n")
    residual = float(np.max(np.abs(dtn_matrix(g, args.lam) - target)))
    tol = args.tol if args.tol is not None else 1e-8 * (1.0 + float(np.max(np.abs(target))))
    if residual > tol:
        print(
            f"residual {residual:.17g} exceeds tolerance {tol:.17g}", file=sys.stderr
        )
        return "", EXIT_NUMERICAL
    return f"{residual:.17g}\n", EXIT_OK


def cmd_verify(args) -> tuple[str, int]:
    g = _load_graph(args.graph)
    grid = _parse_grid(args.lambda_grid)
    points = [verify_neumann_dirichlet_count(g, lam) for lam in grid]
    if args.robin is not None:
        a, b = _parse_robin(args.robin)
        points += [verify_robin_count(g, lam, a, b) for lam in grid]
    bounds = verify_counting_bounds(g, grid)
    points += list(bounds.points)

    failed = any(p.verdict == "fail" for p in points) or bounds.segment_interlacing is False
    if args.json:
        out = report_points_json(points) + "\n"
    else:
        out = report_table(points)
        if bounds.segment_interlacing is not None:
            status = "pass" if bounds.segment_interlacing else "fail"
            out += f"segment interlacing check: {status}\n"
        skipped = sum(p.verdict == "skipped" for p in points)
        out += f"{len(points)} checks, {skipped} skipped, " + (
            "FAIL\n" if failed else "all non-skipped pass\n"
        )
    return out, EXIT_VERIFY_FAIL if failed else EXIT_OK


def _sweep_point(g, lam):
    """One sweep row: (lam_used, sigmas, n_neumann, n_dirichlet, perturbed) or None."""
    for attempt, lam_t in enumerate(_candidate_lambdas(lam)):
        try:
            sig = eigenvalues_sym(dtn_matrix(g, lam_t))
            nn, stable_n, _ = counting_function(g, "neumann", lam_t)
            nd, stable_d, _ = counting_function(g, "dirichlet", lam_t)
            if not (stable_n and stable_d):
                continue
        except (SpectrumHit, PivotBreakdown):
            continue
        return lam_t, sig, nn, nd, attempt > 0
    return None


def cmd_sweep(args) -> tuple[str, int]:
    g = _load_graph(args.graph)
    grid = _parse_grid(args.lambda_grid)
    k = g.boundary_size
    header = ["lambda"] + [f"sigma_{j + 1}" for j in range(k)] + ["N_neumann", "N_dirichlet", "monotone"]
    lines = [",".join(header)]
    previous = None  # (sigmas, n_dirichlet) of the last usable row
    for lam in grid:
        point = _sweep_point(g, lam)
        if point is None:
            lines.append(",".join([f"{lam:.17g}"] + [""] * (k + 2) + ["skipped"]))
            previous = None
            continue
        lam_used, sig, nn, nd, perturbed = point
        if previous is None or previous[1] != nd:
            monotone = "n/a"
        else:
            monotone = "yes" if bool(np.all(sig < previous[0])) else "no"
        if perturbed:
            monotone += "*"
        row = [f"{lam_used:.17g}"] + [f"{s:.17g}" for s in sig] + [str(nn), str(nd), monotone]
        lines.append(",".join(row))
        previous = (sig, nd)
    return "\n".join(lines) + "\n", EXIT_OK


def cmd_export_dot(args) -> tuple[str, int]:
    return export_dot(_load_graph(args.graph)), EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphdtn",
        description="Boundary response matrices of compact metric graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("assemble", help="print R(lambda) of a graph file")
    p.add_argument("graph", help="graph JSON file")
    p.add_argument("--lambda", dest="lam", type=float, required=True, help="spectral parameter")
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("synthesize", help="build a graph realizing a symmetric matrix")
    p.add_argument("matrix", help="matrix JSON file")
    p.add_argument("--lambda", dest="lam", type=float, required=True, help="spectral parameter (> 0)")
    p.add_argument("--out", required=True, help="output graph JSON file")
    p.add_argument("--tol", type=float, default=None, help="residual tolerance override")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("verify", help="run the eigenvalue-count identity checks over a grid")
    p.add_argument("graph", help="graph JSON file")
    p.add_argument("--lambda-grid", required=True, help="grid spec start:stop:count")
    p.add_argument("--robin", default=None, help="also check a Robin pair, as a,b")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="CSV of R(lambda) eigenvalues and counts over a grid")
    p.add_argument("graph", help="graph JSON file")
    p.add_argument("--lambda-grid", required=True, help="grid spec start:stop:count")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("export-dot", help="print the graph in DOT format")
    p.add_argument("graph", help="graph JSON file")
    p.set_defaults(func=cmd_export_dot)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        out, code = args.func(args)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GraphError, GraphFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SpectrumHit, PivotBreakdown, DecompositionDegenerate) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if out:
        sys.stdout.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
