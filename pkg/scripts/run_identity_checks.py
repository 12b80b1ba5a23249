#!/usr/bin/env python3
"""Sweep the eigenvalue-count identities over the built-in corpus.

For every corpus graph and every grid point this compares, along two fully
independent computational routes, the finite-element eigenvalue counts of
the free/clamped (and optionally Robin) Laplacians against eigenvalue
counts of the exact boundary response matrix. Prints one table per graph
and a final summary; exits nonzero if any non-skipped point fails.

Usage:
    python scripts/run_identity_checks.py
    python scripts/run_identity_checks.py --grid 0.2:30:50 --robin 0.5,2.0
"""

import argparse
import sys
import time

import numpy as np

from graphdtn import (
    default_corpus,
    report_table,
    verify_neumann_dirichlet_count,
    verify_robin_count,
)


def parse_grid(spec):
    start, stop, count = spec.split(":")
    return np.linspace(float(start), float(stop), int(count))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--grid", default="0.2:30:50", help="lambda grid start:stop:count")
    parser.add_argument("--robin", default=None, help="optional Robin pair a,b")
    parser.add_argument("--quiet", action="store_true", help="summaries only, no tables")
    args = parser.parse_args()

    grid = parse_grid(args.grid)
    robin = tuple(float(v) for v in args.robin.split(",")) if args.robin else None

    failures = 0
    skipped = 0
    total = 0
    started = time.time()
    for name, graph in default_corpus():
        points = [verify_neumann_dirichlet_count(graph, lam) for lam in grid]
        if robin is not None:
            points += [verify_robin_count(graph, lam, *robin) for lam in grid]
        total += len(points)
        failures += sum(p.verdict == "fail" for p in points)
        skipped += sum(p.verdict == "skipped" for p in points)
        print(f"== {name} (k={graph.boundary_size}, {len(graph.edges)} edges)")
        if not args.quiet:
            print(report_table(points), end="")
        per_graph = sum(p.verdict == "pass" for p in points)
        print(f"   {per_graph}/{len(points)} pass\n")

    elapsed = time.time() - started
    print(f"total: {total - failures - skipped} pass, {failures} fail, "
          f"{skipped} skipped in {elapsed:.1f}s")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
