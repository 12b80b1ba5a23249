"""Boundary response (Dirichlet-to-Neumann) matrices of metric graphs.

For the equation ``psi'' + lam * psi = 0`` on every edge, prescribing values
at all vertices determines the solution edge by edge (away from edge
resonances), and the sum of outward derivatives at each vertex is a linear
function of the vertex values. Summing per-edge 2x2 kernels gives that
vertex matrix M. Interior vertices carry the balance condition
``psi'(v) = 0``, so eliminating them by a Schur complement leaves the k x k
boundary matrix R(lam): the response ``xi = R(lam) x`` of boundary
derivatives to boundary values.

Sign convention: the derivative at a vertex points out of the edge toward
the vertex, which puts ``+cot`` on the diagonal of the single-edge kernel.
Everything downstream (negative-eigenvalue counts, interval counts) depends
on this fixed choice.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
import scipy.linalg

from .graph import MetricGraph, require_valid

__all__ = [
    "EPS_COND",
    "EPS_SING",
    "HarmonicExtension",
    "SpectrumHit",
    "assemble_vertex_matrix",
    "count_in_interval",
    "count_negative",
    "dtn_matrix",
    "edge_kernel",
    "eigenvalues_sym",
    "harmonic_extension",
    "read_matrix",
    "require_symmetric",
    "vertex_order",
    "write_matrix",
]

# |sin(w*l)| below this leaves no trusted digits in the edge kernel.
EPS_SING = 1e-8
# reciprocal condition estimate of the interior block below this means lam
# sits at or near an eigenvalue of the clamped-boundary problem.
EPS_COND = 1e-10


class SpectrumHit(ArithmeticError):
    """Raised when lam is at or near a point where R(lam) is undefined.

    Carries the offending edge id (edge resonance) or the reciprocal
    condition estimate of the interior vertex block (clamped eigenvalue).
    """

    def __init__(self, message: str, *, lam: float, edge_id: int | None = None,
                 condition_estimate: float | None = None):
        super().__init__(message)
        self.lam = lam
        self.edge_id = edge_id
        self.condition_estimate = condition_estimate


def edge_kernel(length: float, lam: float) -> np.ndarray:
    """2x2 boundary response of a single edge of the given length at lam.

    For lam > 0 with w = sqrt(lam) this is
    ``w * [[cot(w l), -1/sin(w l)], [-1/sin(w l), cot(w l)]]``;
    the lam = 0 and lam < 0 branches are the linear and hyperbolic limits,
    and all three meet continuously at lam = 0.
    """
    if not (math.isfinite(length) and length > 0):
        raise ValueError(f"edge length must be positive and finite, got {length!r}")
    if lam > 0:
        w = math.sqrt(lam)
        s = math.sin(w * length)
        if abs(s) < EPS_SING:
            raise SpectrumHit(
                f"edge of length {length:.17g} resonates at lam={lam:.17g}: "
                f"|sin(sqrt(lam)*l)| = {abs(s):.3e} < {EPS_SING:g}",
                lam=lam,
            )
        diag = w * math.cos(w * length) / s
        off = -w / s
    elif lam == 0:
        diag = 1.0 / length
        off = -1.0 / length
    else:
        w = math.sqrt(-lam)
        x = w * length
        if x > 350.0:  # sinh overflows; the coupling is numerically zero
            diag = w
            off = -2.0 * w * math.exp(-x)
        else:
            diag = w / math.tanh(x)
            off = -w / math.sinh(x)
    return np.array([[diag, off], [off, diag]])


def vertex_order(g: MetricGraph) -> list[int]:
    """Vertex ids ordered boundary-first (in boundary order), then interior."""
    bset = set(g.boundary)
    return list(g.boundary) + [v for v in sorted(g.vertices) if v not in bset]


def assemble_vertex_matrix(g: MetricGraph, lam: float) -> np.ndarray:
    """Sum of per-edge kernels over all vertices, boundary rows first.

    Row v of ``M @ values`` is the outward derivative sum psi'(v) of the
    edge-wise solution taking the prescribed vertex values.
    """
    require_valid(g)
    order = vertex_order(g)
    index = {v: i for i, v in enumerate(order)}
    n = len(order)
    m = np.zeros((n, n))
    for e in g.edges:
        try:
            k = edge_kernel(e.length, lam)
        except SpectrumHit as exc:
            raise SpectrumHit(
                f"edge {e.id}: {exc}", lam=lam, edge_id=e.id
            ) from exc
        i, j = index[e.u], index[e.v]
        m[i, i] += k[0, 0]
        m[j, j] += k[1, 1]
        m[i, j] += k[0, 1]
        m[j, i] += k[1, 0]
    return m


def _split_blocks(g: MetricGraph, m: np.ndarray):
    k = g.boundary_size
    return m[:k, :k], m[:k, k:], m[k:, :k], m[k:, k:]


def _solve_interior(g: MetricGraph, m: np.ndarray, lam: float, rhs: np.ndarray) -> np.ndarray:
    """Solve the interior block against rhs, guarding against singularity."""
    mii = m[g.boundary_size:, g.boundary_size:]
    if mii.size == 0:
        return np.zeros((0,) + rhs.shape[1:])
    mu = np.linalg.eigvalsh(mii)
    scale = max(np.max(np.abs(mu)), np.max(np.abs(m)))
    rcond = np.min(np.abs(mu)) / scale if scale > 0 else 0.0
    if rcond < EPS_COND:
        raise SpectrumHit(
            f"interior vertex system singular at lam={lam:.17g}: reciprocal "
            f"condition estimate {rcond:.3e} < {EPS_COND:g} (lam at or near a "
            "clamped-boundary eigenvalue)",
            lam=lam,
            condition_estimate=float(rcond),
        )
    return scipy.linalg.solve(mii, rhs, assume_a="sym")


def dtn_matrix(g: MetricGraph, lam: float) -> np.ndarray:
    """The k x k boundary response matrix R(lam), rows in boundary order.

    Raises :class:`SpectrumHit` when an edge resonates at lam or the interior
    block is numerically singular; R is undefined there.
    """
    m = assemble_vertex_matrix(g, lam)
    k = g.boundary_size
    if len(g.vertices) == k:
        return m
    mbb, mbi, mib, _ = _split_blocks(g, m)
    x = _solve_interior(g, m, lam, mib)
    return mbb - mbi @ x


@dataclass(frozen=True, eq=False)
class HarmonicExtension:
    """Edge-wise solution of psi'' + lam psi = 0 with prescribed boundary values.

    ``edge_coefficients[eid] = (alpha, beta)`` in the basis
    (cos ws, sin ws) for lam > 0, (1, s) for lam = 0, (cosh ws, sinh ws) for
    lam < 0, with s the arc length from the edge's stored start vertex.
    """

    graph: MetricGraph
    lam: float
    vertex_values: Mapping[int, float]
    edge_coefficients: Mapping[int, tuple[float, float]]
    boundary_data: np.ndarray
    boundary_derivatives: np.ndarray

    def value(self, edge_id: int, s: float) -> float:
        alpha, beta = self.edge_coefficients[edge_id]
        if self.lam > 0:
            w = math.sqrt(self.lam)
            return alpha * math.cos(w * s) + beta * math.sin(w * s)
        if self.lam == 0:
            return alpha + beta * s
        w = math.sqrt(-self.lam)
        return alpha * math.cosh(w * s) + beta * math.sinh(w * s)

    def derivative(self, edge_id: int, s: float) -> float:
        alpha, beta = self.edge_coefficients[edge_id]
        if self.lam > 0:
            w = math.sqrt(self.lam)
            return w * (-alpha * math.sin(w * s) + beta * math.cos(w * s))
        if self.lam == 0:
            return beta
        w = math.sqrt(-self.lam)
        return w * (alpha * math.sinh(w * s) + beta * math.cosh(w * s))

    def vertex_derivative(self, vertex: int) -> float:
        """Outward derivative sum at a vertex; zero at interior vertices."""
        total = 0.0
        for e in self.graph.edges:
            if e.u == vertex:
                total -= self.derivative(e.id, 0.0)
            if e.v == vertex:
                total += self.derivative(e.id, e.length)
        return total


def harmonic_extension(g: MetricGraph, lam: float, x) -> HarmonicExtension:
    """Solve the boundary value problem: psi = x on the boundary, balance inside."""
    x = np.asarray(x, dtype=float)
    k = g.boundary_size
    if x.shape != (k,):
        raise ValueError(f"boundary data must have shape ({k},), got {x.shape}")
    m = assemble_vertex_matrix(g, lam)
    order = vertex_order(g)
    z = np.empty(len(order))
    z[:k] = x
    if len(order) > k:
        z[k:] = -_solve_interior(g, m, lam, m[k:, :k] @ x)
    xi = m[:k, :] @ z

    values = {v: float(z[i]) for i, v in enumerate(order)}
    coeffs: dict[int, tuple[float, float]] = {}
    for e in g.edges:
        zu, zv = values[e.u], values[e.v]
        if lam > 0:
            w = math.sqrt(lam)
            beta = (zv - zu * math.cos(w * e.length)) / math.sin(w * e.length)
        elif lam == 0:
            beta = (zv - zu) / e.length
        else:
            w = math.sqrt(-lam)
            beta = (zv - zu * math.cosh(w * e.length)) / math.sinh(w * e.length)
        coeffs[e.id] = (zu, float(beta))
    return HarmonicExtension(g, lam, values, coeffs, x.copy(), xi)


def require_symmetric(a, rtol: float = 1e-12) -> np.ndarray:
    """Return a as a float array after checking it is square, finite, symmetric."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    gap = np.max(np.abs(a - a.T)) if a.size else 0.0
    bound = rtol * (1.0 + (np.max(np.abs(a)) if a.size else 0.0))
    if gap > bound:
        raise ValueError(f"matrix is not symmetric: max asymmetry {gap:.3e} > {bound:.3e}")
    return a


def eigenvalues_sym(a) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix, nondecreasing."""
    return np.linalg.eigvalsh(require_symmetric(a))


def count_negative(a) -> int:
    """Number of eigenvalues strictly below zero."""
    return int(np.count_nonzero(eigenvalues_sym(a) < 0.0))


def count_in_interval(a, low: float, high: float) -> int:
    """Number of eigenvalues in [-high, -low), half-open on the right.

    ``low < high`` is required; the interval convention matches the Robin
    count difference it is compared against.
    """
    if not low < high:
        raise ValueError(f"need low < high, got {low!r} >= {high!r}")
    sig = eigenvalues_sym(a)
    return int(np.count_nonzero((sig >= -high) & (sig < -low)))


def write_matrix(a) -> str:
    """Matrix text format: {"order": k, "entries": [[...], ...]} (full precision)."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    doc = {"order": int(a.shape[0]), "entries": [[float(v) for v in row] for row in a]}
    return json.dumps(doc, separators=(",", ":"))


def read_matrix(text: str) -> np.ndarray:
    """Parse the matrix text format with positioned diagnostics."""
    try:
        doc = json.loads(text)
    except ValueError as exc:
        raise ValueError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValueError("top level: expected an object")
    order = doc.get("order")
    if isinstance(order, bool) or not isinstance(order, int) or order < 1:
        raise ValueError(f"order: expected a positive integer, got {order!r}")
    entries = doc.get("entries")
    if not isinstance(entries, list) or len(entries) != order:
        raise ValueError(f"entries: expected {order} rows")
    out = np.empty((order, order))
    for i, row in enumerate(entries):
        if not isinstance(row, list) or len(row) != order:
            raise ValueError(f"entries[{i}]: expected {order} numbers")
        for j, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValueError(f"entries[{i}][{j}]: expected a number, got {v!r}")
            if not math.isfinite(float(v)):
                raise ValueError(f"entries[{i}][{j}]: expected a finite number, got {v!r}")
            out[i, j] = float(v)
    return out
