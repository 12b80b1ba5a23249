"""Build a metric graph whose boundary response matrix equals a given matrix.

Everything reduces to the unit spectral parameter: scaling every edge length
by sqrt(lam) rescales the response matrix by 1/sqrt(lam), so a target A at
lam > 0 becomes the target A/sqrt(lam) at 1.

At the unit parameter a single segment of length l has the response
[[cot l, -1/sin l], [-1/sin l, cot l]], and as l sweeps (0, 2pi) without pi
the pair (a, b) = (cot l, -1/sin l) covers exactly the hyperbola
b^2 - a^2 = 1. In the sheared coordinates x = a + b, y = b - a the
hyperbola is xy = 1, and sums of segment responses (parallel edges between
the same two boundary vertices add their responses) become coordinate sums.
Any (x, y) splits into two points with strictly mixed sign products, each of
which splits into two points on xy = 1 by solving a quadratic, so four
parallel segments realize every equal-diagonal 2x2 target. Concatenating an
equal-diagonal block with a zero block shifts one diagonal entry, gluing
combines the two, and pairwise 2x2 blocks attached to a k-vertex frame
assemble an arbitrary symmetric k x k target.
"""

from __future__ import annotations

import math

import numpy as np

from .dtn import require_symmetric
from .graph import MetricGraph, attach, concatenate, glue, metric_graph, scale_lengths

__all__ = [
    "DecompositionDegenerate",
    "decompose_four",
    "length_for_point",
    "point_matrix_coords",
    "realize_2x2",
    "realize_diag_a0",
    "realize_equal_diag",
    "realize_kxk",
    "split_hyperbola",
    "split_mixed_sign",
    "synthesize",
]

# hyperbola coordinates outside this window give segment lengths within
# float noise of 0, pi, or 2*pi, where the response kernel loses all digits
X_MIN = 1e-3
X_MAX = 1e3
MAX_OFFSET_BUMPS = 8


class DecompositionDegenerate(ArithmeticError):
    """The four-point decomposition stayed outside the safe coordinate window."""


def split_mixed_sign(
    x: float, y: float, offset: float = 1.0
) -> tuple[tuple[float, float], tuple[float, float]]:
    """Split (x, y) into two pairs summing to it, each with x*y < 0.

    Deterministic rule: for x >= 0 take (x + offset, min(y, 0) - offset) and
    put the remainder in the second pair; mirror it for x < 0. Any positive
    offset works; the retry ladder in :func:`decompose_four` bumps it when
    the downstream hyperbola points leave the safe window.
    """
    if not offset > 0:
        raise ValueError(f"offset must be positive, got {offset!r}")
    if x >= 0:
        x1, y1 = x + offset, min(y, 0.0) - offset
    else:
        x1, y1 = x - offset, max(y, 0.0) + offset
    return (x1, y1), (x - x1, y - y1)


def split_hyperbola(x: float, y: float) -> tuple[float, float]:
    """Split (x, y) with x*y < 0 into two points of xy = 1 summing to it.

    Returns the two x-coordinates (x1, x2): the points are (x1, 1/x1) and
    (x2, 1/x2) with x1 + x2 = x and 1/x1 + 1/x2 = y. For x > 0, y < 0 take
    u > 0 solving y u^2 + x y u + x = 0 (the product of the roots is x/y < 0,
    so exactly one root is positive) and set x1 = -u, x2 = x + u; the other
    sign pattern is handled by reflection.
    """
    if not x * y < 0:
        raise ValueError(f"need x*y < 0, got x={x!r}, y={y!r}")
    if x < 0:
        x1, x2 = split_hyperbola(-x, -y)
        return -x1, -x2
    q = x * y
    u = (math.sqrt(q * q - 4.0 * q) + q) / (-2.0 * y)
    return -u, x + u


def point_matrix_coords(x: float) -> tuple[float, float]:
    """Matrix coordinates (a, b) of the hyperbola point (x, 1/x)."""
    y = 1.0 / x
    return (x - y) / 2.0, (x + y) / 2.0


def decompose_four(a: float, b: float) -> list[float]:
    """Write (a, b) as the sum of four points with b_j^2 - a_j^2 = 1.

    Returns the four hyperbola x-coordinates. Works in the sheared
    coordinates (x, y) = (a + b, b - a), where the constraint is x_j y_j = 1
    and sums are componentwise. If any coordinate leaves [X_MIN, X_MAX] in
    magnitude, the mixed-sign split is retried with the offset bumped by
    1, 2, ..., ``MAX_OFFSET_BUMPS`` before giving up.
    """
    x, y = a + b, b - a
    for bump in range(MAX_OFFSET_BUMPS + 1):
        (x1, y1), (x2, y2) = split_mixed_sign(x, y, offset=1.0 + bump)
        points = [*split_hyperbola(x1, y1), *split_hyperbola(x2, y2)]
        if all(X_MIN <= abs(p) <= X_MAX for p in points):
            return points
    raise DecompositionDegenerate(
        f"no safe four-point decomposition of (a={a!r}, b={b!r}) after "
        f"{MAX_OFFSET_BUMPS} offset bumps"
    )


def length_for_point(x: float) -> float:
    """Segment length in (0, 2pi) without pi realizing the point (x, 1/x).

    tan(l/2) = -x identifies the length: negative x lands in (0, pi),
    positive x in (pi, 2pi). The safe window on |x| keeps the result away
    from the singular lengths 0, pi, and 2pi.
    """
    if x == 0 or not math.isfinite(x):
        raise ValueError(f"hyperbola coordinate must be finite and nonzero, got {x!r}")
    if x < 0:
        return 2.0 * math.atan(-x)
    return 2.0 * (math.pi - math.atan(x))


def realize_equal_diag(a: float, b: float) -> MetricGraph:
    """A bundle of four parallel segments with response [[a, b], [b, a]] at 1."""
    lengths = [length_for_point(x) for x in decompose_four(a, b)]
    return metric_graph([(0, 1, l) for l in lengths], boundary=(0, 1))


def realize_diag_a0(a: float) -> MetricGraph:
    """A graph with response diag(a, 0) at the unit parameter; needs a != 0.

    Concatenating a diag(a, a) bundle with a zero-response bundle makes the
    shared vertex interior; its derivative-balance pivot equals a, so the
    construction degenerates exactly at a = 0 (use realize_equal_diag(0, 0)
    for the zero matrix instead).
    """
    if a == 0:
        raise ValueError("a = 0 has no concatenated realization; use realize_equal_diag(0, 0)")
    return concatenate(realize_equal_diag(a, 0.0), realize_equal_diag(0.0, 0.0))


def realize_2x2(a) -> MetricGraph:
    """A graph whose response at the unit parameter equals the symmetric 2x2 a."""
    a = require_symmetric(a)
    if a.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {a.shape}")
    d0, d1, off = a[0, 0], a[1, 1], a[0, 1]
    if d0 == d1:
        return realize_equal_diag(d0, off)
    return glue(realize_equal_diag(d1, off), realize_diag_a0(d0 - d1))


def realize_kxk(a) -> MetricGraph:
    """A graph whose response at the unit parameter equals the symmetric k x k a.

    One 2x2 block per vertex pair (i, j), i < j, attached to a k-vertex
    frame; responses add over blocks. The block's off-diagonal entry is
    a[i, j]; diagonal entries are parked once each: a[i, i] rides in block
    (i, i+1) and the last one, a[k-1, k-1], in block (k-2, k-1). Zero blocks
    are attached too, which keeps the frame connected without a separate
    spanning argument.
    """
    a = require_symmetric(a)
    k = a.shape[0]
    if k < 2:
        raise ValueError(f"realization needs k >= 2 boundary vertices, got k={k}")
    blocks = []
    for i in range(k - 1):
        for j in range(i + 1, k):
            c = a[i, i] if j == i + 1 else 0.0
            d = a[k - 1, k - 1] if (i, j) == (k - 2, k - 1) else 0.0
            block = realize_2x2(np.array([[c, a[i, j]], [a[i, j], d]]))
            blocks.append((block, i, j))
    return attach(range(k), blocks)


def synthesize(a, lam: float) -> MetricGraph:
    """A compact connected metric graph g whose response at lam equals a.

    Requires lam > 0 and a real symmetric k x k target with k >= 2. The
    realization happens at the unit parameter for a/sqrt(lam) and the edge
    lengths are then rescaled by 1/sqrt(lam); entries of a/sqrt(lam) beyond
    roughly 1e3 leave the safe coordinate window and raise
    :class:`DecompositionDegenerate`.
    """
    lam = float(lam)
    if not (math.isfinite(lam) and lam > 0):
        raise ValueError(f"spectral parameter must be a positive real, got {lam!r}")
    a = require_symmetric(a)
    if a.shape[0] < 2:
        raise ValueError(
            f"synthesis needs a k x k target with k >= 2, got k={a.shape[0]}"
        )
    root = math.sqrt(lam)
    return scale_lengths(realize_kxk(a / root), 1.0 / root)
