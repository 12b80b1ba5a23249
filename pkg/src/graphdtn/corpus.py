"""Built-in test corpus: small graphs covering the structurally distinct cases.

The five graphs exercise: no interior vertices, interior elimination,
parallel edges, a cycle with a single boundary vertex, and a glued synthesis
output (which mixes bundles and a concatenation vertex).
"""

from __future__ import annotations

import math

import numpy as np

from .graph import MetricGraph, metric_graph, segment
from .synthesis import realize_2x2

__all__ = ["default_corpus"]


def default_corpus() -> list[tuple[str, MetricGraph]]:
    """Named corpus graphs, in a fixed deterministic order."""
    parallel = metric_graph(
        [(0, 1, math.pi / 2), (0, 1, 1.3)], boundary=(0, 1)
    )
    star = metric_graph(
        [(0, 1, 1.0), (0, 2, 0.7), (0, 3, 1.3)], boundary=(1, 2, 3)
    )
    triangle = metric_graph(
        [(0, 1, 1.0), (1, 2, 1.1), (2, 0, 0.9)], boundary=(0,)
    )
    glued = realize_2x2(np.array([[1.5, 0.5], [0.5, -0.5]]))
    return [
        ("segment", segment(1.0)),
        ("parallel", parallel),
        ("star", star),
        ("triangle", triangle),
        ("glued-synthesis", glued),
    ]
