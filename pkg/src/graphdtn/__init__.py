"""Boundary response matrices of compact metric graphs.

Assembly of the Dirichlet-to-Neumann matrix R(lam) from exact per-edge
kernels, an independent finite-element eigenvalue-counting oracle with
identity verifiers, and synthesis of a graph realizing any real symmetric
matrix as its R(lam) for any lam > 0.
"""

from .corpus import default_corpus
from .dtn import (
    HarmonicExtension,
    SpectrumHit,
    assemble_vertex_matrix,
    count_in_interval,
    count_negative,
    dtn_matrix,
    edge_kernel,
    eigenvalues_sym,
    harmonic_extension,
    read_matrix,
    require_symmetric,
    write_matrix,
)
from .graph import (
    Edge,
    GraphError,
    GraphFormatError,
    MetricGraph,
    attach,
    concatenate,
    deserialize,
    export_dot,
    flip_edge,
    glue,
    metric_graph,
    require_valid,
    scale_lengths,
    segment,
    serialize,
    subdivide_edge,
    validate,
)
from .oracle import (
    CountReport,
    DiscretizedOperator,
    GridReport,
    PivotBreakdown,
    count_below,
    counting_function,
    discretize,
    report_points_json,
    report_table,
    verify_counting_bounds,
    verify_neumann_dirichlet_count,
    verify_robin_count,
)
from .synthesis import (
    DecompositionDegenerate,
    decompose_four,
    length_for_point,
    point_matrix_coords,
    realize_2x2,
    realize_diag_a0,
    realize_equal_diag,
    realize_kxk,
    split_hyperbola,
    split_mixed_sign,
    synthesize,
)

__version__ = "0.1.0"
