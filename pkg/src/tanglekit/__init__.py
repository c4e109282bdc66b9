"""Tangles, branch decompositions and single-linkage clustering.

Library layout:

* :mod:`tanglekit.metric` -- labeled distance matrices and ultrametrics;
* :mod:`tanglekit.connectivity` -- set functions on 2^U and their
  structural property checks;
* :mod:`tanglekit.tangles` -- tangle descriptors, the exhaustive axiom
  verifier and the tangle catalog;
* :mod:`tanglekit.decomposition` -- pre-/branch decompositions, the
  exactness transform, exact branch width and constructive duality;
* :mod:`tanglekit.clustering` -- single linkage, dendrograms,
  ultrametric conversions and the cluster/tangle correspondence;
* :mod:`tanglekit.cli` -- the ``tanglekit`` command.

All values are immutable after construction and every operation is a
pure function of its inputs, so shared instances are safe to use
concurrently.
"""

from .clustering import (
    BlockTangleReport,
    Dendrogram,
    Linkage,
    Partition,
    block_tangle_correspondence,
    connectivity_from_dendrogram,
    dendrogram_from_connectivity,
    dendrogram_to_ultrametric,
    linkage_eval,
    minimax_ultrametric,
    single_linkage,
    ultrametric_to_dendrogram,
    validate_dendrogram,
)
from .connectivity import (
    AverageLinkageConnectivity,
    CompleteLinkageConnectivity,
    ConnectivityFunction,
    SingleLinkageConnectivity,
    TabulatedConnectivity,
    ThresholdGraph,
    VertexConnectivity,
    canonical_zero_partition,
    check_axioms,
    find_violation,
    min_separation,
    separation_cost,
    tabulate,
    threshold_graph,
)
from .decomposition import (
    DualityReport,
    PreDecomposition,
    SubsetFamily,
    TernaryTree,
    branch_width_exact,
    construct_decomposition_over,
    exactness_transform,
    from_atoms,
    to_dot,
    validate_pre_decomposition,
    verify_duality,
    width,
    width_radius,
)
from .errors import CapExceededError, InputFormatError, NotMaxSubmodularError, TanglekitError
from .metric import (
    DistanceMatrix,
    MetricReport,
    PointCloud,
    Ultrametric,
    distance_matrix_from_points,
    ultrametric_check,
    validate_metric,
)
from .tangles import (
    TangleCatalog,
    TangleDescriptor,
    TangleReport,
    enumerate_tangles,
    tangle_contains,
    tangle_number,
    tangle_number_radius,
    verify_tangle,
)

__version__ = "0.1.0"

__all__ = [
    "AverageLinkageConnectivity",
    "BlockTangleReport",
    "CapExceededError",
    "CompleteLinkageConnectivity",
    "ConnectivityFunction",
    "Dendrogram",
    "DistanceMatrix",
    "DualityReport",
    "InputFormatError",
    "Linkage",
    "MetricReport",
    "NotMaxSubmodularError",
    "Partition",
    "PointCloud",
    "PreDecomposition",
    "SingleLinkageConnectivity",
    "SubsetFamily",
    "TabulatedConnectivity",
    "TangleCatalog",
    "TangleDescriptor",
    "TangleReport",
    "TanglekitError",
    "TernaryTree",
    "ThresholdGraph",
    "Ultrametric",
    "VertexConnectivity",
    "block_tangle_correspondence",
    "branch_width_exact",
    "canonical_zero_partition",
    "check_axioms",
    "connectivity_from_dendrogram",
    "construct_decomposition_over",
    "dendrogram_from_connectivity",
    "dendrogram_to_ultrametric",
    "distance_matrix_from_points",
    "enumerate_tangles",
    "exactness_transform",
    "find_violation",
    "from_atoms",
    "linkage_eval",
    "min_separation",
    "minimax_ultrametric",
    "separation_cost",
    "single_linkage",
    "tabulate",
    "tangle_contains",
    "tangle_number",
    "tangle_number_radius",
    "threshold_graph",
    "to_dot",
    "ultrametric_check",
    "ultrametric_to_dendrogram",
    "validate_dendrogram",
    "validate_metric",
    "validate_pre_decomposition",
    "verify_duality",
    "verify_tangle",
    "width",
    "width_radius",
]
