"""Multiscale graph towers, Laplacian eigenpairs, and eigenvector cascading."""

from .covertree import (
    CoverTree,
    build_cover_tree,
    descendant_count,
    grandparent,
    verify_invariants,
)
from .eigensolver import EigenPacket, SolverConfig, pad_block, solve_smallest, sym_to_rw
from .errors import (
    CascadeToolError,
    ConfigError,
    DegenerateDegreeError,
    DomainError,
    InputError,
    NumericalError,
)
from .geometry import (
    PointCloud,
    RadialKernel,
    distance,
    generate_dataset,
    kernel_eval,
    load_points_csv,
    save_points_csv,
)
from .laplacian import (
    LaplacianOperator,
    WeightedGraphMatrices,
    build_laplacian,
    coboundary,
    coboundary_adjoint,
    component_labels,
    noncommutativity_witness,
)
from .tower import (
    CoverTower,
    NerveGraph,
    PartitionOfUnity,
    build_nerve_graph,
    extend_and_pull_back,
    pou_eval,
    pou_for_scale,
    pullback_vertex_function,
    tower_from_cover_tree,
)

__version__ = "0.1.0"
