"""Unsupervised hidden Potts segmentation via small-variance asymptotics."""
from .cluster import KMeansResult, assign, kmeans, update_means
from .grid import (
    FOUR_CONNECTED,
    GradientField,
    Neighborhood,
    NeighborhoodKind,
    complement_hamiltonian,
    directed_edge_count,
    gradient,
    hamiltonian,
    l0_gradient_norm,
    tv_isotropic,
)
from .sva import (
    SegmentationResult,
    SvaConfig,
    TraceRecord,
    lambda_schedule,
    mm_inner,
    segment,
    segment_tsa,
    sva_l0_objective,
    sva_objective,
)
from .tvprox import DualField, ProxProblem, fuse_data_term, solve

__all__ = [
    "DualField", "FOUR_CONNECTED", "GradientField", "KMeansResult", "Neighborhood",
    "NeighborhoodKind", "ProxProblem", "SegmentationResult", "SvaConfig", "TraceRecord",
    "assign", "complement_hamiltonian", "directed_edge_count", "fuse_data_term", "gradient",
    "hamiltonian", "kmeans", "l0_gradient_norm", "lambda_schedule", "mm_inner", "segment",
    "segment_tsa", "solve", "sva_l0_objective", "sva_objective", "tv_isotropic", "update_means",
]
