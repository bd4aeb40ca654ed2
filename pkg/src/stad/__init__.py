"""Graph approximations of point clouds whose hop distances track the
original pairwise distances (minimum spanning tree plus the shortest
remaining edges, with optional filter functions)."""

__version__ = "0.1.0"

from .data_io import DataError, DistanceMatrix, PointCloud, compute_distances, load_distance_matrix, load_points
from .filters import FilterSpec, discretize, filter_mst, reduce_matrix
from .graph_core import bfs_apsp, build_unit_graph, mst, sort_edges
from .objective import ObjectiveContext, correlation_trace, evaluate, pearson
from .optimizer import AnnealSchedule, anneal, brute_force_optimum
from .pipeline import StadResult, build_network, prepare

__all__ = [
    "AnnealSchedule",
    "DataError",
    "DistanceMatrix",
    "FilterSpec",
    "ObjectiveContext",
    "PointCloud",
    "StadResult",
    "anneal",
    "bfs_apsp",
    "brute_force_optimum",
    "build_network",
    "build_unit_graph",
    "compute_distances",
    "correlation_trace",
    "discretize",
    "evaluate",
    "filter_mst",
    "load_distance_matrix",
    "load_points",
    "mst",
    "pearson",
    "prepare",
    "reduce_matrix",
    "sort_edges",
]
