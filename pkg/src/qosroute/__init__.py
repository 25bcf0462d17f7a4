"""QoS routing as constraint optimization over a link-flow membership matrix."""

from .apps import (
    CycleDiscardedWarning,
    MalformedColumnError,
    RoutePath,
    RouteResult,
    extract_path,
    least_cost_path,
    least_cost_path_capacity,
    max_residual_capacity,
    route,
)
from .netgraph import GraphError, Link, NetworkGraph, from_undirected, validate_graph
from .predicates import FlowSpec, LinkFlowMembership, ModelError
from .solver import KERNEL, SolverConfig, oracle_optimum, solve
from .topogen import FatTreeSpec, GridSpec, fat_tree, grid

__version__ = "0.1.0"

__all__ = [
    "KERNEL",
    "CycleDiscardedWarning",
    "FatTreeSpec",
    "FlowSpec",
    "GraphError",
    "GridSpec",
    "Link",
    "LinkFlowMembership",
    "MalformedColumnError",
    "ModelError",
    "NetworkGraph",
    "RoutePath",
    "RouteResult",
    "SolverConfig",
    "extract_path",
    "fat_tree",
    "from_undirected",
    "grid",
    "least_cost_path",
    "least_cost_path_capacity",
    "max_residual_capacity",
    "oracle_optimum",
    "route",
    "solve",
    "validate_graph",
]
