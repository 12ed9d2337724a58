"""Glauber dynamics on matchings: sampler, max-matching heuristic and exact checks."""

__version__ = "0.1.0"

from .chain import ChainParams, RunReport, amplified_solve, claimed_bounds, rand_matching, step
from .errors import CapacityError, GraphParseError, InvariantError, ParameterError
from .graph import Graph, generate, read_graph, write_graph
from .matching import Matching, enumerate_matchings, exact_max_matching, phi, size_counts

__all__ = [
    "CapacityError", "ChainParams", "Graph", "GraphParseError", "InvariantError", "Matching",
    "ParameterError", "RunReport", "amplified_solve", "claimed_bounds", "enumerate_matchings",
    "exact_max_matching", "generate", "phi", "rand_matching", "read_graph", "size_counts",
    "step", "write_graph",
]
