"""Exact and Monte Carlo tools for squares of Hamilton cycles in G(n, p)."""
from ._accel import USE_NUMBA, backend_name
from .copies import CopyCatalog, CyclicOrdering, count_copies, enumerate_copies, extension_count, power_edges
from .graph_core import EdgeSet, Graph, RngStream, sample_gnm, sample_gnp
from .solver import EXHAUSTED, FOUND, UNKNOWN, SearchBudget, find_min_fragment, find_power_ham, min_fragment

__version__ = "0.1.0"

__all__ = [
    "USE_NUMBA",
    "backend_name",
    "CopyCatalog",
    "CyclicOrdering",
    "count_copies",
    "enumerate_copies",
    "extension_count",
    "power_edges",
    "EdgeSet",
    "Graph",
    "RngStream",
    "sample_gnm",
    "sample_gnp",
    "EXHAUSTED",
    "FOUND",
    "UNKNOWN",
    "SearchBudget",
    "find_min_fragment",
    "find_power_ham",
    "min_fragment",
]
