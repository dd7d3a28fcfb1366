"""Simulation and analysis of the random averaging process on graphs."""

from .graphs import Graph, GraphError, GraphSpec, load_edge_list, make_graph, parse_graph_spec, sample_edge
from .rng import RngStream
from .spectral import (
    SpectralSummary,
    averaging_matrix,
    delocalization,
    eigen_symmetric,
    expected_state,
    laplacian,
    solve_beta,
    spectral_summary,
)
from .process import (
    Ensemble,
    SplitSystem,
    StateVector,
    init_state,
    run,
    split_aggregate,
    split_step,
    step_average,
    step_slowed,
)

__version__ = "0.1.0"

__all__ = [
    "Graph", "GraphError", "GraphSpec", "load_edge_list", "make_graph", "parse_graph_spec", "sample_edge",
    "RngStream",
    "SpectralSummary", "averaging_matrix", "delocalization", "eigen_symmetric", "expected_state",
    "laplacian", "solve_beta", "spectral_summary",
    "Ensemble", "SplitSystem", "StateVector", "init_state", "run", "split_aggregate", "split_step",
    "step_average", "step_slowed",
]
