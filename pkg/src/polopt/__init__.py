"""Polarization and disagreement under Friedkin-Johnsen opinion dynamics.

Equilibria and the polarization-disagreement index, convex optimization of
edge weights and of budgeted opinion interventions, and spectral
sparsification of optimized topologies.
"""

__version__ = "0.1.0"

from .dynamics import (
    EquilibriumReport,
    FJSystem,
    center,
    disagreement,
    equilibrium,
    index,
    node_stress,
    polarization,
)
from .graph import WeightedGraph, from_dense_weights, is_connected, laplacian, to_dense_weights
from .intervention import InterventionProblem, InterventionResult, budget_sweep, optimize_opinions
from .optim import OptimizerConfig
from .sparsify import SparsifyConfig, effective_resistances, rescale_trace, sparsify
from .topology import TopologyProblem, TopologySolution, nonconvexity_witness
from .topology import solve as solve_topology

__all__ = [
    "EquilibriumReport",
    "FJSystem",
    "InterventionProblem",
    "InterventionResult",
    "OptimizerConfig",
    "SparsifyConfig",
    "TopologyProblem",
    "TopologySolution",
    "WeightedGraph",
    "budget_sweep",
    "center",
    "disagreement",
    "effective_resistances",
    "equilibrium",
    "from_dense_weights",
    "index",
    "is_connected",
    "laplacian",
    "node_stress",
    "nonconvexity_witness",
    "optimize_opinions",
    "polarization",
    "rescale_trace",
    "solve_topology",
    "sparsify",
    "to_dense_weights",
]
