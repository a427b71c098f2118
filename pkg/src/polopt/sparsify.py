"""Spectral sparsification by effective-resistance sampling.

Edges are drawn with replacement with probability proportional to
``w_e R_e``; each draw adds ``w_e / (q p_e)`` to the sampled edge, which makes
the sampled Laplacian an unbiased estimate of the original.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .graph import WeightedGraph, connected_components, is_connected, laplacian


class DisconnectedSparsifierWarning(UserWarning):
    """The sampled graph does not span all nodes."""


@dataclass(frozen=True)
class SparsifyConfig:
    """Either ``epsilon`` or an explicit ``samples`` count, not both.

    With ``epsilon`` the sample count is ``ceil(oversample * n ln n / eps^2)``.
    """

    epsilon: float | None = None
    samples: int | None = None
    oversample: float = 4.0
    seed: int = 0

    def __post_init__(self):
        if (self.epsilon is None) == (self.samples is None):
            raise ValueError("set exactly one of epsilon and samples")
        if self.epsilon is not None and not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.samples is not None and self.samples < 1:
            raise ValueError("samples must be at least 1")
        if self.oversample <= 0:
            raise ValueError("oversample must be positive")

    def sample_count(self, n: int) -> int:
        if self.samples is not None:
            return int(self.samples)
        return max(1, math.ceil(self.oversample * n * math.log(n) / self.epsilon**2))


def effective_resistances(g: WeightedGraph) -> np.ndarray:
    """``R_e = b_e^T L^+ b_e`` for every edge of a connected graph, in edge order."""
    if not is_connected(g):
        raise ValueError("effective resistances need a connected graph")
    return _edge_resistances(g)


def _edge_resistances(g):
    # L^+ is block diagonal over components, so within-component resistances
    # are exact even when g is disconnected
    u, v, _ = g.arrays()
    if u.size == 0:
        return np.zeros(0)
    Lp = np.linalg.pinv(laplacian(g), hermitian=True)
    d = np.diag(Lp)
    return d[u] + d[v] - 2.0 * Lp[u, v]


def sampling_probabilities(g: WeightedGraph) -> np.ndarray:
    """Leverage scores ``w_e R_e`` normalized to sum to one.

    For a connected graph the scores sum to ``n - 1``; a disconnected graph
    is handled component by component.
    """
    _, _, w = g.arrays()
    if w.size == 0:
        raise ValueError("graph has no edges to sample")
    lev = w * _edge_resistances(g)
    return lev / lev.sum()


def sparsify(g: WeightedGraph, config: SparsifyConfig) -> WeightedGraph:
    """Draw ``q`` edges i.i.d. by leverage and reweight them.

    Repeated draws of one edge are merged.  A disconnected input is sampled
    within its components.  If sampling splits a component, the result is
    returned as is with a :class:`DisconnectedSparsifierWarning`.
    """
    u, v, w = g.arrays()
    p = sampling_probabilities(g)
    q = config.sample_count(g.n)
    counts = np.random.default_rng(config.seed).multinomial(q, p)
    hit = counts > 0
    new_w = counts[hit] * w[hit] / (q * p[hit])
    out = WeightedGraph.from_arrays(g.n, u[hit], v[hit], new_w)
    if len(connected_components(out)) > len(connected_components(g)):
        warnings.warn(
            f"sparsified graph with {out.m} edges is disconnected",
            DisconnectedSparsifierWarning,
            stacklevel=2,
        )
    return out


def rescale_trace(g: WeightedGraph, target_total: float) -> WeightedGraph:
    """Scale every weight so the total edge weight equals ``target_total``."""
    if not target_total > 0:
        raise ValueError("target total weight must be positive")
    total = g.total_weight()
    if total <= 0:
        raise ValueError("cannot rescale a graph with zero total weight")
    u, v, w = g.arrays()
    return WeightedGraph.from_arrays(g.n, u, v, w * (target_total / total))
