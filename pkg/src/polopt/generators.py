"""Random instances: graphs and innate-opinion vectors.

Every generator is a pure function of its parameters and ``seed``; each
call owns its own ``numpy.random.Generator``.
"""

from __future__ import annotations

import numpy as np

from .graph import WeightedGraph, num_pairs, pair_indices


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def erdos_renyi(n: int, p: float, seed=None) -> WeightedGraph:
    """G(n, p) with unit weights."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    iu, ju = pair_indices(n)
    keep = _rng(seed).random(num_pairs(n)) < p
    return WeightedGraph.from_arrays(n, iu[keep], ju[keep], np.ones(int(keep.sum())))


def power_law_raw(n: int, slope: float, rng: np.random.Generator) -> np.ndarray:
    """Continuous power-law draws with ``x_min = 1``: density ~ ``x^-slope``."""
    if not slope > 1:
        raise ValueError(f"power-law slope must exceed 1, got {slope}")
    u = rng.random(n)
    return (1.0 - u) ** (-1.0 / (slope - 1.0))


def norros_reittu(n: int, slope: float, seed=None, capacities=None) -> WeightedGraph:
    """Norros-Reittu graph: pair ``(i, j)`` present w.p. ``1 - exp(-W_i W_j / sum(W))``.

    Capacities are power-law draws unless given explicitly.
    """
    rng = _rng(seed)
    if capacities is None:
        W = power_law_raw(n, slope, rng)
    else:
        W = np.asarray(capacities, dtype=float)
        if W.shape != (n,) or np.any(W <= 0):
            raise ValueError("capacities must be n positive values")
    iu, ju = pair_indices(n)
    if n < 2:
        return WeightedGraph(n)
    prob = -np.expm1(-W[iu] * W[ju] / W.sum())
    keep = rng.random(iu.size) < prob
    return WeightedGraph.from_arrays(n, iu[keep], ju[keep], np.ones(int(keep.sum())))


def power_law_sample(n: int, slope: float, seed=None) -> np.ndarray:
    """Power-law opinions normalized by the largest draw, so the maximum is 1."""
    x = power_law_raw(n, slope, _rng(seed))
    return x / x.max()


def uniform_opinions(n: int, seed=None) -> np.ndarray:
    if n < 1:
        raise ValueError("need at least one node")
    return _rng(seed).random(n)


def degree_proportional_opinions(g: WeightedGraph) -> np.ndarray:
    d = g.degrees()
    total = d.sum()
    if total <= 0:
        raise ValueError("graph has no edges")
    return d / total
