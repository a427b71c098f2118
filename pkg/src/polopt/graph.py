"""Undirected weighted graphs, Laplacians and the dense pair-weight vector.

Nodes are the integers ``0..n-1``.  The optimizer works on a dense vector
holding one weight per unordered pair, ordered lexicographically:
``(0,1), (0,2), ..., (0,n-1), (1,2), ...``.  The incidence column of pair
``(u, v)`` has ``+1`` at ``u`` and ``-1`` at ``v``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class WeightedGraph:
    """Immutable undirected graph with strictly positive edge weights.

    Edges are stored canonically as ``(u, v, w)`` with ``u < v`` and sorted
    by ``(u, v)``.  Construct from any iterable of triples; orientation is
    normalized but duplicates, self-loops and non-positive weights raise.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...] = field(default=())

    def __post_init__(self):
        n = int(self.n)
        if n < 0:
            raise ValueError(f"node count must be nonnegative, got {n}")
        canon = {}
        for u, v, w in self.edges:
            u, v, w = int(u), int(v), float(w)
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if not np.isfinite(w) or w <= 0:
                raise ValueError(f"edge ({u}, {v}) has non-positive or non-finite weight {w}")
            key = (u, v) if u < v else (v, u)
            if key in canon:
                raise ValueError(f"duplicate edge {key}")
            canon[key] = w
        object.__setattr__(self, "n", n)
        object.__setattr__(
            self, "edges", tuple((u, v, canon[(u, v)]) for u, v in sorted(canon))
        )

    @classmethod
    def from_arrays(cls, n, u, v, w) -> "WeightedGraph":
        return cls(n, tuple(zip(np.asarray(u).tolist(), np.asarray(v).tolist(),
                                np.asarray(w, dtype=float).tolist())))

    @property
    def m(self) -> int:
        return len(self.edges)

    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(u, v, w)`` as numpy arrays."""
        if not self.edges:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0)
        u, v, w = zip(*self.edges)
        return np.array(u, dtype=np.int64), np.array(v, dtype=np.int64), np.array(w, dtype=float)

    def degrees(self) -> np.ndarray:
        """Weighted degrees."""
        u, v, w = self.arrays()
        d = np.zeros(self.n)
        np.add.at(d, u, w)
        np.add.at(d, v, w)
        return d


def num_pairs(n: int) -> int:
    return n * (n - 1) // 2


@lru_cache(maxsize=16)
def _pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    iu, ju = np.triu_indices(n, k=1)
    iu.setflags(write=False)
    ju.setflags(write=False)
    return iu, ju


def pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Endpoints ``(u, v)`` of every unordered pair, in lexicographic order."""
    return _pair_indices(int(n))


def pair_index(n: int, u: int, v: int) -> int:
    """Position of pair ``(u, v)`` in the dense weight vector."""
    if u > v:
        u, v = v, u
    if u == v or u < 0 or v >= n:
        raise ValueError(f"invalid pair ({u}, {v}) for n={n}")
    return u * n - u * (u + 1) // 2 + (v - u - 1)


def incidence_column(n: int, u: int, v: int) -> np.ndarray:
    b = np.zeros(n)
    b[min(u, v)] = 1.0
    b[max(u, v)] = -1.0
    return b


def laplacian(g: WeightedGraph) -> np.ndarray:
    """Dense combinatorial Laplacian ``D - A``."""
    u, v, w = g.arrays()
    A = np.zeros((g.n, g.n))
    A[u, v] = w
    A[v, u] = w
    return np.diag(A.sum(axis=1)) - A


def laplacian_from_weights(n: int, w: np.ndarray) -> np.ndarray:
    """Laplacian of the dense pair-weight vector ``w`` (length ``n(n-1)/2``)."""
    w = np.asarray(w, dtype=float)
    if w.shape != (num_pairs(n),):
        raise ValueError(f"expected {num_pairs(n)} pair weights for n={n}, got shape {w.shape}")
    iu, ju = pair_indices(n)
    A = np.zeros((n, n))
    A[iu, ju] = w
    A[ju, iu] = w
    return np.diag(A.sum(axis=1)) - A


def to_dense_weights(g: WeightedGraph) -> np.ndarray:
    w = np.zeros(num_pairs(g.n))
    for u, v, wt in g.edges:
        w[pair_index(g.n, u, v)] = wt
    return w


def from_dense_weights(n: int, w, threshold: float = 0.0) -> WeightedGraph:
    """Graph whose edges are the pairs with weight strictly above ``threshold``."""
    w = np.asarray(w, dtype=float)
    if w.shape != (num_pairs(n),):
        raise ValueError(f"expected {num_pairs(n)} pair weights for n={n}, got shape {w.shape}")
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    if np.any(w < 0):
        raise ValueError("pair weights must be nonnegative")
    iu, ju = pair_indices(n)
    keep = w > threshold
    return WeightedGraph.from_arrays(n, iu[keep], ju[keep], w[keep])


def connected_components(g: WeightedGraph) -> list[list[int]]:
    parent = list(range(g.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v, _ in g.edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    groups: dict[int, list[int]] = {}
    for x in range(g.n):
        groups.setdefault(find(x), []).append(x)
    return list(groups.values())


def is_connected(g: WeightedGraph) -> bool:
    # the empty node set counts as connected, as does a single node
    return len(connected_components(g)) <= 1
