"""Friedkin-Johnsen equilibria and the polarization/disagreement index.

The equilibrium of the repeated-averaging process with innate opinions ``s``
is the solution of ``(I + L) z = s``.  Since every eigenvalue of ``I + L``
is at least 1, both the Cholesky path and the conjugate-gradient path are
well conditioned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import LinearOperator, cg

from .graph import WeightedGraph, laplacian

CG_RTOL = 1e-10
CENTER_ATOL = 1e-8


def as_opinions(s, n: int | None = None) -> np.ndarray:
    """Validate an innate-opinion vector: finite, 1-d, entries in [0, 1]."""
    s = np.asarray(s, dtype=float)
    if s.ndim != 1:
        raise ValueError(f"opinions must be a 1-d vector, got shape {s.shape}")
    if n is not None and s.shape[0] != n:
        raise ValueError(f"expected {n} opinions, got {s.shape[0]}")
    if not np.all(np.isfinite(s)):
        raise ValueError("opinions must be finite")
    bad = np.flatnonzero((s < 0) | (s > 1))
    if bad.size:
        raise ValueError(f"opinion of node {bad[0]} is {s[bad[0]]}, outside [0, 1]")
    return s


class FJSystem:
    """Factorized ``I + L`` for repeated solves against one Laplacian.

    Not safe to share across threads while ``solve`` is first populating the
    factorization.
    """

    def __init__(self, L: np.ndarray, method: str = "direct"):
        L = np.asarray(L, dtype=float)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise ValueError(f"Laplacian must be square, got shape {L.shape}")
        if not np.all(np.isfinite(L)):
            raise ValueError("Laplacian has non-finite entries")
        if method not in ("direct", "cg"):
            raise ValueError(f"unknown solve method {method!r}")
        self.n = L.shape[0]
        self.L = L
        self.method = method
        self._factor = None

    @classmethod
    def from_graph(cls, g: WeightedGraph, method: str = "direct") -> "FJSystem":
        return cls(laplacian(g), method=method)

    def _matrix(self) -> np.ndarray:
        return self.L + np.eye(self.n)

    def solve(self, rhs) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape[0] != self.n:
            raise ValueError(f"dimension mismatch: system has n={self.n}, rhs has {rhs.shape[0]}")
        if self.n == 0:
            return rhs.copy()
        if self.method == "cg":
            return self._solve_cg(rhs)
        if self._factor is None:
            self._factor = linalg.cho_factor(self._matrix(), lower=True, check_finite=False)
        return linalg.cho_solve(self._factor, rhs, check_finite=False)

    def _solve_cg(self, rhs):
        M = self._matrix()
        op = LinearOperator(M.shape, matvec=lambda x: M @ x, dtype=float)
        cols = rhs.reshape(self.n, -1)
        out = np.empty_like(cols)
        for k in range(cols.shape[1]):
            b = cols[:, k]
            if not np.any(b):
                out[:, k] = 0.0
                continue
            x, info = cg(op, b, rtol=CG_RTOL, atol=0.0, maxiter=10 * self.n + 100)
            if info != 0:
                raise RuntimeError(f"conjugate gradient did not converge (info={info})")
            out[:, k] = x
        return out.reshape(rhs.shape)

    def inverse(self) -> np.ndarray:
        return self.solve(np.eye(self.n))


def equilibrium(g: WeightedGraph, s, method: str = "direct") -> np.ndarray:
    """Expressed opinions ``z* = (I + L)^{-1} s``."""
    s = np.asarray(s, dtype=float)
    if s.shape != (g.n,):
        raise ValueError(f"dimension mismatch: graph has n={g.n}, opinions have shape {s.shape}")
    return FJSystem.from_graph(g, method=method).solve(s)


def center(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError("cannot center an empty vector")
    return x - x.mean()


def disagreement(g: WeightedGraph, z) -> float:
    """Sum over edges of ``w_uv (z_u - z_v)^2``."""
    z = np.asarray(z, dtype=float)
    if z.shape != (g.n,):
        raise ValueError(f"dimension mismatch: graph has n={g.n}, vector has shape {z.shape}")
    u, v, w = g.arrays()
    return float(np.sum(w * (z[u] - z[v]) ** 2))


def polarization(z_bar) -> float:
    """Squared norm of an already mean-centered vector.

    Uncentered input is rejected instead of being centered silently.
    """
    z_bar = np.asarray(z_bar, dtype=float)
    if abs(z_bar.sum()) > CENTER_ATOL:
        raise ValueError(f"polarization expects a mean-centered vector (sum={z_bar.sum():.3g})")
    return float(z_bar @ z_bar)


@dataclass(frozen=True)
class EquilibriumReport:
    z_star: np.ndarray
    z_bar: np.ndarray
    polarization: float
    disagreement: float
    index: float

    def as_dict(self) -> dict:
        return {
            "polarization": self.polarization,
            "disagreement": self.disagreement,
            "index": self.index,
        }


def index(g: WeightedGraph, s, method: str = "direct") -> EquilibriumReport:
    """Equilibrium, polarization, disagreement and their sum for ``(g, s)``."""
    s = as_opinions(s, g.n)
    z_star = equilibrium(g, s, method=method)
    z_bar = center(z_star)
    P = polarization(z_bar)
    D = disagreement(g, z_star)
    return EquilibriumReport(z_star=z_star, z_bar=z_bar, polarization=P, disagreement=D, index=P + D)


def index_closed_form(g: WeightedGraph, s) -> float:
    """``s_bar^T (I+L)^{-1} s_bar``, equal to the index."""
    s_bar = center(np.asarray(s, dtype=float))
    return float(s_bar @ equilibrium(g, s_bar))


def node_stress(g: WeightedGraph, s, z_star) -> np.ndarray:
    """Per-node stress ``(z_i - s_i)^2 + sum_j w_ij (z_i - z_j)^2``."""
    s = np.asarray(s, dtype=float)
    z = np.asarray(z_star, dtype=float)
    if s.shape != (g.n,) or z.shape != (g.n,):
        raise ValueError(f"dimension mismatch: graph has n={g.n}")
    stress = (z - s) ** 2
    u, v, w = g.arrays()
    d = w * (z[u] - z[v]) ** 2
    np.add.at(stress, u, d)
    np.add.at(stress, v, d)
    return stress
