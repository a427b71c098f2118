"""Choose edge weights of fixed total that minimize the polarization-disagreement index.

The decision variable is the dense pair-weight vector ``w`` (see
:mod:`polopt.graph`).  The objective ``s_bar^T (I + L(w))^{-1} s_bar`` is
convex in ``w`` and its partial derivative with respect to the weight of pair
``(u, v)`` is ``-(x_u - x_v)^2`` with ``x = (I + L)^{-1} s_bar``, so one
Cholesky solve yields both the value and the full gradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .dynamics import FJSystem, as_opinions, center
from .graph import (
    WeightedGraph,
    from_dense_weights,
    is_connected,
    laplacian_from_weights,
    num_pairs,
    pair_indices,
)
from .optim import OptimizerConfig, projected_gradient

FEASIBILITY_RTOL = 1e-8


@dataclass(frozen=True)
class TopologyProblem:
    s: np.ndarray
    total_weight: float

    def __post_init__(self):
        s = as_opinions(self.s)
        if s.shape[0] < 2:
            raise ValueError("need at least two nodes")
        if not self.total_weight > 0:
            raise ValueError("total weight must be positive")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "total_weight", float(self.total_weight))

    @property
    def n(self) -> int:
        return self.s.shape[0]


@dataclass(frozen=True)
class TopologySolution:
    w_opt: np.ndarray
    objective: float
    iterations: int
    converged: bool
    connected: bool
    history: tuple[float, ...] = ()

    def graph(self, threshold: float = 0.0) -> WeightedGraph:
        n = int(round((1 + np.sqrt(1 + 8 * self.w_opt.size)) / 2))
        return from_dense_weights(n, self.w_opt, threshold)


def _check_weights(w, n):
    w = np.asarray(w, dtype=float)
    if w.shape != (num_pairs(n),):
        raise ValueError(f"expected {num_pairs(n)} pair weights for n={n}, got shape {w.shape}")
    if np.any(w < 0):
        raise ValueError("pair weights must be nonnegative")
    return w


def _solve_centered(w, s_bar):
    n = s_bar.shape[0]
    return FJSystem(laplacian_from_weights(n, w)).solve(s_bar)


def objective(w, s) -> float:
    """``s_bar^T (I + L(w))^{-1} s_bar`` for pair weights ``w``."""
    s_bar = center(s)
    w = _check_weights(w, s_bar.shape[0])
    return float(s_bar @ _solve_centered(w, s_bar))


def gradient(w, s) -> np.ndarray:
    """Closed-form gradient of :func:`objective`; every entry is <= 0."""
    s_bar = center(s)
    n = s_bar.shape[0]
    w = _check_weights(w, n)
    return _pair_gradient(_solve_centered(w, s_bar), n)


def _pair_gradient(x, n):
    iu, ju = pair_indices(n)
    diff = x[iu] - x[ju]
    return -(diff * diff)


def project_simplex(w, total: float) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum(x) = total}`` (sort and threshold)."""
    if not total > 0:
        raise ValueError("total must be positive")
    w = np.asarray(w, dtype=float)
    # stable sort keeps equal entries in pair order
    u = w[np.argsort(-w, kind="stable")]
    css = np.cumsum(u) - total
    k = np.arange(1, u.size + 1)
    rho = np.flatnonzero(u - css / k > 0)[-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(w - theta, 0.0)


def is_feasible(w, total: float, rtol: float = FEASIBILITY_RTOL) -> bool:
    w = np.asarray(w, dtype=float)
    return bool(np.all(w >= 0) and abs(w.sum() - total) <= rtol * total)


def solve(problem: TopologyProblem, config: OptimizerConfig | None = None, w0=None) -> TopologySolution:
    """Projected gradient descent on the scaled simplex of pair weights."""
    config = config or OptimizerConfig()
    n, total = problem.n, problem.total_weight
    N = num_pairs(n)
    if w0 is None:
        w0 = np.full(N, total / N)
    else:
        w0 = np.array(w0, dtype=float)
        if w0.shape != (N,) or not is_feasible(w0, total):
            raise ValueError("initial weights are not feasible (need w >= 0 and sum = total weight)")
    s_bar = center(problem.s)

    def fun(w):
        x = _solve_centered(w, s_bar)
        return float(s_bar @ x), x

    def grad(w, x):
        return _pair_gradient(x, n)

    res = projected_gradient(fun, grad, lambda y: project_simplex(y, total), w0, config)
    w_opt = res.x
    return TopologySolution(
        w_opt=w_opt,
        objective=res.fun,
        iterations=res.iterations,
        converged=res.converged,
        connected=is_connected(from_dense_weights(n, w_opt)),
        history=tuple(res.history),
    )


def kkt_spread(w, grad, support_tol: float = 1e-6) -> tuple[float, float]:
    """Simplex stationarity residuals at ``w``, relative to ``max|grad|``.

    Returns ``(spread, violation)``: the range of gradient entries over pairs
    with ``w > support_tol``, and how far any zero-weight pair's gradient
    falls below the smallest of those.  Both vanish at an optimum.
    """
    w = np.asarray(w, dtype=float)
    grad = np.asarray(grad, dtype=float)
    scale = float(np.max(np.abs(grad)))
    if scale == 0.0:
        return 0.0, 0.0
    active = w > support_tol
    ga = grad[active]
    spread = float(ga.max() - ga.min()) / scale
    lam = float(ga.min())
    rest = grad[~active]
    violation = float(max(0.0, lam - rest.min())) / scale if rest.size else 0.0
    return spread, violation


def convexity_probe(w1, w2, s, k: int = 2, atol: float = 1e-9) -> bool:
    """Check the convexity inequality along the chord from ``w2`` to ``w1``."""
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    t1, t2 = w1.sum(), w2.sum()
    if abs(t1 - t2) > FEASIBILITY_RTOL * max(t1, t2, 1.0):
        raise ValueError(f"weight vectors have different totals ({t1} vs {t2})")
    if k < 2:
        raise ValueError("k must be at least 2")
    f1, f2 = objective(w1, s), objective(w2, s)
    for j in range(1, k):
        lam = j / k
        if objective(lam * w1 + (1 - lam) * w2, s) > lam * f1 + (1 - lam) * f2 + atol:
            return False
    return True


PATH_LAPLACIAN = np.array([[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]])
STAR_LAPLACIAN = np.array([[2.0, -1.0, -1.0], [-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]])


def _disagreement_map(L):
    R = np.linalg.inv(np.eye(L.shape[0]) + L)
    return R @ L @ R


def nonconvexity_witness(L1=None, L2=None, lam: float = 0.5):
    """Minimum eigenvalue of the convexity gap of ``L -> (I+L)^{-1} L (I+L)^{-1}``.

    With the default pair (a path and a star on three nodes) the gap has a
    negative eigenvalue, so disagreement alone is not convex in the weights.
    Returns ``(L1, L2, min_eigenvalue)``.
    """
    L1 = PATH_LAPLACIAN.copy() if L1 is None else np.asarray(L1, dtype=float)
    L2 = STAR_LAPLACIAN.copy() if L2 is None else np.asarray(L2, dtype=float)
    M = (
        lam * _disagreement_map(L1)
        + (1 - lam) * _disagreement_map(L2)
        - _disagreement_map(lam * L1 + (1 - lam) * L2)
    )
    M = 0.5 * (M + M.T)
    return L1, L2, float(linalg.eigvalsh(M)[0])
