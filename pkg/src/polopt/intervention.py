"""Budgeted decreases of innate opinions on a fixed graph.

Minimizes the polarization-disagreement index of ``s + ds`` over
``{ds <= 0, s + ds >= 0, sum(ds) >= -alpha}``.  With ``x = s + ds`` and
``Q = (I + L)^{-1}`` the index is ``x^T Q x - (1^T x)^2 / n``, a convex
quadratic, solved here by projected gradient with an exact projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import EquilibriumReport, FJSystem, as_opinions, index
from .graph import WeightedGraph
from .optim import OptimizerConfig, projected_gradient

_BISECT_ITERS = 200


def project_box_halfspace(y, lower, alpha: float) -> np.ndarray:
    """Euclidean projection onto ``{lower <= x <= 0, sum(x) >= -alpha}``.

    The result is ``clip(y + mu, lower, 0)`` with ``mu >= 0`` the smallest
    shift meeting the budget, located by bisection.
    """
    y = np.asarray(y, dtype=float)
    lower = np.asarray(lower, dtype=float)
    if np.any(np.isnan(y)) or np.any(np.isnan(lower)):
        raise ValueError("projection input contains NaN")
    if y.shape != lower.shape:
        raise ValueError("y and lower must have the same shape")
    if np.any(lower > 0):
        raise ValueError("lower bounds must be <= 0")
    if alpha < 0:
        raise ValueError("budget must be nonnegative")
    if alpha == 0:
        return np.zeros_like(y)
    x = np.clip(y, lower, 0.0)
    if x.sum() >= -alpha:
        return x
    lo, hi = 0.0, float(-y.min())
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if np.clip(y + mid, lower, 0.0).sum() < -alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    # hi side is always feasible
    return np.clip(y + hi, lower, 0.0)


@dataclass(frozen=True)
class InterventionProblem:
    g: WeightedGraph
    s: np.ndarray
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "s", as_opinions(self.s, self.g.n))
        if not self.alpha >= 0:
            raise ValueError(f"budget must be nonnegative, got {self.alpha}")
        object.__setattr__(self, "alpha", float(self.alpha))


@dataclass(frozen=True)
class InterventionResult:
    ds: np.ndarray
    objective: float
    budget_used: float
    report: EquilibriumReport
    iterations: int = 0
    converged: bool = True


class _IndexQuadratic:
    """Index of ``s + ds`` and its gradient, sharing one factorization."""

    def __init__(self, system: FJSystem, s: np.ndarray):
        self.system = system
        self.s = s

    def fun(self, ds):
        x = self.s + ds
        z = self.system.solve(x)
        mean = x.mean()
        return float(x @ z - x.size * mean * mean), (z, mean)

    def grad(self, ds, aux):
        z, mean = aux
        return 2.0 * (z - mean)


def _finish(problem, ds, it, converged):
    ds = np.minimum(ds, 0.0)
    x = np.clip(problem.s + ds, 0.0, 1.0)
    report = index(problem.g, x)
    return InterventionResult(
        ds=ds,
        objective=report.index,
        budget_used=float(-ds.sum()) + 0.0,
        report=report,
        iterations=it,
        converged=converged,
    )


def optimize_opinions(
    problem: InterventionProblem,
    config: OptimizerConfig | None = None,
    system: FJSystem | None = None,
    ds0=None,
) -> InterventionResult:
    """Best budgeted decrease ``ds`` for a fixed graph.

    ``system`` lets callers reuse a factorization of ``I + L``; ``ds0`` is
    an optional feasible warm start.
    """
    config = config or OptimizerConfig()
    s, alpha = problem.s, problem.alpha
    n = s.size
    if alpha == 0 or not np.any(s):
        return _finish(problem, np.zeros(n), 0, True)
    system = system or FJSystem.from_graph(problem.g)
    quad = _IndexQuadratic(system, s)
    lower = -s
    x0 = np.zeros(n) if ds0 is None else project_box_halfspace(ds0, lower, alpha)
    res = projected_gradient(
        quad.fun, quad.grad, lambda y: project_box_halfspace(y, lower, alpha), x0, config
    )
    return _finish(problem, res.x, res.iterations, res.converged)


def budget_sweep(g: WeightedGraph, s, alphas, config: OptimizerConfig | None = None) -> list[InterventionResult]:
    """Solve for each budget in ascending order, warm-starting from the last.

    Feasible sets are nested, so each solve starts from a point at least as
    good as the previous optimum.
    """
    alphas = [float(a) for a in alphas]
    if any(b < a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("budgets must be sorted ascending")
    s = as_opinions(s, g.n)
    system = FJSystem.from_graph(g)
    results = []
    ds = None
    for a in alphas:
        res = optimize_opinions(InterventionProblem(g, s, a), config, system=system, ds0=ds)
        results.append(res)
        ds = res.ds
    return results


def stationarity_decrease(problem: InterventionProblem, ds, step: float = 1e-3) -> float:
    """Objective decrease from one projected-gradient step of size ``step``."""
    quad = _IndexQuadratic(FJSystem.from_graph(problem.g), problem.s)
    f0, aux = quad.fun(np.asarray(ds, dtype=float))
    trial = project_box_halfspace(ds - step * quad.grad(ds, aux), -problem.s, problem.alpha)
    return f0 - quad.fun(trial)[0]
