"""Monotone projected gradient descent with Armijo backtracking."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

log = logging.getLogger(__name__)

_TINY = 1e-300
_MIN_STEP = 1e-30


@dataclass(frozen=True)
class OptimizerConfig:
    """Stopping and line-search settings shared by both solvers.

    ``step`` is the first trial step.  With ``adaptive`` set, later trial
    steps come from the Barzilai-Borwein ratio of the last accepted move;
    the Armijo test keeps every accepted step a descent step either way.

    Convergence needs both a relative objective decrease below ``rel_tol``
    and a scaled gradient-mapping residual ``|x - P(x - t g)| / (t |g|)``
    (infinity norms) below ``grad_tol`` at the accepted step.
    """

    max_iters: int = 5000
    rel_tol: float = 1e-8
    grad_tol: float = 1e-6
    step: float = 1.0
    shrink: float = 0.5
    armijo: float = 1e-4
    adaptive: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if min(self.rel_tol, self.grad_tol, self.step, self.armijo) <= 0:
            raise ValueError("rel_tol, grad_tol, step and armijo must be positive")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")


@dataclass
class PGResult:
    x: np.ndarray
    fun: float
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list)


def projected_gradient(
    fun: Callable[[np.ndarray], tuple[float, object]],
    grad: Callable[[np.ndarray, object], np.ndarray],
    project: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    config: OptimizerConfig,
) -> PGResult:
    """Minimize ``fun`` over a convex set given by its Euclidean projection.

    ``fun(x)`` returns ``(value, aux)``; ``aux`` is handed back to
    ``grad(x, aux)`` so a linear solve done for the value can be reused.
    """
    x = np.array(x0, dtype=float)
    fx, aux = fun(x)
    history = [fx]
    step = config.step
    g = grad(x, aux)
    converged = False
    it = 0
    while it < config.max_iters:
        it += 1
        if not np.any(g):
            converged = True
            break
        t = step
        while True:
            x_new = project(x - t * g)
            d = x_new - x
            if not np.any(d):
                break
            f_new, aux_new = fun(x_new)
            if f_new <= fx + config.armijo * float(g @ d):
                break
            t *= config.shrink
            if t < _MIN_STEP:
                d = None
                break
        if d is None or not np.any(d):
            # no representable descent step: stationary to working precision
            converged = True
            break
        g_new = grad(x_new, aux_new)
        rel = (fx - f_new) / max(abs(fx), _TINY)
        residual = float(np.max(np.abs(d))) / (t * float(np.max(np.abs(g))))
        x, fx, aux = x_new, f_new, aux_new
        history.append(fx)
        if config.adaptive:
            y = g_new - g
            sy = float(d @ y)
            step = float(d @ d) / sy if sy > 0 else t / config.shrink
        else:
            step = config.step
        g = g_new
        if rel < config.rel_tol and residual < config.grad_tol:
            converged = True
            break
    log.debug("projected gradient stopped after %d iterations at %.6g", it, fx)
    return PGResult(x=x, fun=fx, iterations=it, converged=converged, history=history)
