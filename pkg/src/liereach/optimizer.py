"""BFGS with backtracking line search.

Kept small and dependency-free so that optimizer behaviour is fixed by this
package rather than by a solver library version.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass
class OptimizerSettings:
    method: str = "bfgs"
    max_iterations: int = 1000
    max_evaluations: int = 200_000
    gtol: float = 1e-9
    ftol: float = 1e-12
    fd_step: float = 1e-6

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    grad_norm: float
    iterations: int
    evaluations: int
    converged: bool
    message: str
    history: list = field(default_factory=list)


def bfgs(fun: Callable[[np.ndarray], float],
         fun_and_grad: Callable[[np.ndarray], tuple[float, np.ndarray, int]],
         x0: np.ndarray, settings: OptimizerSettings | None = None) -> OptimizeResult:
    """Minimize ``fun`` from ``x0``.

    Parameters
    ----------
    fun : callable
        Objective value at a point; counts as one evaluation.
    fun_and_grad : callable
        Returns ``(value, gradient, evaluations_used)``.
    x0 : ndarray
        Starting point.
    settings : OptimizerSettings, optional

    Notes
    -----
    Stops when the gradient norm drops below ``gtol``, when an accepted step
    lowers the objective by less than ``ftol``, or on the iteration and
    evaluation budgets.  A failed line search resets the inverse Hessian to
    the identity once before giving up.
    """
    s = settings or OptimizerSettings()
    x = np.array(x0, dtype=float)
    n = x.size
    f, g, evals = fun_and_grad(x)
    hist = [f]
    hinv = np.eye(n)
    fresh = True
    c1 = 1e-4
    for it in range(1, s.max_iterations + 1):
        gnorm = float(np.linalg.norm(g))
        if not np.isfinite(f) or not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite objective or gradient at iteration {it}: f={f}")
        if gnorm < s.gtol:
            return OptimizeResult(x, f, gnorm, it - 1, evals, True, "gradient norm below gtol", hist)
        d = -hinv @ g
        slope = float(g @ d)
        if slope >= 0:
            hinv = np.eye(n)
            d, slope, fresh = -g, -gnorm**2, True
        alpha = min(1.0, 1.0 / gnorm) if fresh else 1.0
        accepted = False
        for _ in range(50):
            x_new = x + alpha * d
            f_new = fun(x_new)
            evals += 1
            if f_new <= f + c1 * alpha * slope:
                accepted = True
                break
            alpha *= 0.5
        if not accepted or f_new >= f:
            if not fresh:
                hinv = np.eye(n)
                fresh = True
                continue
            return OptimizeResult(x, f, gnorm, it, evals, True, "line search made no progress", hist)
        f_new, g_new, used = fun_and_grad(x_new)
        evals += used
        step = x_new - x
        y = g_new - g
        sy = float(step @ y)
        if sy > 1e-12 * float(np.linalg.norm(step)) * float(np.linalg.norm(y)):
            if fresh:
                hinv = np.eye(n) * (sy / float(y @ y))
            rho = 1.0 / sy
            hy = hinv @ y
            hinv = (hinv - rho * (np.outer(step, hy) + np.outer(hy, step))
                    + (rho * rho * float(y @ hy) + rho) * np.outer(step, step))
            fresh = False
        df = f - f_new
        x, f, g = x_new, f_new, g_new
        hist.append(f)
        if df < s.ftol:
            return OptimizeResult(x, f, float(np.linalg.norm(g)), it, evals, True,
                                  "energy change below ftol", hist)
        if evals >= s.max_evaluations:
            return OptimizeResult(x, f, float(np.linalg.norm(g)), it, evals, False,
                                  "evaluation budget exhausted", hist)
    return OptimizeResult(x, f, float(np.linalg.norm(g)), s.max_iterations, evals, False,
                          "iteration budget exhausted", hist)
