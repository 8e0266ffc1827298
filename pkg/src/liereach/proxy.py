"""Predict whether a closure will reach the maximum rank from an early-pass rank.

For each partition size ``m`` the fitted curve is

    f(x) = 1                            for x >= a
    f(x) = 1 / (1 + alpha exp(beta x))  for x <  a

where ``a`` is the mean rank after ``k`` passes.  ``alpha`` and ``beta`` are
pinned by ``f(x_min) = p_min(m)`` and ``f(a^-) = TOP``.  ``L(x)`` linearly
interpolates ``f`` between the observed ranks.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .closure import ClosureTrace

TOP = 0.99
P_MIN_LOW = 0.25
P_MIN_HIGH = 0.95
DEFAULT_K = 3


class DegenerateFitError(ValueError):
    """Fewer than two distinct ranks below the mean; the logistic is undetermined."""


class DegenerateFitWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ProxyCurve:
    m: int
    a: float
    x_min: float
    p_min: float
    alpha: float
    beta: float
    nodes: tuple[tuple[float, float], ...]
    step: bool = False

    def f(self, x: float) -> float:
        if x >= self.a:
            return 1.0
        if self.step:
            return self.p_min
        return 1.0 / (1.0 + self.alpha * math.exp(self.beta * x))

    def __call__(self, x: float) -> float:
        """``L(x)``: interpolated, clamped to the node range and to [0, 1]."""
        if x >= self.a:
            return 1.0
        if self.step:
            return self.p_min
        xs, ys = zip(*self.nodes)
        return float(np.clip(np.interp(x, xs, ys), 0.0, 1.0))

    def to_dict(self) -> dict:
        return {"m": self.m, "a": self.a, "x_min": self.x_min, "alpha": self.alpha,
                "beta": self.beta, "p_min": self.p_min, "step": self.step,
                "nodes": [list(n) for n in self.nodes]}

    @classmethod
    def from_dict(cls, d: dict) -> "ProxyCurve":
        return cls(int(d["m"]), float(d["a"]), float(d["x_min"]), float(d["p_min"]),
                   float(d["alpha"]), float(d["beta"]),
                   tuple((float(x), float(y)) for x, y in d["nodes"]), bool(d.get("step", False)))


@dataclass(frozen=True)
class ProxyModel:
    k: int
    curves: dict[int, ProxyCurve] = field(default_factory=dict)

    @property
    def degenerate(self) -> list[int]:
        return [m for m, c in sorted(self.curves.items()) if c.step]

    def to_dict(self) -> dict:
        return {"k": self.k, "per_m": [c.to_dict() for _, c in sorted(self.curves.items())]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "ProxyModel":
        curves = [ProxyCurve.from_dict(c) for c in d["per_m"]]
        return cls(int(d["k"]), {c.m: c for c in curves})


def p_min_schedule(m: int, m_lo: int, m_hi: int, low: float = P_MIN_LOW, high: float = P_MIN_HIGH) -> float:
    """Floor probability, linear in ``m`` from ``low`` at ``m_lo`` to ``high`` at ``m_hi``."""
    if m_hi == m_lo:
        return high
    t = (m - m_lo) / (m_hi - m_lo)
    return float(low + (high - low) * min(max(t, 0.0), 1.0))


def fit_curve(m: int, ranks: Sequence[float], p_min: float, strict: bool = False) -> ProxyCurve:
    """Fit one curve to the ranks observed after ``k`` passes for size ``m``."""
    r = np.asarray(ranks, dtype=float)
    if r.size == 0:
        raise ValueError(f"no traces for m={m}")
    a = float(r.mean())
    x_min = float(r.min())
    below = np.unique(r[r < a])
    if below.size < 2:
        msg = f"m={m}: {below.size} distinct rank(s) below the mean {a:g}; using a step function"
        if strict:
            raise DegenerateFitError(msg)
        warnings.warn(msg, DegenerateFitWarning, stacklevel=3)
        nodes = tuple((float(x), p_min) for x in below) + ((a, 1.0),)
        return ProxyCurve(m, a, x_min, p_min, 0.0, 0.0, nodes, step=True)
    q1 = 1.0 / p_min - 1.0
    q2 = 1.0 / TOP - 1.0
    beta = (math.log(q2) - math.log(q1)) / (a - x_min)
    alpha = q1 * math.exp(-beta * x_min)
    xs = sorted(set(float(x) for x in r[r < a]))
    nodes = [(x, 1.0 / (1.0 + alpha * math.exp(beta * x))) for x in xs]
    nodes[0] = (x_min, p_min)  # exact at the anchor, free of roundoff
    nodes.append((a, 1.0))
    return ProxyCurve(m, a, x_min, p_min, alpha, beta, tuple(nodes))


def fit_proxy(traces: Iterable[tuple[int, ClosureTrace, bool]], k: int = DEFAULT_K,
              m_range: tuple[int, int] | None = None, strict: bool = False,
              p_min_low: float = P_MIN_LOW, p_min_high: float = P_MIN_HIGH) -> ProxyModel:
    """Fit one curve per partition size from ``(m, trace, reached_max)`` triples.

    Parameters
    ----------
    traces : iterable of (int, ClosureTrace, bool)
    k : int
        Pass whose rank is the predictor.
    m_range : (int, int), optional
        Sizes at which ``p_min`` equals ``p_min_low`` and ``p_min_high``;
        defaults to the smallest and largest ``m`` present.
    strict : bool
        Raise :class:`DegenerateFitError` instead of falling back to a step.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    by_m: dict[int, list[float]] = {}
    for m, tr, _ in traces:
        by_m.setdefault(int(m), []).append(tr.rank_at(k))
    if not by_m:
        raise ValueError("no traces to fit")
    lo, hi = m_range if m_range is not None else (min(by_m), max(by_m))
    curves = {m: fit_curve(m, ranks, p_min_schedule(m, lo, hi, p_min_low, p_min_high), strict)
              for m, ranks in sorted(by_m.items())}
    return ProxyModel(k, curves)


def predict(model: ProxyModel, rank_at_k: float, m: int) -> float:
    """Probability that a size-``m`` partition with this rank after ``k`` passes reaches the maximum."""
    if m not in model.curves:
        raise KeyError(f"model has no curve for m={m}")
    return model.curves[m](rank_at_k)


def backtest(model: ProxyModel, traces: Iterable[tuple[int, ClosureTrace, bool]]) -> tuple[float, list[dict]]:
    """Calibration of ``model`` on held-out traces.

    Traces are binned by ``(m, rank after k passes)``.  Each bin compares the
    predicted probability with the observed reached-max frequency.  The
    score is the count-weighted mean absolute difference.
    """
    bins: dict[tuple[int, int], list[bool]] = {}
    for m, tr, hit in traces:
        if m in model.curves:
            bins.setdefault((int(m), int(tr.rank_at(model.k))), []).append(bool(hit))
    rows = []
    total = 0.0
    count = 0
    for (m, x), hits in sorted(bins.items()):
        pred = predict(model, x, m)
        emp = float(np.mean(hits))
        rows.append({"m": m, "rank": x, "predicted": pred, "empirical": emp, "count": len(hits)})
        total += abs(pred - emp) * len(hits)
        count += len(hits)
    if count == 0:
        raise ValueError("no held-out traces match the model's partition sizes")
    return total / count, rows
