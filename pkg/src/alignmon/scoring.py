"""Bounded proper scoring rules and their outcome-weighted transform.

Provides the Brier score (bounded on [0, 2]), the spherical score (bounded
on [-1, 0]), an outcome-weight wrapper that stays proper on the positively
weighted outcomes, and the exact expected-score oracle used throughout the
experiment harness and the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .dist import Distribution, IndexOutOfRange


class ZeroNorm(ValueError):
    """All-zero mass vector reached the spherical score (corrupted input)."""


@dataclass(frozen=True)
class ScoreBounds:
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"bounds need a < b, got [{self.a}, {self.b}]")

    @property
    def width(self) -> float:
        return self.b - self.a


class ScoringRule:
    """A bounded score of a (prediction, observed outcome) pair.

    Lower is better; every emitted score lies within ``bounds``.
    """

    name: str
    bounds: ScoreBounds

    def score(self, y: Distribution, x: int) -> float:
        raise NotImplementedError

    def score_many(self, y: Distribution, xs: np.ndarray) -> np.ndarray:
        """Vectorised scores of one prediction against many outcomes."""
        raise NotImplementedError


class BrierScore(ScoringRule):
    name = "brier"
    bounds = ScoreBounds(0.0, 2.0)

    def score(self, y: Distribution, x: int) -> float:
        # sum_x' (y(x') - 1[x'=x])^2  ==  ||y||^2 - 2 y(x) + 1
        if x < 0 or x >= y.n:
            raise IndexOutOfRange(x, y.n)
        return y.sum_sq() - 2.0 * y.prob(x) + 1.0

    def score_many(self, y: Distribution, xs: np.ndarray) -> np.ndarray:
        dense = y.as_dense()
        return y.sum_sq() - 2.0 * dense[xs] + 1.0


class SphericalScore(ScoringRule):
    name = "spherical"
    bounds = ScoreBounds(-1.0, 0.0)

    def score(self, y: Distribution, x: int) -> float:
        if x < 0 or x >= y.n:
            raise IndexOutOfRange(x, y.n)
        norm = np.sqrt(y.sum_sq())
        if norm == 0.0:
            raise ZeroNorm("spherical score undefined for zero mass vector")
        return float(-y.prob(x) / norm)

    def score_many(self, y: Distribution, xs: np.ndarray) -> np.ndarray:
        norm = np.sqrt(y.sum_sq())
        if norm == 0.0:
            raise ZeroNorm("spherical score undefined for zero mass vector")
        return -y.as_dense()[xs] / norm


class WeightVector:
    """Outcome weights ``0 <= w(x) <= cap`` over an n-outcome space."""

    __slots__ = ("values", "cap", "_constant")

    def __init__(self, values: Iterable[float], cap: float | None = None):
        v = np.asarray(values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("weight vector must be a non-empty 1-d array")
        if np.any(v < 0.0):
            raise ValueError("weights must be non-negative")
        top = float(v.max())
        if cap is None:
            cap = top if top > 0.0 else 1.0
        if cap <= 0.0 or top > cap:
            raise ValueError(f"weights exceed cap {cap}")
        v.setflags(write=False)
        self.values = v
        self.cap = float(cap)
        self._constant = bool(top > 0.0 and np.all(v == top))

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def is_constant_positive(self) -> bool:
        return self._constant

    def __getitem__(self, i: int) -> float:
        return float(self.values[i])

    @staticmethod
    def ones(n: int) -> "WeightVector":
        return WeightVector(np.ones(n), cap=1.0)


def reweight(y: Distribution, w: WeightVector) -> Distribution | None:
    """Tilt ``y`` by the outcome weights and renormalise.

    Returns ``None`` when the normaliser vanishes (weights and prediction
    have disjoint support).  Constant positive weights cancel; the input is
    returned unchanged.
    """
    if w.n != y.n:
        raise ValueError(f"weight vector over {w.n} outcomes, distribution over {y.n}")
    if w.is_constant_positive:
        return y
    idx, val = y.items()
    tilted = val * w.values[idx]
    total = float(tilted.sum())
    if total <= 0.0:
        return None
    keep = tilted > 0.0
    return Distribution.from_sparse(
        y.n, {int(i): float(v / total) for i, v in zip(idx[keep], tilted[keep])})


def weighted_score(rule: ScoringRule, w: WeightVector, y: Distribution, x: int) -> float:
    """Score ``w(x) * rule(reweight(y, w), x)``.

    A zero weight on the observed outcome annihilates the score.  When the
    reweighting degenerates but the observed outcome carries weight, the
    score is the worst value ``w(x) * b`` (the prediction gave zero mass to
    every weighted outcome, yet a weighted outcome occurred).
    """
    if x < 0 or x >= y.n:
        raise IndexOutOfRange(x, y.n)
    wx = w[x]
    if wx == 0.0:
        return 0.0
    yw = reweight(y, w)
    if yw is None:
        return wx * rule.bounds.b
    return wx * rule.score(yw, x)


class WeightedRule(ScoringRule):
    """A base rule tilted by outcome weights; bounded on [cap*a, cap*b]."""

    def __init__(self, base: ScoringRule, weights: WeightVector):
        self.base = base
        self.weights = weights
        self.name = f"weighted_{base.name}"
        c = weights.cap
        lo, hi = c * base.bounds.a, c * base.bounds.b
        self.bounds = ScoreBounds(min(lo, hi), max(lo, hi))

    def score(self, y: Distribution, x: int) -> float:
        return weighted_score(self.base, self.weights, y, x)

    def score_many(self, y: Distribution, xs: np.ndarray) -> np.ndarray:
        wx = self.weights.values[xs]
        yw = reweight(y, self.weights)
        if yw is None:
            return wx * self.base.bounds.b
        out = wx * self.base.score_many(yw, xs)
        return np.where(wx == 0.0, 0.0, out)


def expected_score(rule: ScoringRule, y_hat: Distribution, y_star: Distribution) -> float:
    """Exact expectation of ``rule(y_hat, X)`` for ``X ~ y_star``.

    Computed as the literal finite sum over the support of ``y_star``; this
    is the ground-truth oracle and deliberately shares no shortcuts with the
    monitor code paths.
    """
    if y_hat.n != y_star.n:
        raise ValueError("distributions live on different outcome spaces")
    idx, val = y_star.items()
    return float(sum(p * rule.score(y_hat, int(x)) for x, p in zip(idx, val)))


_RULES = {
    "brier": BrierScore,
    "spherical": SphericalScore,
}


def get_rule(name: str) -> ScoringRule:
    """Look up a base scoring rule by name ('brier' or 'spherical')."""
    try:
        return _RULES[name]()
    except KeyError:
        raise KeyError(f"unknown scoring rule {name!r}, try: " + ", ".join(_RULES)) from None
