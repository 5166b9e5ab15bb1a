"""Time-uniform confidence-sequence kernel shared by all monitors.

The error radius comes from a polynomial stitched boundary over
geometrically spaced epochs of the empirical variance process.  The three
boundary coefficients live here and nowhere else.
"""

from __future__ import annotations

import math

#: Stitched-boundary coefficients (eta = e, m = 1, 1/x^2 epoch weights).
C_VARIANCE = 2.13
C_RANGE_SQ = 1.76
C_RANGE = 1.33


class NoObservations(RuntimeError):
    """Interval requested before any (positively weighted) observation."""


def g(n: float, delta: float, *, clamp: float = math.e) -> float:
    """Stitching exponent ``2*log(pi*log(n)/sqrt(6)) + log(2/delta)``.

    The inner argument is clamped at ``e`` so the double logarithm stays
    finite and non-negative at ``n = 1``; clamping can only widen the
    boundary below the clamp point.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0,1), got {delta}")
    if n < 1.0:
        raise ValueError(f"variance process must be >= 1, got {n}")
    return 2.0 * math.log(math.pi * math.log(max(n, clamp)) / math.sqrt(6.0)) \
        + math.log(2.0 / delta)


def epsilon(t_eff: float, n_var: float, delta: float, sigma: float) -> float:
    """Interval half-width at effective time ``t_eff``.

    Strictly positive; decreases like ``1/t_eff`` for a fixed variance
    process and grows with the score range ``sigma``.
    """
    if t_eff <= 0.0:
        raise ValueError(f"effective time must be positive, got {t_eff}")
    gv = g(n_var, delta)
    return (math.sqrt(C_VARIANCE * n_var * gv + C_RANGE_SQ * sigma * sigma * gv * gv)
            + C_RANGE * sigma * gv) / t_eff


class MonitorCore:
    """O(1) running state: effective time, running mean, variance process.

    ``update`` consumes one (score, weight) pair; weights are 1 for the
    unweighted monitors and the prediction weight for the weighted monitor.
    The variance increment uses the pre-update mean (the predictable
    plug-in), and the variance process is clamped at 1 and never decreases.
    """

    __slots__ = ("t_eff", "estimate", "var_process", "sigma", "delta")

    def __init__(self, sigma: float, delta: float):
        if sigma <= 0.0:
            raise ValueError(f"score range must be positive, got {sigma}")
        if not 0.0 < delta < 1.0:
            raise ValueError(f"delta must be in (0,1), got {delta}")
        self.sigma = float(sigma)
        self.delta = float(delta)
        self.t_eff = 0.0
        self.estimate = 0.0
        self.var_process = 1.0

    def update(self, s: float, weight: float = 1.0) -> None:
        if weight < 0.0:
            raise ValueError(f"weight must be >= 0, got {weight}")
        if weight == 0.0:
            # A zero prediction weight forces a zero score and freezes the
            # whole state; time does not progress.
            if s != 0.0:
                raise ValueError("zero-weight update must carry a zero score")
            return
        self.var_process = max(1.0, self.var_process + (s - self.estimate) ** 2)
        new_t = self.t_eff + weight
        self.estimate = (self.t_eff * self.estimate + s) / new_t
        self.t_eff = new_t

    def radius(self) -> float:
        if self.t_eff <= 0.0:
            raise NoObservations("no positively weighted observations yet")
        return epsilon(self.t_eff, self.var_process, self.delta, self.sigma)

    def interval(self) -> tuple[float, float]:
        """(lo, hi) = estimate -/+ radius; raises NoObservations at t_eff = 0."""
        r = self.radius()
        return self.estimate - r, self.estimate + r

    def __repr__(self) -> str:
        return (f"MonitorCore(t_eff={self.t_eff}, estimate={self.estimate}, "
                f"N={self.var_process}, sigma={self.sigma}, delta={self.delta})")
