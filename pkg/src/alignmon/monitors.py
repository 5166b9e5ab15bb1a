"""The three user-facing alignment monitors.

Each monitor is a sequential state machine: construct it, then feed one
(prediction, observation) pair per step and receive a :class:`Verdict`
carrying the running estimate and its anytime-valid interval.

* :class:`AverageMonitor` tracks the average expected score of one model.
* :class:`DifferentialMonitor` tracks the score difference against a
  reference model and supports a sticky better/worse decision.
* :class:`WeightedMonitor` tracks a history-weighted average with
  prediction weights ``alpha`` and outcome weights ``beta``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable

from .confseq import MonitorCore
from .dist import Distribution
from .scoring import ScoringRule, WeightVector, weighted_score

History = tuple[int, ...]


@dataclass(frozen=True)
class Verdict:
    """Per-step monitor output.

    ``lo``/``hi`` bracket the estimate symmetrically.  Before the weighted
    monitor has seen any positively weighted step there is no estimator;
    such verdicts carry ``None`` in all three value fields.
    """

    step: int
    estimate: float | None
    lo: float | None
    hi: float | None

    @property
    def has_interval(self) -> bool:
        return self.lo is not None

    @staticmethod
    def no_information(step: int) -> "Verdict":
        return Verdict(step, None, None, None)


class DecisionKind(enum.Enum):
    MODEL_BETTER = "top"
    REFERENCE_BETTER = "bot"
    UNDECIDED = "undecided"

    @property
    def symbol(self) -> str:
        return {"top": "⊤", "bot": "⊥", "undecided": "?"}[self.value]


@dataclass(frozen=True)
class Decision:
    value: DecisionKind
    at_step: int | None

    @staticmethod
    def undecided() -> "Decision":
        return Decision(DecisionKind.UNDECIDED, None)


class AverageMonitor:
    """Tracks the running average score of one model's predictions."""

    kind = "average"

    def __init__(self, rule: ScoringRule, delta: float):
        self.rule = rule
        self.delta = delta
        self.core = MonitorCore(sigma=rule.bounds.width, delta=delta)
        self._step = 0

    @property
    def step_count(self) -> int:
        return self._step

    def update(self, y_hat: Distribution, x: int) -> Verdict:
        s = self.rule.score(y_hat, x)
        self.core.update(s)
        self._step += 1
        lo, hi = self.core.interval()
        return Verdict(self._step, self.core.estimate, lo, hi)


class DifferentialMonitor:
    """Tracks the score difference between a model and a reference model.

    The estimate targets (model score - reference score); negative means
    the model is better aligned.  The first step whose interval clears 0
    fixes the decision for good, although verdicts keep updating.
    """

    kind = "differential"

    def __init__(self, rule: ScoringRule, delta: float):
        self.rule = rule
        self.delta = delta
        # score differences live on [a-b, b-a]
        self.core = MonitorCore(sigma=2.0 * rule.bounds.width, delta=delta)
        self._step = 0
        self._decision: Decision | None = None

    @property
    def step_count(self) -> int:
        return self._step

    @property
    def decision(self) -> Decision:
        return self._decision if self._decision is not None else Decision.undecided()

    def update(self, y_hat: Distribution, y_ref: Distribution, x: int) -> Verdict:
        if y_hat.n != y_ref.n:
            raise ValueError("model and reference predict over different spaces")
        s = self.rule.score(y_hat, x) - self.rule.score(y_ref, x)
        self.core.update(s)
        self._step += 1
        lo, hi = self.core.interval()
        if self._decision is None:
            if hi < 0.0:
                self._decision = Decision(DecisionKind.MODEL_BETTER, self._step)
            elif lo > 0.0:
                self._decision = Decision(DecisionKind.REFERENCE_BETTER, self._step)
        return Verdict(self._step, self.core.estimate, lo, hi)


def first_decision(verdicts: Iterable[Verdict]) -> Decision:
    """First interval crossing of 0 in a differential verdict stream."""
    for v in verdicts:
        if not v.has_interval:
            continue
        if v.hi < 0.0:
            return Decision(DecisionKind.MODEL_BETTER, v.step)
        if v.lo > 0.0:
            return Decision(DecisionKind.REFERENCE_BETTER, v.step)
    return Decision.undecided()


@dataclass(frozen=True)
class WeightFunctions:
    """History-dependent prediction and outcome weights.

    ``alpha`` maps the observed history to a prediction weight in
    ``[0, c_alpha]``; ``beta`` maps it to an outcome-weight vector capped at
    ``c_beta``.  With ``markovian=True`` the functions still receive a
    history tuple, but only its last element (possibly none for the empty
    history), and the monitor stores a single state instead of the full
    history.
    """

    alpha: Callable[[History], float]
    beta: Callable[[History], WeightVector]
    c_alpha: float
    c_beta: float
    markovian: bool = False

    def __post_init__(self):
        if self.c_alpha <= 0.0 or self.c_beta <= 0.0:
            raise ValueError("weight caps must be positive")


def state_weight_functions(alpha_of_state: Callable[[int | None], float],
                           beta_of_state: Callable[[int | None], WeightVector],
                           c_alpha: float, c_beta: float) -> WeightFunctions:
    """Markovian weights defined on the last observed state (None at start)."""
    def alpha(z: History) -> float:
        return alpha_of_state(z[-1] if z else None)

    def beta(z: History) -> WeightVector:
        return beta_of_state(z[-1] if z else None)

    return WeightFunctions(alpha, beta, c_alpha, c_beta, markovian=True)


def unit_weights(n: int) -> WeightFunctions:
    """alpha == 1, beta == 1: degenerates the weighted monitor to the average one."""
    ones = WeightVector.ones(n)
    return state_weight_functions(lambda s: 1.0, lambda s: ones, 1.0, 1.0)


class WeightedMonitor:
    """Tracks the alpha/beta-weighted average score of one model.

    Time progresses by the prediction weight, so zero-weight steps leave
    the whole core untouched (the observation still extends the history).
    Until the first positive weight, verdicts carry the no-information
    marker instead of an interval.
    """

    kind = "weighted"

    def __init__(self, rule: ScoringRule, delta: float, weights: WeightFunctions):
        self.rule = rule
        self.delta = delta
        self.weights = weights
        sigma = weights.c_alpha * weights.c_beta * rule.bounds.width
        self.core = MonitorCore(sigma=sigma, delta=delta)
        self._step = 0
        self._memory: list[int] = []

    @property
    def step_count(self) -> int:
        return self._step

    @property
    def history_length(self) -> int:
        """Stored history size: stays <= 1 for markovian weights."""
        return len(self._memory)

    def update(self, y_hat: Distribution, x: int) -> Verdict:
        z = tuple(self._memory)
        a = self.weights.alpha(z)
        if not 0.0 <= a <= self.weights.c_alpha:
            raise ValueError(f"alpha weight {a} outside [0, {self.weights.c_alpha}]")
        if a == 0.0:
            s = 0.0
        else:
            w = self.weights.beta(z)
            if w.cap > self.weights.c_beta:
                raise ValueError(f"beta cap {w.cap} exceeds declared {self.weights.c_beta}")
            s = a * weighted_score(self.rule, w, y_hat, x)
        self.core.update(s, weight=a)
        if self.weights.markovian:
            if self._memory:
                self._memory[0] = x
            else:
                self._memory.append(x)
        else:
            self._memory.append(x)
        self._step += 1
        if self.core.t_eff == 0.0:
            return Verdict.no_information(self._step)
        lo, hi = self.core.interval()
        return Verdict(self._step, self.core.estimate, lo, hi)
