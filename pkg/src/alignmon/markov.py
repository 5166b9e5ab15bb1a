"""Markov-chain environments, models, and exact expected-score oracles.

Chains are immutable row-stochastic matrices plus an initial distribution.
The module provides seeded simulation, the loop-avoidance transform used to
keep benchmark chains recurrent, reference-model constructors (black box,
gray box, expert), a catalogue of row corruptions that turn an environment
into a misaligned model, the fairness/safety/Bernoulli toy scenarios, and
the per-state expected-score oracle that grounds every coverage test.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dist import Distribution, point_mass, uniform, uniform_over
from .monitors import (Verdict, WeightFunctions, state_weight_functions)
from .scoring import ScoringRule, WeightVector, WeightedRule, expected_score


class DegenerateRow(ValueError):
    """A corruption zeroed out an entire row and no fallback was allowed."""


class InvalidParams(ValueError):
    """Corruption or scenario parameters outside their documented range."""


@dataclass(frozen=True)
class MarkovChain:
    """Row-stochastic transition matrix plus initial distribution."""

    rows: tuple[Distribution, ...]
    init: Distribution

    def __post_init__(self):
        n = self.init.n
        if len(self.rows) != n:
            raise ValueError(f"{len(self.rows)} rows for {n} states")
        for i, row in enumerate(self.rows):
            if row.n != n:
                raise ValueError(f"row {i} ranges over {row.n} states, expected {n}")

    @property
    def n(self) -> int:
        return self.init.n

    @staticmethod
    def from_rows(rows: Sequence[Distribution], init: Distribution | None = None) -> "MarkovChain":
        if init is None:
            init = point_mass(rows[0].n, 0)
        return MarkovChain(tuple(rows), init)


@dataclass(frozen=True)
class Trajectory:
    """A realised state sequence; ``states[0]`` is drawn from the init row."""

    states: np.ndarray
    seed: int | None

    def __len__(self) -> int:
        return int(self.states.size)


class _ChainSampler:
    """Per-row cumulative tables for fast repeated sampling."""

    def __init__(self, chain: MarkovChain):
        self._chain = chain
        self._tables: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        idx, val = chain.init.items()
        self._init_table = (idx, np.cumsum(val))

    def _table(self, state: int) -> tuple[np.ndarray, np.ndarray]:
        tab = self._tables.get(state)
        if tab is None:
            idx, val = self._chain.rows[state].items()
            tab = (idx, np.cumsum(val))
            self._tables[state] = tab
        return tab

    @staticmethod
    def _draw(table: tuple[np.ndarray, np.ndarray], rng: np.random.Generator) -> int:
        idx, cum = table
        u = rng.random() * cum[-1]
        k = int(np.searchsorted(cum, u, side="right"))
        if k >= idx.size:
            k = idx.size - 1
        return int(idx[k])

    def initial(self, rng: np.random.Generator) -> int:
        return self._draw(self._init_table, rng)

    def step(self, state: int, rng: np.random.Generator) -> int:
        return self._draw(self._table(state), rng)


def simulate(env: MarkovChain, steps: int, seed: int | None = None,
             rng: np.random.Generator | None = None) -> Trajectory:
    """Sample a trajectory with ``steps`` transitions (``steps + 1`` states)."""
    if steps < 0:
        raise InvalidParams(f"steps must be >= 0, got {steps}")
    if rng is None:
        rng = np.random.default_rng(seed)
    sampler = _ChainSampler(env)
    states = np.empty(steps + 1, dtype=np.int64)
    cur = sampler.initial(rng)
    states[0] = cur
    for k in range(1, steps + 1):
        cur = sampler.step(cur, rng)
        states[k] = cur
    return Trajectory(states, seed)


def replay_monitor(model: MarkovChain, monitor, states: np.ndarray,
                   reference: MarkovChain | None = None) -> list[Verdict]:
    """Feed a realised trajectory to a monitor, one observation per state.

    The prediction for the first observation is the model's init row; every
    later prediction is the model's row of the previous state, fixed before
    the observation.  Differential monitors additionally receive the
    reference model's prediction for the same step.
    """
    verdicts: list[Verdict] = []
    y = model.init
    y_ref = reference.init if reference is not None else None
    prev: int | None = None
    for x in states:
        x = int(x)
        if prev is not None:
            y = model.rows[prev]
            if reference is not None:
                y_ref = reference.rows[prev]
        if reference is not None:
            verdicts.append(monitor.update(y, y_ref, x))
        else:
            verdicts.append(monitor.update(y, x))
        prev = x
    return verdicts


def drive_monitor(env: MarkovChain, model: MarkovChain, monitor, steps: int,
                  seed: int | None = None,
                  reference: MarkovChain | None = None) -> list[Verdict]:
    """Simulate ``steps`` observations of ``env`` and monitor ``model`` on them."""
    if steps < 1:
        raise InvalidParams(f"steps must be >= 1, got {steps}")
    if env.n != model.n:
        raise ValueError("environment and model have different state counts")
    traj = simulate(env, steps - 1, seed)
    return replay_monitor(model, monitor, traj.states, reference)


# -- loop avoidance ---------------------------------------------------------

def initial_state(chain: MarkovChain) -> int:
    """The return-edge target: the most likely initial state."""
    idx, val = chain.init.items()
    return int(idx[int(np.argmax(val))])


def avoid_bscc(chain: MarkovChain, rho: float = 0.01, *,
               mode: str = "mixture") -> MarkovChain:
    """Give every state a ``rho`` chance of returning to the initial state.

    ``mixture`` (default) replaces each row by ``(1-rho)*row + rho*delta_init``,
    which makes the return probability exactly ``rho``.  ``renormalize``
    instead adds ``rho`` to the init column and renormalises, which spreads
    a state-dependent return mass.
    """
    if not 0.0 <= rho < 1.0:
        raise InvalidParams(f"rho must be in [0,1), got {rho}")
    if mode not in ("mixture", "renormalize"):
        raise InvalidParams(f"unknown avoidance mode {mode!r}")
    if rho == 0.0:
        return chain
    target = initial_state(chain)
    rows = []
    for row in chain.rows:
        idx, val = row.items()
        mass = {int(i): float(v) for i, v in zip(idx, val)}
        if mode == "mixture":
            mass = {i: (1.0 - rho) * v for i, v in mass.items()}
            mass[target] = mass.get(target, 0.0) + rho
        else:
            mass[target] = mass.get(target, 0.0) + rho
            total = sum(mass.values())
            mass = {i: v / total for i, v in mass.items()}
        rows.append(Distribution.from_sparse(chain.n, mass))
    return MarkovChain(tuple(rows), chain.init)


# -- reference models --------------------------------------------------------

def ref_black_box(n: int) -> MarkovChain:
    """Uniform over all states, everywhere: the no-knowledge reference."""
    u = uniform(n)
    return MarkovChain(tuple(u for _ in range(n)), u)


def ref_gray_box(env: MarkovChain) -> MarkovChain:
    """Uniform over each environment row's support (support is known)."""
    rows = tuple(uniform_over(env.n, row.support()) for row in env.rows)
    return MarkovChain(rows, uniform_over(env.n, env.init.support()))


def _mix(a: Distribution, b: Distribution, wa: float) -> Distribution:
    mass: dict[int, float] = {}
    for d, w in ((a, wa), (b, 1.0 - wa)):
        idx, val = d.items()
        for i, v in zip(idx, val):
            mass[int(i)] = mass.get(int(i), 0.0) + w * float(v)
    return Distribution.from_sparse(a.n, mass)


def ref_expert(env: MarkovChain, mix: float = 0.5) -> MarkovChain:
    """Rowwise blend of the environment and its gray-box reference."""
    if not 0.0 <= mix <= 1.0:
        raise InvalidParams(f"mix must be in [0,1], got {mix}")
    gray = ref_gray_box(env)
    rows = tuple(_mix(e, gr, mix) for e, gr in zip(env.rows, gray.rows))
    return MarkovChain(rows, _mix(env.init, gray.init, mix))


# -- corruptions -------------------------------------------------------------

def _row_invert(row: Distribution, n: int, rng, params) -> Distribution:
    idx, val = row.items()
    inv = 1.0 / val
    inv /= inv.sum()
    return Distribution.from_sparse(n, dict(zip(map(int, idx), map(float, inv))))


def _row_flip(row: Distribution, n: int, rng, params) -> Distribution:
    idx, val = row.items()
    flipped = 1.0 - val
    total = flipped.sum()
    if total <= 0.0:
        return row  # point-mass row: 1-p vanishes, keep the original
    flipped /= total
    keep = flipped > 0.0
    return Distribution.from_sparse(
        n, dict(zip(map(int, idx[keep]), map(float, flipped[keep]))))


def _row_sharpen(row: Distribution, n: int, rng, params) -> Distribution:
    power = params.get("power", 4.0)
    if power <= 0.0:
        raise InvalidParams(f"sharpen power must be positive, got {power}")
    idx, val = row.items()
    raised = val ** power
    raised /= raised.sum()
    return Distribution.from_sparse(n, dict(zip(map(int, idx), map(float, raised))))


def _row_additive(row: Distribution, n: int, rng, params) -> Distribution:
    scale = params.get("scale", 0.1)
    if scale < 0.0:
        raise InvalidParams(f"noise scale must be >= 0, got {scale}")
    noisy = row.as_dense() + scale * rng.uniform(-0.5, 0.5, n)
    np.clip(noisy, 0.0, None, out=noisy)
    total = noisy.sum()
    if total <= 0.0:
        return row  # everything clipped away, keep the original
    return Distribution.from_dense(noisy / total)


def _row_dropout(row: Distribution, n: int, rng, params) -> Distribution:
    drop = params.get("drop_prob", 0.4)
    if not 0.0 <= drop < 1.0:
        raise InvalidParams(f"drop probability must be in [0,1), got {drop}")
    idx, val = row.items()
    keep = rng.random(idx.size) >= drop
    if not keep.any():
        keep[rng.integers(idx.size)] = True  # at least one survivor
    kept_idx, kept_val = idx[keep], val[keep]
    kept_val = kept_val / kept_val.sum()
    return Distribution.from_sparse(n, dict(zip(map(int, kept_idx), map(float, kept_val))))


def _row_swap(row: Distribution, n: int, rng, params) -> Distribution:
    idx, val = row.items()
    i_max = int(idx[int(np.argmax(val))])
    if idx.size < n:
        # the row minimum is a zero entry; swap the max there
        gaps = np.setdiff1d(np.arange(n), idx, assume_unique=True)
        i_min = int(gaps[0])
    else:
        i_min = int(idx[int(np.argmin(val))])
    if i_max == i_min:
        return row
    mass = {int(i): float(v) for i, v in zip(idx, val)}
    mass[i_max], mass[i_min] = mass.get(i_min, 0.0), mass.get(i_max, 0.0)
    mass = {i: v for i, v in mass.items() if v > 0.0}
    return Distribution.from_sparse(n, mass)


def _row_collapse(row: Distribution, n: int, rng, params) -> Distribution:
    eps = params.get("eps", 1e-6)
    if not 0.0 < eps < 1.0:
        raise InvalidParams(f"collapse eps must be in (0,1), got {eps}")
    idx, val = row.items()
    chosen = int(idx[rng.integers(idx.size)])
    mass = {int(i): eps / idx.size for i in idx}
    mass[chosen] += 1.0 - eps
    return Distribution.from_sparse(n, mass)


def _row_bias(row: Distribution, n: int, rng, params) -> Distribution:
    target = params.get("target", 0)
    strength = params.get("strength", 0.55)
    if not 0.0 <= strength <= 1.0:
        raise InvalidParams(f"bias strength must be in [0,1], got {strength}")
    if not 0 <= target < n:
        raise InvalidParams(f"bias target {target} out of range")
    idx, val = row.items()
    mass = {int(i): (1.0 - strength) * float(v) for i, v in zip(idx, val)}
    mass[target] = mass.get(target, 0.0) + strength
    return Distribution.from_sparse(n, mass)


def _row_support_resample(row: Distribution, n: int, rng, params) -> Distribution:
    keep_prob = params.get("keep_prob", 0.3)
    if not 0.0 <= keep_prob <= 1.0:
        raise InvalidParams(f"keep probability must be in [0,1], got {keep_prob}")
    idx, _ = row.items()
    anchor = int(idx[rng.integers(idx.size)])
    chosen = rng.random(n) < keep_prob
    chosen[anchor] = True
    members = np.flatnonzero(chosen)
    w = 1.0 / members.size
    return Distribution.from_sparse(n, {int(i): w for i in members})


CORRUPTIONS: dict[str, Callable] = {
    "invert": _row_invert,
    "flip": _row_flip,
    "sharpen": _row_sharpen,
    "additive_noise": _row_additive,
    "dropout": _row_dropout,
    "swap": _row_swap,
    "collapse": _row_collapse,
    "bias": _row_bias,
    "support_resample": _row_support_resample,
}


def corrupt(chain: MarkovChain, kind: str, seed: int | None = None,
            **params) -> MarkovChain:
    """Apply a named row corruption to every row; deterministic under seed.

    Randomised kinds (additive_noise, dropout, collapse, support_resample)
    consume the generator row by row in state order, so a fixed seed fixes
    the corrupted matrix.
    """
    try:
        transform = CORRUPTIONS[kind]
    except KeyError:
        raise InvalidParams(
            f"unknown corruption {kind!r}, try: " + ", ".join(sorted(CORRUPTIONS))) from None
    rng = np.random.default_rng(seed)
    rows = tuple(transform(row, chain.n, rng, params) for row in chain.rows)
    return MarkovChain(rows, chain.init)


# -- exact oracles -----------------------------------------------------------

def exact_state_scores(env: MarkovChain, model: MarkovChain,
                       rule: ScoringRule) -> np.ndarray:
    """Per-state expected score of the model row under the environment row."""
    if env.n != model.n:
        raise ValueError("environment and model have different state counts")
    return np.array([expected_score(rule, model.rows[i], env.rows[i])
                     for i in range(env.n)])


def init_expected_score(env: MarkovChain, model: MarkovChain,
                        rule: ScoringRule) -> float:
    """Expected score of the model's init row under the environment's."""
    return expected_score(rule, model.init, env.init)


def trajectory_expected_scores(env: MarkovChain, model: MarkovChain,
                               rule: ScoringRule, states: np.ndarray) -> np.ndarray:
    """Exact per-step expected scores along a realised trajectory.

    Step 1 is the init-row term; step k >= 2 is the per-state score of the
    state observed at step k-1.  The running mean of the result is the true
    average expected score the average monitor estimates.
    """
    e = exact_state_scores(env, model, rule)
    out = np.empty(len(states))
    out[0] = init_expected_score(env, model, rule)
    if len(states) > 1:
        out[1:] = e[states[:-1]]
    return out


def trajectory_weighted_expected_scores(
        env: MarkovChain, model: MarkovChain, rule: ScoringRule,
        weights: WeightFunctions, states: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-step (alpha, exact expected weighted score) along a trajectory.

    The expected weighted score at step i uses the outcome weights of the
    history prefix; the cumulative ratio sum(alpha*score)/sum(alpha) is the
    true weighted average expected score.  Zero-alpha steps contribute
    (0, 0).
    """
    alphas = np.zeros(len(states))
    scores = np.zeros(len(states))
    history: list[int] = []
    for k, x in enumerate(states):
        z = tuple(history[-1:]) if weights.markovian else tuple(history)
        a = weights.alpha(z)
        alphas[k] = a
        if a > 0.0:
            w = weights.beta(z)
            wr = WeightedRule(rule, w)
            y = model.init if k == 0 else model.rows[history[-1]]
            y_star = env.init if k == 0 else env.rows[history[-1]]
            scores[k] = a * expected_score(wr, y, y_star)
        history.append(int(x))
    return alphas, scores


# -- toy scenarios -----------------------------------------------------------

# Loan-application chain state indices.
FAIR_S, FAIR_A, FAIR_B, FAIR_GA, FAIR_GB, FAIR_R, FAIR_D = range(7)


def fairness_chain() -> tuple[MarkovChain, MarkovChain, WeightFunctions]:
    """Loan-application scenario: environment, flipped model, A/B weights.

    States: S (applicant arrives), A/B (group), G_A/G_B (loan granted),
    R (repaid), D (defaulted); everything funnels back to S.  The model
    flips the S and G rows, so it is wrong about who applies and about
    repayment, but agrees with reality on the group rows A and B that the
    grant-rate fairness property reads.  The weights restrict monitoring to
    predictions made from A and B.
    """
    n = 7

    def rows(s_a, ga_r, gb_r):
        return (
            Distribution.from_sparse(n, {FAIR_A: s_a, FAIR_B: 1.0 - s_a}),
            Distribution.from_sparse(n, {FAIR_GA: 0.7, FAIR_S: 0.3}),
            Distribution.from_sparse(n, {FAIR_GB: 0.4, FAIR_S: 0.6}),
            Distribution.from_sparse(n, {FAIR_R: ga_r, FAIR_D: 1.0 - ga_r}),
            Distribution.from_sparse(n, {FAIR_R: gb_r, FAIR_D: 1.0 - gb_r}),
            point_mass(n, FAIR_S),
            point_mass(n, FAIR_S),
        )

    init = point_mass(n, FAIR_S)
    env = MarkovChain(rows(0.8, 0.3, 0.9), init)
    model = MarkovChain(rows(0.2, 0.7, 0.1), init)

    ones = WeightVector.ones(n)
    weights = state_weight_functions(
        lambda s: 1.0 if s in (FAIR_A, FAIR_B) else 0.0,
        lambda s: ones,
        c_alpha=1.0, c_beta=1.0)
    return env, model, weights


# Safe-component chain state indices (s1..s6 -> 0..5).
SAFE_STATES = tuple(range(6))
SAFE_COMPONENT = (2, 4, 5)  # s3, s5, s6

_SAFETY_DEFAULT_S6 = {2: 0.7, 4: 0.1, 1: 0.2}  # s3, s5, s2


def safety_chain(env_s6: dict[int, float] | None = None,
                 ) -> tuple[MarkovChain, MarkovChain, WeightFunctions]:
    """Safe-component scenario: environment, misaligned model, exit weights.

    The model believes states {s3, s5, s6} form a closed component and
    attributes 0.1 to each transition it cannot rule out; in reality s6
    escapes to s2 twice as often as the model claims.  ``env_s6`` sets the
    environment's s6 row over {s2, s3, s5} (indices 1, 2, 4); the default
    [s3: 0.7, s5: 0.1, s2: 0.2] is a configuration choice that concentrates
    the misalignment on the safety-critical escape edge.  The weights
    emphasise predictions made inside the component and transitions that
    leave it.
    """
    n = 6
    if env_s6 is None:
        env_s6 = _SAFETY_DEFAULT_S6
    if set(env_s6) - {1, 2, 4}:
        raise InvalidParams("env_s6 must be supported on {s2, s3, s5} (indices 1, 2, 4)")
    s6_env = Distribution.from_sparse(n, env_s6)  # validates the masses

    def base_rows():
        return [
            point_mass(n, 1),                                    # s1 -> s2
            Distribution.from_sparse(n, {2: 0.9, 3: 0.1}),       # s2 -> s3 | s4
            point_mass(n, 4),                                    # s3 -> s5
            point_mass(n, 0),                                    # s4 -> s1
            point_mass(n, 5),                                    # s5 -> s6
            None,                                                # s6 varies
        ]

    init = point_mass(n, 0)
    env_rows = base_rows()
    env_rows[5] = s6_env
    model_rows = base_rows()
    model_rows[5] = Distribution.from_sparse(n, {2: 0.8, 4: 0.1, 1: 0.1})

    env = MarkovChain(tuple(env_rows), init)
    model = MarkovChain(tuple(model_rows), init)

    inside = np.full(n, 0.05)
    leaving = np.full(n, 0.05)
    for s in range(n):
        if s not in SAFE_COMPONENT:
            leaving[s] = 1.0  # transition out of the component
    beta_in_component = WeightVector(leaving, cap=1.0)
    beta_elsewhere = WeightVector(inside, cap=1.0)

    weights = state_weight_functions(
        lambda s: 1.0 if s in SAFE_COMPONENT else 0.1,
        lambda s: beta_in_component if s in SAFE_COMPONENT else beta_elsewhere,
        c_alpha=1.0, c_beta=1.0)
    return env, model, weights


def bernoulli_pair(p_star: float, p_hat: float) -> tuple[MarkovChain, MarkovChain]:
    """Two-state iid coin: every row (and the init) is [1-p, p]."""
    for name, p in (("p_star", p_star), ("p_hat", p_hat)):
        if not 0.0 <= p <= 1.0:
            raise InvalidParams(f"{name} must be in [0,1], got {p}")

    def coin(p: float) -> MarkovChain:
        d = Distribution.from_dense([1.0 - p, p])
        return MarkovChain((d, d), d)

    return coin(p_star), coin(p_hat)
