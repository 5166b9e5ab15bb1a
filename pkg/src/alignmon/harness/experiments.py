"""Experiment runners: score sweeps, monitoring runs, decision tables,
coverage studies, and the fairness/safety comparisons.

Every runner is deterministic under its seed: independent runs draw their
generators from a spawned ``numpy.random.SeedSequence``, so records carry
run indices and aggregation is order-insensitive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dist import Distribution
from ..markov import (MarkovChain, avoid_bscc, corrupt, fairness_chain,
                      ref_black_box, ref_expert, ref_gray_box, replay_monitor,
                      safety_chain, simulate, trajectory_expected_scores)
from ..monitors import (AverageMonitor, Decision, DecisionKind,
                        DifferentialMonitor, Verdict, WeightedMonitor,
                        WeightFunctions)
from ..scoring import (BrierScore, ScoringRule, SphericalScore, WeightedRule,
                       expected_score, get_rule, weighted_score)
from .bundles import resolve_environment
from .config import ConfigError, ExperimentConfig


def run_seeds(seed: int, runs: int) -> list[np.random.Generator]:
    """One independent generator per run, derived from the master seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(runs)]


# -- discretised Gaussian and score sweeps ------------------------------------

def discretized_gaussian(n: int, mean: float, sd: float) -> Distribution:
    """Gaussian density evaluated at the integer grid 0..n-1, renormalised."""
    if sd <= 0.0:
        raise ConfigError(f"standard deviation must be positive, got {sd}")
    xs = np.arange(n, dtype=np.float64)
    dens = np.exp(-0.5 * ((xs - mean) / sd) ** 2)
    total = dens.sum()
    if total <= 0.0:
        raise ConfigError("gaussian mass underflowed to zero on the grid")
    return Distribution.from_dense(dens / total)


def run_sweep(cfg: ExperimentConfig) -> list[dict]:
    """Expected Brier and spherical score as one model parameter sweeps."""
    env = discretized_gaussian(cfg.gauss_n, cfg.gauss_mean, cfg.gauss_sd)
    brier, spherical = BrierScore(), SphericalScore()
    grid = np.linspace(cfg.sweep_lo, cfg.sweep_hi, cfg.sweep_points)
    rows = []
    for value in grid:
        if cfg.sweep_kind == "mean":
            model = discretized_gaussian(cfg.gauss_n, float(value), cfg.gauss_sd)
        elif cfg.sweep_kind == "sd":
            model = discretized_gaussian(cfg.gauss_n, cfg.gauss_mean, float(value))
        else:
            raise ConfigError(f"unknown sweep kind {cfg.sweep_kind!r}")
        rows.append({
            "parameter": float(value),
            "brier": expected_score(brier, model, env),
            "spherical": expected_score(spherical, model, env),
        })
    return rows


# -- scenario assembly ---------------------------------------------------------

REFERENCE_BUILDERS = {
    "environment": lambda env: env,
    "expert": ref_expert,
    "gray": ref_gray_box,
    "black": lambda env: ref_black_box(env.n),
}


def build_benchmark(cfg: ExperimentConfig) -> tuple[MarkovChain, MarkovChain, MarkovChain | None]:
    """(environment, model, reference) for a benchmark-chain scenario.

    The raw chain is loop-avoided first; the corruption (if any) applies to
    the avoided chain, which is also what the model predicts against.
    """
    env = avoid_bscc(resolve_environment(cfg.environment), cfg.avoid_rho)
    if cfg.corruption is not None:
        model = corrupt(env, cfg.corruption, seed=cfg.seed, **cfg.corruption_params)
    else:
        model = env
    reference = None
    if cfg.reference != "none":
        reference = REFERENCE_BUILDERS[cfg.reference](env)
    return env, model, reference


# -- monitoring runs -----------------------------------------------------------

def run_monitoring(cfg: ExperimentConfig) -> list[dict]:
    """One seeded monitoring run; one record per step.

    Alongside the monitor verdict, each record carries the exact running
    average expected score of the model and of the black/gray/environment
    reference predictors along the realised trajectory (the environment is
    known here, so the oracle is available).
    """
    env, model, reference = build_benchmark(cfg)
    rule = get_rule(cfg.rule)
    traj = simulate(env, cfg.steps - 1, cfg.seed)
    if cfg.scenario == "differential":
        if reference is None:
            raise ConfigError("differential monitoring needs a reference model")
        monitor = DifferentialMonitor(rule, cfg.delta)
        verdicts = replay_monitor(model, monitor, traj.states, reference)
    else:
        monitor = AverageMonitor(rule, cfg.delta)
        verdicts = replay_monitor(model, monitor, traj.states)

    steps = np.arange(1, len(traj.states) + 1, dtype=np.float64)
    lines = {"true_aes": model}
    for name, build in (("aes_environment", lambda e: e),
                        ("aes_gray", ref_gray_box),
                        ("aes_black", lambda e: ref_black_box(e.n))):
        lines[name] = build(env)
    running = {
        name: np.cumsum(trajectory_expected_scores(env, chain, rule, traj.states)) / steps
        for name, chain in lines.items()
    }
    records = []
    for k, v in enumerate(verdicts):
        rec = {"t": v.step, "est": v.estimate, "lo": v.lo, "hi": v.hi}
        for name in ("true_aes", "aes_environment", "aes_gray", "aes_black"):
            rec[name] = float(running[name][k])
        if cfg.scenario == "differential":
            rec["decision"] = monitor.decision.value.value
        records.append(rec)
    return records


# -- decision tables -----------------------------------------------------------

@dataclass(frozen=True)
class DecisionRecord:
    benchmark: str
    corruption: str
    reference: str
    rule: str
    run: int
    decision: str
    at_step: int | None


def decision_runs(env: MarkovChain, model: MarkovChain, reference: MarkovChain,
                  rule: ScoringRule, delta: float, runs: int, steps: int,
                  seed: int) -> list[Decision]:
    out = []
    for rng in run_seeds(seed, runs):
        monitor = DifferentialMonitor(rule, delta)
        traj = simulate(env, steps - 1, rng=rng)
        replay_monitor(model, monitor, traj.states, reference)
        out.append(monitor.decision)
    return out


def run_decision_table(cfg: ExperimentConfig,
                       benchmarks: tuple[str, ...] = ("die", "brp_small", "crowds_small",
                                                      "leader_small", "nand_small"),
                       corruptions: tuple[str, ...] = ("additive_noise", "invert"),
                       references: tuple[str, ...] = ("environment", "expert",
                                                      "gray", "black"),
                       ) -> tuple[list[DecisionRecord], list[dict]]:
    """Per-run decision records plus the per-cell mean/stddev summary.

    Undecided runs enter the aggregate with ``at_step = steps`` so that a
    fully undecided cell reads ``steps +/- 0``.
    """
    rule = get_rule(cfg.rule)
    records: list[DecisionRecord] = []
    summary: list[dict] = []
    for bench in benchmarks:
        env = avoid_bscc(resolve_environment(bench), cfg.avoid_rho)
        refs = {name: REFERENCE_BUILDERS[name](env) for name in references}
        for kind in corruptions:
            model = corrupt(env, kind, seed=cfg.seed, **cfg.corruption_params)
            for ref_name, reference in refs.items():
                cell_seed = (cfg.seed * 1_000_003 + hash((bench, kind, ref_name))) % 2**31
                decisions = decision_runs(env, model, reference, rule, cfg.delta,
                                          cfg.runs, cfg.steps, cell_seed)
                for run, d in enumerate(decisions):
                    records.append(DecisionRecord(bench, kind, ref_name, cfg.rule,
                                                  run, d.value.value, d.at_step))
                capped = [d.at_step if d.at_step is not None else cfg.steps
                          for d in decisions]
                kinds = {d.value for d in decisions}
                label = kinds.pop().value if len(kinds) == 1 else "mixed"
                summary.append({
                    "benchmark": bench, "corruption": kind, "reference": ref_name,
                    "rule": cfg.rule, "decision": label,
                    "mean_steps": float(np.mean(capped)),
                    "std_steps": float(np.std(capped, ddof=1)) if len(capped) > 1 else 0.0,
                    "runs": len(decisions),
                })
    return records, summary


# -- coverage studies ----------------------------------------------------------

def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """95% binomial interval for a violation count."""
    if n == 0:
        return 0.0, 1.0
    p = k / n
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class CoverageReport:
    label: str
    runs: int
    violations: int

    @property
    def rate(self) -> float:
        return self.violations / self.runs

    @property
    def ci95(self) -> tuple[float, float]:
        return wilson_interval(self.violations, self.runs)

    def as_record(self) -> dict:
        lo, hi = self.ci95
        return {"label": self.label, "runs": self.runs, "violations": self.violations,
                "rate": self.rate, "ci_lo": lo, "ci_hi": hi}


def _any_violation(verdicts: list[Verdict], truth: np.ndarray) -> bool:
    for v, target in zip(verdicts, truth):
        if not v.has_interval:
            continue
        if not (v.lo <= target <= v.hi):
            return True
    return False


def coverage_average(env: MarkovChain, model: MarkovChain, rule: ScoringRule,
                     delta: float, runs: int, steps: int, seed: int,
                     label: str = "average") -> CoverageReport:
    violations = 0
    for rng in run_seeds(seed, runs):
        traj = simulate(env, steps - 1, rng=rng)
        monitor = AverageMonitor(rule, delta)
        verdicts = replay_monitor(model, monitor, traj.states)
        per_step = trajectory_expected_scores(env, model, rule, traj.states)
        truth = np.cumsum(per_step) / np.arange(1, len(per_step) + 1)
        violations += _any_violation(verdicts, truth)
    return CoverageReport(label, runs, violations)


def coverage_differential(env: MarkovChain, model: MarkovChain,
                          reference: MarkovChain, rule: ScoringRule, delta: float,
                          runs: int, steps: int, seed: int,
                          label: str = "differential") -> CoverageReport:
    violations = 0
    for rng in run_seeds(seed, runs):
        traj = simulate(env, steps - 1, rng=rng)
        monitor = DifferentialMonitor(rule, delta)
        verdicts = replay_monitor(model, monitor, traj.states, reference)
        diff = (trajectory_expected_scores(env, model, rule, traj.states)
                - trajectory_expected_scores(env, reference, rule, traj.states))
        truth = np.cumsum(diff) / np.arange(1, len(diff) + 1)
        violations += _any_violation(verdicts, truth)
    return CoverageReport(label, runs, violations)


def _state_weight_tables(env: MarkovChain, predictor: MarkovChain,
                         rule: ScoringRule, weights: WeightFunctions,
                         ) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Per-last-state (alpha, alpha*expected-weighted-score) tables for
    markovian weights, plus the empty-history pair for the first step."""
    n = env.n
    alphas = np.empty(n)
    scores = np.empty(n)
    for s in range(n):
        a = weights.alpha((s,))
        alphas[s] = a
        if a > 0.0:
            wr = WeightedRule(rule, weights.beta((s,)))
            scores[s] = a * expected_score(wr, predictor.rows[s], env.rows[s])
        else:
            scores[s] = 0.0
    a0 = weights.alpha(())
    s0 = 0.0
    if a0 > 0.0:
        wr0 = WeightedRule(rule, weights.beta(()))
        s0 = a0 * expected_score(wr0, predictor.init, env.init)
    return alphas, scores, a0, s0


def weighted_truth_along(env: MarkovChain, predictor: MarkovChain,
                         rule: ScoringRule, weights: WeightFunctions,
                         states: np.ndarray) -> np.ndarray:
    """Exact weighted average expected score after each step (nan while the
    weighted time is still zero).  Markovian weights only."""
    if not weights.markovian:
        raise ConfigError("fast weighted truth needs markovian weights")
    alphas, scores, a0, s0 = _state_weight_tables(env, predictor, rule, weights)
    a_seq = np.concatenate([[a0], alphas[states[:-1]]])
    s_seq = np.concatenate([[s0], scores[states[:-1]]])
    t_alpha = np.cumsum(a_seq)
    with np.errstate(invalid="ignore", divide="ignore"):
        truth = np.where(t_alpha > 0.0, np.cumsum(s_seq) / t_alpha, np.nan)
    return truth


def coverage_weighted(env: MarkovChain, model: MarkovChain,
                      weights: WeightFunctions, rule: ScoringRule, delta: float,
                      runs: int, steps: int, seed: int,
                      label: str = "weighted") -> CoverageReport:
    violations = 0
    for rng in run_seeds(seed, runs):
        traj = simulate(env, steps - 1, rng=rng)
        monitor = WeightedMonitor(rule, delta, weights)
        verdicts = replay_monitor(model, monitor, traj.states)
        truth = weighted_truth_along(env, model, rule, weights, traj.states)
        clean = np.where(np.isnan(truth), 0.0, truth)
        bad = False
        for v, target, defined in zip(verdicts, clean, ~np.isnan(truth)):
            if v.has_interval and defined and not (v.lo <= target <= v.hi):
                bad = True
                break
        violations += bad
    return CoverageReport(label, runs, violations)


def run_coverage(cfg: ExperimentConfig) -> list[dict]:
    """The standard coverage study: iid coin for the average and differential
    monitors, the loan scenario for the weighted monitor."""
    from ..markov import bernoulli_pair
    rule = get_rule(cfg.rule)
    env, matched = bernoulli_pair(0.35, 0.35)
    _, off = bernoulli_pair(0.35, 0.6)
    reports = [
        coverage_average(env, matched, rule, cfg.delta, cfg.runs, cfg.steps,
                         cfg.seed, label="average p_hat=0.35"),
        coverage_average(env, off, rule, cfg.delta, cfg.runs, cfg.steps,
                         cfg.seed + 1, label="average p_hat=0.6"),
        coverage_differential(env, off, env, rule, cfg.delta, cfg.runs, cfg.steps,
                              cfg.seed + 2, label="differential p_hat=0.6 vs env"),
    ]
    fair_env, fair_model, fair_weights = fairness_chain()
    reports.append(coverage_weighted(fair_env, fair_model, fair_weights, rule,
                                     cfg.delta, cfg.runs, cfg.steps, cfg.seed + 3,
                                     label="weighted fairness"))
    return [r.as_record() for r in reports]


# -- weighted differential monitoring (fairness experiment) --------------------

class WeightedDifferentialMonitor:
    """Weighted score differences against a reference, with the decision
    semantics of the differential monitor.

    Harness-level composition used by the fairness experiment; the score is
    ``alpha * (weighted model score - weighted reference score)`` and time
    progresses by alpha.
    """

    kind = "weighted_differential"

    def __init__(self, rule: ScoringRule, delta: float, weights: WeightFunctions):
        from ..confseq import MonitorCore
        self.rule = rule
        self.weights = weights
        sigma = 2.0 * weights.c_alpha * weights.c_beta * rule.bounds.width
        self.core = MonitorCore(sigma=sigma, delta=delta)
        self._step = 0
        self._last: int | None = None
        self._decision: Decision | None = None
        if not weights.markovian:
            raise ConfigError("weighted differential monitoring needs markovian weights")

    @property
    def decision(self) -> Decision:
        return self._decision if self._decision is not None else Decision.undecided()

    def update(self, y_hat: Distribution, y_ref: Distribution, x: int) -> Verdict:
        z = (self._last,) if self._last is not None else ()
        a = self.weights.alpha(z)
        if a == 0.0:
            s = 0.0
        else:
            w = self.weights.beta(z)
            s = a * (weighted_score(self.rule, w, y_hat, x)
                     - weighted_score(self.rule, w, y_ref, x))
        self.core.update(s, weight=a)
        self._last = x
        self._step += 1
        if self.core.t_eff == 0.0:
            return Verdict.no_information(self._step)
        lo, hi = self.core.interval()
        if self._decision is None:
            if hi < 0.0:
                self._decision = Decision(DecisionKind.MODEL_BETTER, self._step)
            elif lo > 0.0:
                self._decision = Decision(DecisionKind.REFERENCE_BETTER, self._step)
        return Verdict(self._step, self.core.estimate, lo, hi)


def fairness_decision_experiment(delta: float = 0.05, runs: int = 5,
                                 steps: int = 1000, seed: int = 0,
                                 rule: ScoringRule | None = None) -> list[dict]:
    """Weighted vs unweighted differential decisions on the loan scenario.

    Both monitors watch the flipped model against the environment as the
    reference, on the same trajectories.  The weights blind the weighted
    monitor to everything but the group states, where model and environment
    agree, so it should stay undecided while the unweighted monitor learns
    the reference is better.
    """
    rule = rule or BrierScore()
    env, model, weights = fairness_chain()
    out = []
    for run, rng in enumerate(run_seeds(seed, runs)):
        traj = simulate(env, steps - 1, rng=rng)
        wmon = WeightedDifferentialMonitor(rule, delta, weights)
        umon = DifferentialMonitor(rule, delta)
        replay_monitor(model, wmon, traj.states, env)
        replay_monitor(model, umon, traj.states, env)
        out.append({
            "run": run,
            "weighted_decision": wmon.decision.value.value,
            "weighted_at": wmon.decision.at_step,
            "unweighted_decision": umon.decision.value.value,
            "unweighted_at": umon.decision.at_step,
        })
    return out


def first_exit(verdicts: list[Verdict], truth: np.ndarray) -> int | None:
    """First step whose interval no longer contains the truth line."""
    for v, target in zip(verdicts, truth):
        if not v.has_interval or np.isnan(target):
            continue
        if not (v.lo <= target <= v.hi):
            return v.step
    return None


def safety_exit_experiment(delta: float = 0.05, runs: int = 5,
                           steps: int = 20_000, seed: int = 0,
                           rule: ScoringRule | None = None,
                           env_s6: dict[int, float] | None = None) -> list[dict]:
    """Weighted vs unweighted detection speed on the safe-component scenario.

    Each monitor watches the misaligned model; the truth line is the
    environment's own (weighted) average expected score along the same
    trajectory.  The step at which that line leaves the monitor interval is
    the moment the monitor provably separates model from reality.
    """
    rule = rule or BrierScore()
    env, model, weights = safety_chain(env_s6)
    out = []
    for run, rng in enumerate(run_seeds(seed, runs)):
        traj = simulate(env, steps - 1, rng=rng)
        wmon = WeightedMonitor(rule, delta, weights)
        w_verdicts = replay_monitor(model, wmon, traj.states)
        w_truth = weighted_truth_along(env, env, rule, weights, traj.states)
        umon = AverageMonitor(rule, delta)
        u_verdicts = replay_monitor(model, umon, traj.states)
        per_step = trajectory_expected_scores(env, env, rule, traj.states)
        u_truth = np.cumsum(per_step) / np.arange(1, len(per_step) + 1)
        out.append({
            "run": run,
            "weighted_exit": first_exit(w_verdicts, w_truth),
            "unweighted_exit": first_exit(u_verdicts, u_truth),
        })
    return out
