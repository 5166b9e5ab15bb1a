"""Acceptance suite: one test per exit criterion, each with a runtime budget.

Every expected value is either computed by an independent oracle inside the
test or asserted at the tolerance stated with the criterion.  The conftest
hook prints one PASS/FAIL line per criterion after the run.
"""

import math
import time

import numpy as np
from alignmon.confseq import MonitorCore
from alignmon.dist import Distribution, validate
from alignmon.harness.bench import (scoring_floor_ns, update_floor_ns,
                                    update_window_times)
from alignmon.harness.bundles import load_bundled
from alignmon.harness.config import ExperimentConfig
from alignmon.harness.experiments import (coverage_average,
                                          coverage_differential,
                                          coverage_weighted,
                                          fairness_decision_experiment,
                                          run_decision_table, run_sweep,
                                          safety_exit_experiment)
from alignmon.ingest import parse_tra, write_tra
from alignmon.markov import (CORRUPTIONS, avoid_bscc, bernoulli_pair, corrupt,
                             fairness_chain)
from alignmon.monitors import (AverageMonitor, DifferentialMonitor,
                               WeightedMonitor, state_weight_functions,
                               unit_weights)
from alignmon.scoring import (BrierScore, SphericalScore, WeightVector,
                              expected_score)


def random_dist(rng, n, full=False):
    raw = rng.random(n) + (0.02 if full else 0.0)
    if not full:
        mask = rng.random(n) < 0.7
        if not mask.any():
            mask[int(rng.integers(n))] = True
        raw = raw * mask
        if raw.sum() == 0:
            raw[int(rng.integers(n))] = 1.0
    return Distribution.from_dense(raw / raw.sum())


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds
        self.t0 = time.time()

    def check(self):
        elapsed = time.time() - self.t0
        assert elapsed < self.seconds, f"runtime {elapsed:.1f}s over {self.seconds}s budget"


def test_criterion_1_propriety():
    """criterion 1: propriety of Brier and spherical over 1000 random pairs (<5s)"""
    budget = Budget(5.0)
    rng = np.random.default_rng(2024_01)
    for rule in (BrierScore(), SphericalScore()):
        for _ in range(1000):
            n = int(rng.integers(2, 17))
            y_star = random_dist(rng, n)
            y_hat = random_dist(rng, n)
            truth = expected_score(rule, y_star, y_star)
            other = expected_score(rule, y_hat, y_star)
            assert truth <= other + 1e-12
    budget.check()


def test_criterion_2_oracle_agreement():
    """criterion 2: Monte Carlo mean of 1e5 scores matches the exact oracle (<30s)"""
    budget = Budget(30.0)
    rng = np.random.default_rng(2024_02)
    rules = [BrierScore(), SphericalScore()]
    for cfg_idx in range(20):
        rule = rules[cfg_idx % 2]
        n = int(rng.integers(2, 50))
        y_hat = random_dist(rng, n)
        y_star = random_dist(rng, n, full=True)
        exact = expected_score(rule, y_hat, y_star)
        xs = rng.choice(n, size=100_000, p=y_star.as_dense())
        samples = rule.score_many(y_hat, xs)
        se = samples.std(ddof=1) / math.sqrt(samples.size)
        assert abs(samples.mean() - exact) <= 3 * se + 1e-12, f"config {cfg_idx}"
    budget.check()


def test_criterion_3_coverage():
    """criterion 3: any-step coverage of the exact target stays within delta (<2min)"""
    budget = Budget(120.0)
    delta, runs, steps = 0.1, 300, 1000
    rule = BrierScore()
    env, matched = bernoulli_pair(0.35, 0.35)
    _, off = bernoulli_pair(0.35, 0.6)
    reports = [
        coverage_average(env, matched, rule, delta, runs, steps, seed=31),
        coverage_average(env, off, rule, delta, runs, steps, seed=32),
        coverage_differential(env, off, env, rule, delta, runs, steps, seed=33),
    ]
    fair_env, fair_model, fair_weights = fairness_chain()
    reports.append(coverage_weighted(fair_env, fair_model, fair_weights, rule,
                                     delta, runs, steps, seed=34))
    for report in reports:
        assert report.rate <= delta, f"{report.label}: rate {report.rate}"
    budget.check()


def test_criterion_4_hand_trace():
    """criterion 4: two-step trace reproduced bit-for-bit vs the documented arithmetic"""
    # independent transcription of the per-step monitor arithmetic
    def oracle_steps(scores, delta, a, b):
        t, e_hat, n_var = 0, 0.0, 1.0
        sigma = b - a
        out = []
        for s in scores:
            t += 1
            n_var = max(1.0, n_var + (s - e_hat) ** 2)
            e_hat = ((t - 1) * e_hat + s) / t
            gv = (2.0 * math.log(math.pi * math.log(max(n_var, math.e)) / math.sqrt(6.0))
                  + math.log(2.0 / delta))
            eps = (math.sqrt(2.13 * n_var * gv + 1.76 * sigma ** 2 * gv ** 2)
                   + 1.33 * sigma * gv) / t
            out.append((e_hat, n_var, eps))
        return out

    y = Distribution.from_dense([0.5, 0.5])
    monitor = AverageMonitor(BrierScore(), delta=0.05)
    v1 = monitor.update(y, 0)   # Brier score 0.5
    v2 = monitor.update(y, 1)   # Brier score 0.5
    expected = oracle_steps([0.5, 0.5], 0.05, 0.0, 2.0)

    (e1, n1, eps1), (e2, n2, eps2) = expected
    assert (v1.estimate, v1.lo, v1.hi) == (e1, e1 - eps1, e1 + eps1)
    assert (v2.estimate, v2.lo, v2.hi) == (e2, e2 - eps2, e2 + eps2)
    assert v2.estimate == 0.5
    assert monitor.core.var_process == 1.25 == n2
    # anchor: the first-step radius is about 22.64 (the quoted value uses the
    # pre-update variance process; the documented update order gives 22.736)
    assert abs(eps1 - 22.64) < 0.15


def test_criterion_5_decision_table():
    """criterion 5: decision directions and times match the reference table (<1min)"""
    budget = Budget(60.0)
    cfg = ExperimentConfig(scenario="differential", delta=0.05, runs=5,
                           steps=1000, seed=0).validate()
    records, summary = run_decision_table(
        cfg, benchmarks=("die",), corruptions=("invert",),
        references=("environment",))
    assert all(r.decision == "bot" for r in records), "die/invert must be bot in all runs"
    die_cell = summary[0]
    assert die_cell["decision"] == "bot"
    assert die_cell["mean_steps"] <= 150.0, f"mean {die_cell['mean_steps']}"

    records, summary = run_decision_table(
        cfg, benchmarks=("brp_small",), corruptions=("additive_noise",),
        references=("gray",))
    brp_cell = summary[0]
    assert brp_cell["decision"] == "top", "brp/additive vs gray must favour the model"
    assert brp_cell["mean_steps"] <= 600.0, f"mean {brp_cell['mean_steps']}"
    budget.check()


def test_criterion_6_sweep_shape():
    """criterion 6: score sweep attains its minimum at the matched mean (<5s)"""
    budget = Budget(5.0)
    cfg = ExperimentConfig(scenario="sweep", sweep_kind="mean", sweep_lo=30,
                           sweep_hi=70, sweep_points=41).validate()
    rows = run_sweep(cfg)
    by_param = {r["parameter"]: r for r in rows}
    assert min(rows, key=lambda r: r["brier"])["parameter"] == 50.0
    assert min(rows, key=lambda r: r["spherical"])["parameter"] == 50.0
    for d in range(1, 21):
        assert abs(by_param[50.0 - d]["brier"] - by_param[50.0 + d]["brier"]) < 1e-9
    budget.check()


def test_criterion_7_complexity():
    """criterion 7: constant-time core update, at-most-linear scoring, O(1) memory (<2min)"""
    budget = Budget(120.0)
    # update cost independent of the step count
    win = update_window_times(total_steps=10_000, window=100, at=100, repeats=7)
    assert win["ratio"] <= 2.0 and win["ratio"] >= 0.5, win

    # update cost independent of the support size
    uf = update_floor_ns((10, 1_000_000))
    up_ratio = uf[1_000_000] / uf[10]
    assert 0.5 <= up_ratio <= 2.0, f"update ratio {up_ratio}"

    # scoring grows at most linearly (with slack) per decade
    sf = scoring_floor_ns((10, 100, 1000, 10_000, 100_000, 1_000_000),
                          iters=60, repeats=3, cold=True)
    sizes = sorted(sf)
    for a, b in zip(sizes, sizes[1:]):
        ratio = sf[b] / sf[a]
        assert ratio <= 20.0, f"scoring {a}->{b} grew {ratio:.1f}x"

    # markovian weighted monitor holds no per-step history
    n = 6
    ones = WeightVector.ones(n)
    weights = state_weight_functions(lambda s: 1.0, lambda s: ones, 1.0, 1.0)
    monitor = WeightedMonitor(BrierScore(), 0.05, weights)
    rng = np.random.default_rng(7)
    y = Distribution.from_dense(np.full(n, 1 / n))
    for _ in range(10_000):
        monitor.update(y, int(rng.integers(n)))
    assert monitor.history_length <= 1
    budget.check()


def test_criterion_8_weighted_vs_average():
    """criterion 8: task weights separate what the plain monitor cannot, and faster (<1min)"""
    budget = Budget(60.0)
    fair = fairness_decision_experiment(delta=0.05, runs=5, steps=1000, seed=0)
    undecided = sum(1 for r in fair if r["weighted_decision"] == "undecided")
    decided_bot = sum(1 for r in fair if r["unweighted_decision"] == "bot")
    assert undecided >= 4, f"weighted undecided in only {undecided}/5 runs"
    assert decided_bot >= 4, f"unweighted decided bot in only {decided_bot}/5 runs"

    safety = safety_exit_experiment(delta=0.05, runs=5, steps=25_000, seed=0)
    def earlier(r):
        w, u = r["weighted_exit"], r["unweighted_exit"]
        return w is not None and (u is None or w < u)
    wins = sum(1 for r in safety if earlier(r))
    assert wins >= 3, f"weighted exit earlier in only {wins}/5 runs: {safety}"
    budget.check()


def test_criterion_9_invariants():
    """criterion 9: antisymmetry, unit-weight equivalence, core and format invariants (<30s)"""
    budget = Budget(30.0)
    rng = np.random.default_rng(99)

    # differential antisymmetry, exact
    a = DifferentialMonitor(BrierScore(), 0.05)
    b = DifferentialMonitor(BrierScore(), 0.05)
    for _ in range(300):
        y1, y2 = random_dist(rng, 5, full=True), random_dist(rng, 5, full=True)
        x = int(rng.integers(5))
        va = a.update(y1, y2, x)
        vb = b.update(y2, y1, x)
        assert vb.estimate == -va.estimate and vb.lo == -va.hi and vb.hi == -va.lo

    # weighted monitor with unit weights == average monitor, bit for bit
    avg = AverageMonitor(BrierScore(), 0.05)
    wgt = WeightedMonitor(BrierScore(), 0.05, unit_weights(4))
    for _ in range(500):
        y = random_dist(rng, 4, full=True)
        x = int(rng.integers(4))
        assert avg.update(y, x) == wgt.update(y, x)

    # variance process clamped and monotone; estimate within score bounds
    core = MonitorCore(sigma=2.0, delta=0.1)
    prev = core.var_process
    for _ in range(2000):
        core.update(float(rng.random() * 2.0))
        assert core.var_process >= max(1.0, prev)
        assert 0.0 <= core.estimate <= 2.0
        prev = core.var_process

    # every corruption of every bundled chain stays row-stochastic
    env = avoid_bscc(load_bundled("die"), 0.01)
    for kind in CORRUPTIONS:
        out = corrupt(env, kind, seed=5)
        for row in out.rows:
            validate(row)

    # transition-format round trip within 1e-12
    for name in ("die", "brp_small"):
        chain = load_bundled(name)
        back = parse_tra(write_tra(chain))
        for r1, r2 in zip(chain.rows, back.rows):
            i1, v1 = r1.items()
            i2, v2 = r2.items()
            assert np.array_equal(i1, i2)
            assert np.allclose(v1, v2, atol=1e-12, rtol=0.0)
    budget.check()
