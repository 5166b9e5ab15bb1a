import numpy as np
import pytest

from alignmon.dist import Distribution, point_mass
from alignmon.monitors import (AverageMonitor, DecisionKind, DifferentialMonitor,
                               Verdict, WeightedMonitor, first_decision,
                               state_weight_functions, unit_weights)
from alignmon.scoring import BrierScore, SphericalScore, WeightVector


def random_stream(rng, n, length):
    for _ in range(length):
        raw = rng.random(n)
        y = Distribution.from_dense(raw / raw.sum())
        yield y, int(rng.integers(n))


class TestAverageMonitor:
    def test_two_step_trace(self):
        m = AverageMonitor(BrierScore(), delta=0.05)
        y = Distribution.from_dense([0.5, 0.5])
        v1 = m.update(y, 0)
        v2 = m.update(y, 1)
        assert v1.step == 1 and v2.step == 2
        assert v2.estimate == 0.5
        assert m.core.var_process == 1.25
        assert v2.lo < 0.5 < v2.hi

    def test_perfect_forecaster_shrinks_to_zero(self):
        m = AverageMonitor(BrierScore(), delta=0.05)
        widths = []
        for x in range(500):
            y = point_mass(4, x % 4)
            v = m.update(y, x % 4)
            assert v.estimate == 0.0
            widths.append(v.hi - v.lo)
        assert widths[-1] < widths[10] < widths[0]

    def test_estimate_stays_within_bounds(self):
        rng = np.random.default_rng(13)
        for rule in (BrierScore(), SphericalScore()):
            m = AverageMonitor(rule, delta=0.1)
            for y, x in random_stream(rng, 6, 400):
                m.update(y, x)
                assert rule.bounds.a - 1e-12 <= m.core.estimate <= rule.bounds.b + 1e-12


class TestDifferentialMonitor:
    def test_identical_forecasters_stay_undecided(self):
        rng = np.random.default_rng(19)
        m = DifferentialMonitor(BrierScore(), delta=0.05)
        for y, x in random_stream(rng, 4, 300):
            v = m.update(y, y, x)
            assert v.estimate == 0.0
            assert v.lo < 0.0 < v.hi
        assert m.decision.value is DecisionKind.UNDECIDED

    def test_antisymmetry_is_exact(self):
        rng = np.random.default_rng(29)
        a = DifferentialMonitor(BrierScore(), delta=0.05)
        b = DifferentialMonitor(BrierScore(), delta=0.05)
        stream = list(random_stream(rng, 5, 200))
        refs = [y for y, _ in random_stream(rng, 5, 200)]
        width = BrierScore().bounds.width
        for (y, x), yr in zip(stream, refs):
            va = a.update(y, yr, x)
            vb = b.update(yr, y, x)
            assert vb.estimate == -va.estimate
            assert vb.lo == -va.hi and vb.hi == -va.lo
            assert abs(va.estimate) <= width + 1e-12
        assert a.core.var_process == b.core.var_process

    def test_sticky_decision(self):
        m = DifferentialMonitor(BrierScore(), delta=0.2)
        good = point_mass(2, 0)
        bad = point_mass(2, 1)
        # model always right, reference always wrong: decide MODEL_BETTER
        decided_at = None
        for t in range(2000):
            m.update(good, bad, 0)
            if m.decision.value is not DecisionKind.UNDECIDED:
                decided_at = m.decision.at_step
                break
        assert m.decision.value is DecisionKind.MODEL_BETTER
        assert decided_at is not None
        # keep feeding; the decision must not move
        for _ in range(50):
            m.update(good, bad, 0)
        assert m.decision.at_step == decided_at

    def test_first_decision_on_stream(self):
        verdicts = [Verdict(1, 0.1, -0.5, 0.7), Verdict(2, 0.2, 0.01, 0.4),
                    Verdict(3, 0.2, 0.05, 0.4)]
        d = first_decision(verdicts)
        assert d.value is DecisionKind.REFERENCE_BETTER and d.at_step == 2
        assert first_decision([Verdict(1, 0.0, -1.0, 1.0)]).value is DecisionKind.UNDECIDED


def ones_beta(n):
    ones = WeightVector.ones(n)
    return lambda s: ones


class TestWeightedMonitor:
    def test_unit_weights_match_average_bit_for_bit(self):
        rng = np.random.default_rng(31)
        n = 5
        avg = AverageMonitor(BrierScore(), delta=0.05)
        wgt = WeightedMonitor(BrierScore(), delta=0.05, weights=unit_weights(n))
        for y, x in random_stream(rng, n, 500):
            va = avg.update(y, x)
            vw = wgt.update(y, x)
            assert va == vw  # dataclass equality: step, estimate, lo, hi

    def test_zero_weight_steps_freeze_state(self):
        n = 3
        weights = state_weight_functions(
            lambda s: 1.0 if s == 1 else 0.0, ones_beta(n), 1.0, 1.0)
        m = WeightedMonitor(BrierScore(), delta=0.1, weights=weights)
        y = Distribution.from_dense([0.2, 0.3, 0.5])
        v1 = m.update(y, 0)          # empty history: alpha=0
        assert not v1.has_interval and v1.estimate is None
        m.update(y, 2)               # history (0,): alpha=0
        assert m.core.t_eff == 0.0
        m.update(y, 0)               # history (2,): alpha=0 ... observe 0
        m.update(y, 1)               # history (0,): alpha=0, now last state is 1
        snapshot = (m.core.t_eff, m.core.estimate, m.core.var_process)
        assert snapshot == (0.0, 0.0, 1.0)
        v = m.update(y, 2)           # history (1,): alpha=1, first real step
        assert v.has_interval
        assert m.core.t_eff == 1.0

    def test_markovian_memory_stays_constant(self):
        rng = np.random.default_rng(37)
        n = 4
        weights = state_weight_functions(lambda s: 1.0, ones_beta(n), 1.0, 1.0)
        m = WeightedMonitor(BrierScore(), delta=0.1, weights=weights)
        for y, x in random_stream(rng, n, 200):
            m.update(y, x)
            assert m.history_length <= 1

    def test_full_history_grows_one_per_step(self):
        rng = np.random.default_rng(41)
        n = 4
        ones = WeightVector.ones(n)
        from alignmon.monitors import WeightFunctions
        weights = WeightFunctions(lambda z: 1.0, lambda z: ones, 1.0, 1.0,
                                  markovian=False)
        m = WeightedMonitor(BrierScore(), delta=0.1, weights=weights)
        for k, (y, x) in enumerate(random_stream(rng, n, 100), start=1):
            m.update(y, x)
            assert m.history_length == k

    def test_alpha_cap_enforced(self):
        n = 2
        weights = state_weight_functions(lambda s: 1.5, ones_beta(n), 1.0, 1.0)
        m = WeightedMonitor(BrierScore(), delta=0.1, weights=weights)
        with pytest.raises(ValueError):
            m.update(point_mass(n, 0), 0)

    def test_sigma_scales_with_caps(self):
        n = 2
        w = state_weight_functions(lambda s: 0.5, ones_beta(n), 0.5, 1.0)
        m = WeightedMonitor(BrierScore(), delta=0.1, weights=w)
        assert m.core.sigma == 0.5 * 1.0 * 2.0
