"""Anytime-valid alignment monitoring for probabilistic models."""

from .confseq import MonitorCore, NoObservations, epsilon, g
from .dist import (Distribution, DistributionError, EmptySupport, IndexOutOfRange,
                   MassSumMismatch, NegativeMass, point_mass, uniform, uniform_over,
                   validate)
from .ingest import (ChainFormatError, load_chain, parse_structured, parse_tra,
                     write_structured, write_tra)
from .markov import (MarkovChain, Trajectory, avoid_bscc, bernoulli_pair, corrupt,
                     drive_monitor, exact_state_scores, fairness_chain, ref_black_box,
                     ref_expert, ref_gray_box, replay_monitor, safety_chain, simulate)
from .monitors import (AverageMonitor, Decision, DecisionKind, DifferentialMonitor,
                       Verdict, WeightedMonitor, WeightFunctions, first_decision,
                       state_weight_functions, unit_weights)
from .scoring import (BrierScore, ScoreBounds, ScoringRule, SphericalScore,
                      WeightVector, WeightedRule, expected_score, get_rule, reweight,
                      weighted_score)

__version__ = "0.1.0"

__all__ = [
    "AverageMonitor", "BrierScore", "ChainFormatError", "Decision", "DecisionKind",
    "DifferentialMonitor", "Distribution", "DistributionError", "EmptySupport",
    "IndexOutOfRange", "MarkovChain", "MassSumMismatch", "MonitorCore", "NegativeMass",
    "NoObservations", "ScoreBounds", "ScoringRule", "SphericalScore", "Trajectory",
    "Verdict", "WeightFunctions", "WeightVector", "WeightedMonitor", "WeightedRule",
    "avoid_bscc", "bernoulli_pair", "corrupt", "drive_monitor", "epsilon",
    "exact_state_scores", "expected_score", "fairness_chain", "first_decision", "g",
    "get_rule", "load_chain", "parse_structured", "parse_tra", "point_mass",
    "ref_black_box", "ref_expert", "ref_gray_box", "replay_monitor", "safety_chain",
    "simulate", "state_weight_functions", "uniform", "uniform_over", "unit_weights",
    "validate", "weighted_score", "write_structured", "write_tra",
]
