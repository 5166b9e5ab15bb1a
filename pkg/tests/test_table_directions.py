"""Decision-direction reproduction over the full bundled benchmark grid.

For each bundled chain, corruption in {additive_noise, invert}, and
reference in {environment, expert, gray, black}, the differential monitor's
decision direction must match the reference pattern (the magnitudes carry
tolerances in the acceptance suite; here only the directions are pinned).
"""

import pytest

from alignmon.harness.config import ExperimentConfig
from alignmon.harness.experiments import run_decision_table

# (environment, expert, gray, black)
EXPECTED_DIRECTIONS = {
    ("die", "invert"): ("bot", "bot", "bot", "bot"),
    ("die", "additive_noise"): ("undecided", "top", "top", "top"),
    ("brp_small", "invert"): ("bot", "bot", "bot", "bot"),
    ("brp_small", "additive_noise"): ("bot", "bot", "top", "top"),
    ("crowds_small", "invert"): ("bot", "bot", "bot", "bot"),
    ("crowds_small", "additive_noise"): ("bot", "bot", "bot", "top"),
    ("leader_small", "invert"): ("bot", "bot", "bot", "bot"),
    ("leader_small", "additive_noise"): ("bot", "bot", "bot", "top"),
    ("nand_small", "invert"): ("bot", "bot", "bot", "bot"),
    ("nand_small", "additive_noise"): ("bot", "bot", "bot", "top"),
}

REFERENCE_ORDER = ("environment", "expert", "gray", "black")


@pytest.mark.parametrize("benchmark",
                         ("die", "brp_small", "crowds_small", "leader_small",
                          "nand_small"))
def test_directions_match_reference_pattern(benchmark):
    cfg = ExperimentConfig(scenario="differential", delta=0.05, runs=5,
                           steps=1000, seed=0).validate()
    _, summary = run_decision_table(cfg, benchmarks=(benchmark,),
                                    corruptions=("additive_noise", "invert"),
                                    references=REFERENCE_ORDER)
    got = {}
    for cell in summary:
        got.setdefault((cell["benchmark"], cell["corruption"]), {})[
            cell["reference"]] = cell["decision"]
    for corruption in ("additive_noise", "invert"):
        want = EXPECTED_DIRECTIONS[(benchmark, corruption)]
        have = tuple(got[(benchmark, corruption)][ref] for ref in REFERENCE_ORDER)
        assert have == want, f"{benchmark}/{corruption}: {have} != {want}"


def test_gray_win_implies_black_win():
    # whenever the model beats the gray box it must also beat the black box
    cfg = ExperimentConfig(scenario="differential", delta=0.05, runs=5,
                           steps=1000, seed=0).validate()
    _, summary = run_decision_table(cfg)
    cells = {(c["benchmark"], c["corruption"], c["reference"]): c["decision"]
             for c in summary}
    for (bench, corr, ref), decision in cells.items():
        if ref == "gray" and decision == "top":
            assert cells[(bench, corr, "black")] == "top", (bench, corr)
