"""Regenerate the bundled benchmark chains under src/alignmon/chains/.

The die chain is the classic seven-coin-flip die DTMC.  The other four are
desk-scale stand-ins whose row profiles (support size, concentration,
state count) are chosen so that the differential-monitor decision
directions against the four reference models reproduce the full-size
benchmark behaviour.  Run this script from the repository root; it
overwrites the .tra files in place.
"""

from __future__ import annotations

import os

import numpy as np

from alignmon.dist import Distribution, point_mass
from alignmon.ingest import write_tra
from alignmon.markov import MarkovChain

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "src", "alignmon", "chains")


def die_chain() -> MarkovChain:
    """Simulating a fair die with fair coin flips: 7 flip states, 6 faces."""
    n = 13
    rows = {
        0: {1: 0.5, 2: 0.5},
        1: {3: 0.5, 4: 0.5},
        2: {5: 0.5, 6: 0.5},
        3: {1: 0.5, 7: 0.5},
        4: {8: 0.5, 9: 0.5},
        5: {10: 0.5, 11: 0.5},
        6: {2: 0.5, 12: 0.5},
    }
    for face in range(7, 13):
        rows[face] = {face: 1.0}
    dists = tuple(Distribution.from_sparse(n, rows[i]) for i in range(n))
    return MarkovChain(dists, point_mass(n, 0))


def brp_like() -> MarkovChain:
    """Retransmission-protocol profile: long lanes of heavily skewed rows."""
    n = 100
    rows = []
    for i in range(98):
        rows.append(Distribution.from_sparse(n, {(i + 1) % 98: 0.98, 98: 0.02}))
    rows.append(Distribution.from_sparse(n, {0: 0.9, 99: 0.1}))   # backoff
    rows.append(point_mass(n, 0))                                  # abort, restart
    return MarkovChain(tuple(rows), point_mass(n, 0))


def strided_uniform(n: int, strides: tuple[int, ...]) -> MarkovChain:
    rows = []
    w = 1.0 / len(strides)
    for i in range(n):
        rows.append(Distribution.from_sparse(
            n, {(i + s) % n: w for s in strides}))
    return MarkovChain(tuple(rows), point_mass(n, 0))


def crowds_like() -> MarkovChain:
    """Routing profile: every state forwards uniformly to three peers."""
    return strided_uniform(250, (1, 82, 165))


def leader_like() -> MarkovChain:
    """Election profile: rounds branch over three or two candidates."""
    n = 280
    rng = np.random.default_rng(20240601)
    rows = []
    for i in range(n):
        if rng.random() < 0.3:
            targets = ((i + 1) % n, (i + 139) % n)
        else:
            targets = ((i + 1) % n, (i + 93) % n, (i + 187) % n)
        w = 1.0 / len(targets)
        rows.append(Distribution.from_sparse(n, {t: w for t in set(targets)}))
    return MarkovChain(tuple(rows), point_mass(n, 0))


def nand_like() -> MarkovChain:
    """Multiplexing profile: layered states branch over three or four gates."""
    n = 240
    rng = np.random.default_rng(20240602)
    rows = []
    for i in range(n):
        k = 4 if rng.random() < 0.4 else 3
        targets = {(i + 1) % n}
        while len(targets) < k:
            targets.add(int((i + rng.integers(2, n)) % n))
        w = 1.0 / len(targets)
        rows.append(Distribution.from_sparse(n, {t: w for t in sorted(targets)}))
    return MarkovChain(tuple(rows), point_mass(n, 0))


CHAINS = {
    "die": die_chain,
    "brp_small": brp_like,
    "crowds_small": crowds_like,
    "leader_small": leader_like,
    "nand_small": nand_like,
}


def main() -> None:
    os.makedirs(OUT_DIR, exist_ok=True)
    for name, build in CHAINS.items():
        chain = build()
        path = os.path.join(OUT_DIR, f"{name}.tra")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(write_tra(chain))
        print(f"wrote {path}: {chain.n} states")


if __name__ == "__main__":
    main()
