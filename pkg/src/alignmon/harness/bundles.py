"""Bundled environments and environment resolution.

Five benchmark chains ship as committed ``.tra`` files (a fair-die DTMC
plus four desk-scale stand-ins with protocol/routing/election/multiplexing
row profiles); the fairness, safety, and coin scenarios are built in code
because they carry weights or parameters.  Anything larger is ingested
from user-supplied ``.tra`` or structured files.
"""

from __future__ import annotations

from importlib import resources

from ..ingest import load_chain, parse_tra
from ..markov import MarkovChain

BUNDLED_CHAINS = ("die", "brp_small", "crowds_small", "leader_small", "nand_small")


def load_bundled(name: str) -> MarkovChain:
    if name not in BUNDLED_CHAINS:
        raise KeyError(f"unknown bundled chain {name!r}, "
                       f"available: {', '.join(BUNDLED_CHAINS)}")
    text = resources.files("alignmon").joinpath("chains", f"{name}.tra").read_text()
    return parse_tra(text)


def resolve_environment(source: str) -> MarkovChain:
    """A bundled chain name, or a path to a .tra / structured JSON file."""
    if source in BUNDLED_CHAINS:
        return load_bundled(source)
    return load_chain(source)
