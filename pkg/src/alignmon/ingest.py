"""Reading and writing transition matrices.

Two formats are supported:

* the explicit DTMC transition format used by probabilistic model checkers
  (``.tra``): a header line ``n_states n_transitions`` followed by one
  ``src dst prob`` triple per line, ``#`` comments allowed;
* a self-describing JSON document (``chain format v1``) that additionally
  carries the initial distribution and optional state names.

Validation is strict at this boundary: every parse failure carries a
machine-readable ``code`` and, where meaningful, a 1-based line number.
"""

from __future__ import annotations

import json
from typing import Any

from .dist import Distribution, point_mass
from .markov import MarkovChain

#: Row sums within this tolerance of 1 are renormalised exactly; anything
#: further off is rejected as a non-stochastic row.
ROW_SUM_TOL = 1e-6

STRUCTURED_FORMAT = "alignmon-chain"
STRUCTURED_VERSION = 1


class ChainFormatError(ValueError):
    """Base error for chain (de)serialisation; carries code and line."""

    def __init__(self, code: str, message: str, line: int | None = None):
        self.code = code
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")


class TraSyntaxError(ChainFormatError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__("syntax", message, line)


class TraIndexError(ChainFormatError):
    def __init__(self, index: int, n: int, line: int):
        self.index = index
        super().__init__("index_out_of_range",
                         f"state index {index} out of range for {n} states", line)


class NonStochasticRow(ChainFormatError):
    def __init__(self, state: int, total: float):
        self.state = state
        self.total = total
        super().__init__("non_stochastic_row",
                         f"row {state} sums to {total!r}, expected 1 +/- {ROW_SUM_TOL}")


class MissingRow(ChainFormatError):
    def __init__(self, state: int):
        self.state = state
        super().__init__("missing_row",
                         f"state {state} has no outgoing transitions "
                         "(pass complete_absorbing=True to self-loop it)")


def parse_tra(text: str, *, init_state: int = 0,
              complete_absorbing: bool = False) -> MarkovChain:
    """Parse explicit transition format into a chain.

    The format carries no initial distribution; a point mass on
    ``init_state`` (default 0) is attached.  Rows whose sum is within
    ``ROW_SUM_TOL`` of 1 are renormalised exactly; rows further off are
    rejected.  States without outgoing transitions are an error unless
    ``complete_absorbing`` turns them into self-loops.
    """
    n_states: int | None = None
    declared_transitions = 0
    triples: list[tuple[int, int, float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if n_states is None:
            if len(parts) != 2:
                raise TraSyntaxError("header must be 'n_states n_transitions'", lineno)
            try:
                n_states = int(parts[0])
                declared_transitions = int(parts[1])
            except ValueError:
                raise TraSyntaxError("header must hold two integers", lineno) from None
            if n_states <= 0:
                raise TraSyntaxError(f"state count must be positive, got {n_states}", lineno)
            continue
        if len(parts) != 3:
            raise TraSyntaxError("transition must be 'src dst prob'", lineno)
        try:
            src, dst = int(parts[0]), int(parts[1])
            prob = float(parts[2])
        except ValueError:
            raise TraSyntaxError(f"cannot parse transition {line!r}", lineno) from None
        if not 0 <= src < n_states:
            raise TraIndexError(src, n_states, lineno)
        if not 0 <= dst < n_states:
            raise TraIndexError(dst, n_states, lineno)
        if not 0.0 < prob <= 1.0:
            raise TraSyntaxError(f"probability must be in (0,1], got {prob!r}", lineno)
        triples.append((src, dst, prob))

    if n_states is None:
        raise TraSyntaxError("empty document", None)
    if len(triples) != declared_transitions:
        raise TraSyntaxError(
            f"header declares {declared_transitions} transitions, found {len(triples)}",
            None)
    if not 0 <= init_state < n_states:
        raise ChainFormatError("bad_init", f"initial state {init_state} out of range")

    by_src: dict[int, dict[int, float]] = {}
    for src, dst, prob in triples:
        row = by_src.setdefault(src, {})
        if dst in row:
            raise TraSyntaxError(f"duplicate transition {src} -> {dst}", None)
        row[dst] = prob

    rows: list[Distribution] = []
    for state in range(n_states):
        row = by_src.get(state)
        if row is None:
            if not complete_absorbing:
                raise MissingRow(state)
            row = {state: 1.0}
        total = sum(row.values())
        if abs(total - 1.0) > ROW_SUM_TOL:
            raise NonStochasticRow(state, total)
        rows.append(Distribution.from_sparse(
            n_states, {d: p / total for d, p in row.items()}))
    return MarkovChain(tuple(rows), point_mass(n_states, init_state))


def write_tra(chain: MarkovChain, *, allow_drop_init: bool = False) -> str:
    """Serialise to explicit transition format (canonical src, dst order).

    The format cannot carry an initial distribution; writing a chain whose
    init is not a point mass is refused unless ``allow_drop_init``.
    """
    if chain.init.support_size != 1 and not allow_drop_init:
        raise ChainFormatError(
            "init_not_point_mass",
            "transition format drops the init distribution; "
            "pass allow_drop_init=True or use the structured format")
    lines = []
    count = 0
    for src in range(chain.n):
        idx, val = chain.rows[src].items()
        for dst, prob in zip(idx, val):
            lines.append(f"{src} {int(dst)} {float(prob)!r}")
            count += 1
    return "\n".join([f"{chain.n} {count}", *lines]) + "\n"


def _sparse_map(d: Distribution) -> dict[str, float]:
    idx, val = d.items()
    return {str(int(i)): float(v) for i, v in zip(idx, val)}


def write_structured(chain: MarkovChain, state_names: list[str] | None = None) -> str:
    """Serialise to the versioned JSON chain document."""
    doc: dict[str, Any] = {
        "format": STRUCTURED_FORMAT,
        "version": STRUCTURED_VERSION,
        "n_states": chain.n,
        "init": _sparse_map(chain.init),
        "rows": [_sparse_map(row) for row in chain.rows],
    }
    if state_names is not None:
        if len(state_names) != chain.n:
            raise ChainFormatError("bad_names", "one name per state required")
        doc["state_names"] = state_names
    return json.dumps(doc, indent=1)


def parse_structured(text: str) -> MarkovChain:
    """Parse the versioned JSON chain document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TraSyntaxError(f"not valid JSON: {exc}", exc.lineno) from None
    if not isinstance(doc, dict) or doc.get("format") != STRUCTURED_FORMAT:
        raise ChainFormatError("bad_format", f"expected a {STRUCTURED_FORMAT!r} document")
    if doc.get("version") != STRUCTURED_VERSION:
        raise ChainFormatError("bad_version",
                               f"unsupported version {doc.get('version')!r}")
    try:
        n = int(doc["n_states"])
        init_map = {int(k): float(v) for k, v in doc["init"].items()}
        row_maps = [{int(k): float(v) for k, v in row.items()} for row in doc["rows"]]
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ChainFormatError("bad_document", f"malformed chain document: {exc}") from None
    if n <= 0:
        raise ChainFormatError("bad_document", f"state count must be positive, got {n}")
    if len(row_maps) != n:
        raise ChainFormatError("bad_document",
                               f"{len(row_maps)} rows for {n} states")
    try:
        init = Distribution.from_sparse(n, init_map)
        rows = tuple(Distribution.from_sparse(n, m) for m in row_maps)
    except ValueError as exc:
        raise ChainFormatError("bad_distribution", str(exc)) from None
    return MarkovChain(rows, init)


def load_chain(path: str) -> MarkovChain:
    """Load a chain from a ``.tra`` or structured JSON file by extension."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".tra"):
        return parse_tra(text)
    return parse_structured(text)
