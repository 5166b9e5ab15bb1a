"""Streaming monitor mode: JSON-lines in, JSON-lines out.

Each input line is one record::

    {"p": [0.5, 0.5], "x": 1}                      # average mode
    {"p": [...], "pref": [...], "x": 0}            # differential mode
    {"p": {"3": 0.9, "7": 0.1}, "n": 10, "x": 3}   # sparse prediction

Output carries one verdict per accepted record; malformed records produce
an error record on the error stream, the remaining stream keeps going, and
the exit status is non-zero at end of stream.
"""

from __future__ import annotations

import json
from typing import IO, Iterable

from ..dist import Distribution, DistributionError
from ..monitors import AverageMonitor, DifferentialMonitor
from ..scoring import get_rule


class _RecordError(Exception):
    def __init__(self, code: str, detail: str):
        self.code = code
        self.detail = detail
        super().__init__(detail)


def _parse_prediction(raw, n_known: int | None, rec_n) -> Distribution:
    if isinstance(raw, list):
        n = len(raw)
        if n_known is not None and n != n_known:
            raise _RecordError("dimension_mismatch",
                               f"prediction over {n} outcomes, stream uses {n_known}")
        try:
            return Distribution.from_dense(raw)
        except DistributionError as exc:
            raise _RecordError("invalid_probability", str(exc)) from None
    if isinstance(raw, dict):
        n = rec_n if rec_n is not None else n_known
        if n is None:
            raise _RecordError("malformed_record",
                               "sparse predictions need an explicit \"n\" field")
        if n_known is not None and n != n_known:
            raise _RecordError("dimension_mismatch",
                               f"record n={n}, stream uses {n_known}")
        try:
            mass = {int(k): float(v) for k, v in raw.items()}
            return Distribution.from_sparse(int(n), mass)
        except DistributionError as exc:
            raise _RecordError("invalid_probability", str(exc)) from None
        except (TypeError, ValueError) as exc:
            raise _RecordError("malformed_record", f"bad sparse prediction: {exc}") from None
    raise _RecordError("malformed_record", "\"p\" must be a list or an index map")


def stream_monitor(lines: Iterable[str], out: IO[str], err: IO[str], *,
                   mode: str = "average", rule_name: str = "brier",
                   delta: float = 0.05) -> int:
    """Run the streaming monitor; returns the process exit code (0 or 2)."""
    if mode not in ("average", "differential"):
        raise ValueError(f"unknown stream mode {mode!r}")
    rule = get_rule(rule_name)
    monitor = (DifferentialMonitor(rule, delta) if mode == "differential"
               else AverageMonitor(rule, delta))
    n_known: int | None = None
    had_errors = False
    for lineno, raw_line in enumerate(lines, start=1):
        line = raw_line.strip()
        if not line:
            continue
        try:
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise _RecordError("malformed_record", f"not valid JSON: {exc}") from None
            if not isinstance(rec, dict) or "p" not in rec or "x" not in rec:
                raise _RecordError("malformed_record", "record needs \"p\" and \"x\"")
            rec_n = rec.get("n")
            y = _parse_prediction(rec["p"], n_known, rec_n)
            x = rec["x"]
            if not isinstance(x, int) or isinstance(x, bool):
                raise _RecordError("malformed_record", "\"x\" must be an integer")
            if not 0 <= x < y.n:
                raise _RecordError("index_out_of_range",
                                   f"outcome {x} out of range for {y.n}")
            if mode == "differential":
                if "pref" not in rec:
                    raise _RecordError("malformed_record",
                                       "differential mode needs \"pref\"")
                y_ref = _parse_prediction(rec["pref"], y.n, rec_n)
                verdict = monitor.update(y, y_ref, x)
            else:
                verdict = monitor.update(y, x)
            n_known = y.n
        except _RecordError as exc:
            had_errors = True
            err.write(json.dumps({"line": lineno, "error": exc.code,
                                  "detail": exc.detail}) + "\n")
            continue
        record = {"t": verdict.step, "est": verdict.estimate,
                  "lo": verdict.lo, "hi": verdict.hi}
        if mode == "differential":
            record["decision"] = monitor.decision.value.value
        out.write(json.dumps(record) + "\n")
    return 2 if had_errors else 0
