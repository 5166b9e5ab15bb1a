"""HTTP service wrapping the monitors as long-running sessions.

A client creates a monitor, then posts one (prediction, observation) step
at a time and receives the verdict for that step.  Sessions live in
process memory; each session's updates are serialised by a lock, matching
the monitors' sequential-state-machine contract.
"""

from __future__ import annotations

import threading
import uuid

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse

from .. import __version__
from ..dist import Distribution, DistributionError
from ..monitors import (AverageMonitor, DifferentialMonitor, WeightedMonitor,
                        state_weight_functions)
from ..scoring import WeightVector, expected_score, get_rule
from .models import (CreateMonitorRequest, ErrorBody, ExpectedScoreRequest,
                     ExpectedScoreResponse, MonitorInfo, Prediction, ScoreRequest,
                     ScoreResponse, StateWeights, StepRequest, VerdictResponse)


class _BadRequest(HTTPException):
    def __init__(self, code: str, detail: str):
        super().__init__(status_code=400,
                         detail=ErrorBody(code=code, detail=detail).model_dump())


def _to_distribution(raw: Prediction, n_hint: int | None) -> Distribution:
    try:
        if isinstance(raw, list):
            if n_hint is not None and len(raw) != n_hint:
                raise _BadRequest("dimension_mismatch",
                                  f"prediction over {len(raw)} outcomes, monitor uses {n_hint}")
            return Distribution.from_dense(raw)
        if n_hint is None:
            raise _BadRequest("malformed_record",
                              "sparse predictions need the monitor's n or a \"n\" field")
        return Distribution.from_sparse(n_hint, {int(k): float(v) for k, v in raw.items()})
    except DistributionError as exc:
        raise _BadRequest("invalid_probability", str(exc)) from None
    except (TypeError, ValueError) as exc:
        raise _BadRequest("malformed_record", str(exc)) from None


def _weights_from_spec(spec: StateWeights, n: int):
    if len(spec.alpha) != n:
        raise _BadRequest("dimension_mismatch",
                          f"{len(spec.alpha)} alpha weights for {n} states")
    beta_rows = spec.beta
    if beta_rows is not None and len(beta_rows) != n:
        raise _BadRequest("dimension_mismatch",
                          f"{len(beta_rows)} beta rows for {n} states")
    c_alpha = spec.c_alpha if spec.c_alpha is not None else max(
        max(spec.alpha, default=0.0), spec.alpha_start, 1e-12)
    ones = np.ones(n)
    try:
        beta_start = WeightVector(np.asarray(spec.beta_start, dtype=float)
                                  if spec.beta_start is not None else ones,
                                  cap=spec.c_beta)
        betas = ([WeightVector(np.asarray(row, dtype=float), cap=spec.c_beta)
                  for row in beta_rows] if beta_rows is not None
                 else [WeightVector(ones, cap=spec.c_beta)] * n)
    except ValueError as exc:
        raise _BadRequest("invalid_weights", str(exc)) from None
    c_beta = spec.c_beta if spec.c_beta is not None else max(
        [beta_start.cap] + [w.cap for w in betas])
    alpha_vec = list(spec.alpha)
    alpha_start = spec.alpha_start

    def alpha_of(s):
        return alpha_start if s is None else alpha_vec[s]

    def beta_of(s):
        return beta_start if s is None else betas[s]

    try:
        return state_weight_functions(alpha_of, beta_of, c_alpha, c_beta)
    except ValueError as exc:
        raise _BadRequest("invalid_weights", str(exc)) from None


class _Session:
    def __init__(self, kind: str, rule_name: str, monitor, n: int | None):
        self.kind = kind
        self.rule_name = rule_name
        self.monitor = monitor
        self.n = n
        self.lock = threading.Lock()
        self.last: VerdictResponse | None = None


def create_app() -> FastAPI:
    app = FastAPI(title="alignmon", version=__version__,
                  description="Anytime-valid alignment monitoring over HTTP.")
    sessions: dict[str, _Session] = {}
    registry_lock = threading.Lock()

    @app.exception_handler(ValueError)
    async def value_error_handler(request, exc):
        return JSONResponse(status_code=400,
                            content={"code": "invalid_value", "detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    def _get(monitor_id: str) -> _Session:
        try:
            return sessions[monitor_id]
        except KeyError:
            raise HTTPException(status_code=404, detail=ErrorBody(
                code="unknown_monitor", detail=f"no monitor {monitor_id!r}").model_dump())

    def _info(monitor_id: str, sess: _Session) -> MonitorInfo:
        decision = None
        if sess.kind in ("differential",):
            decision = sess.monitor.decision.value.value
        return MonitorInfo(id=monitor_id, kind=sess.kind, rule=sess.rule_name,
                           delta=sess.monitor.delta, steps=sess.monitor.step_count,
                           decision=decision, last=sess.last)

    @app.post("/monitors", response_model=MonitorInfo, status_code=201)
    def create_monitor(req: CreateMonitorRequest):
        rule = get_rule(req.rule)
        if req.kind == "average":
            monitor = AverageMonitor(rule, req.delta)
        elif req.kind == "differential":
            monitor = DifferentialMonitor(rule, req.delta)
        else:
            if req.n is None or req.weights is None:
                raise _BadRequest("missing_weights",
                                  "weighted monitors need \"n\" and \"weights\"")
            monitor = WeightedMonitor(rule, req.delta,
                                      _weights_from_spec(req.weights, req.n))
        monitor_id = uuid.uuid4().hex[:12]
        with registry_lock:
            sessions[monitor_id] = _Session(req.kind, req.rule, monitor, req.n)
        return _info(monitor_id, sessions[monitor_id])

    @app.get("/monitors/{monitor_id}", response_model=MonitorInfo)
    def get_monitor(monitor_id: str):
        return _info(monitor_id, _get(monitor_id))

    @app.delete("/monitors/{monitor_id}", status_code=204)
    def delete_monitor(monitor_id: str):
        _get(monitor_id)
        with registry_lock:
            sessions.pop(monitor_id, None)

    @app.post("/monitors/{monitor_id}/steps", response_model=VerdictResponse)
    def step(monitor_id: str, req: StepRequest):
        sess = _get(monitor_id)
        n_hint = sess.n if sess.n is not None else req.n
        y = _to_distribution(req.p, n_hint)
        if req.x >= y.n:
            raise _BadRequest("index_out_of_range",
                              f"outcome {req.x} out of range for {y.n}")
        with sess.lock:
            if sess.n is None:
                sess.n = y.n
            elif y.n != sess.n:
                raise _BadRequest("dimension_mismatch",
                                  f"prediction over {y.n} outcomes, monitor uses {sess.n}")
            try:
                if sess.kind == "differential":
                    if req.pref is None:
                        raise _BadRequest("malformed_record",
                                          "differential monitors need \"pref\"")
                    y_ref = _to_distribution(req.pref, sess.n)
                    verdict = sess.monitor.update(y, y_ref, req.x)
                else:
                    verdict = sess.monitor.update(y, req.x)
            except DistributionError as exc:
                raise _BadRequest("invalid_probability", str(exc)) from None
            decision = (sess.monitor.decision.value.value
                        if sess.kind == "differential" else None)
            resp = VerdictResponse(t=verdict.step, est=verdict.estimate,
                                   lo=verdict.lo, hi=verdict.hi, decision=decision,
                                   no_information=not verdict.has_interval)
            sess.last = resp
        return resp

    @app.post("/score", response_model=ScoreResponse)
    def score(req: ScoreRequest):
        rule = get_rule(req.rule)
        y = _to_distribution(req.p, req.n)
        if req.x >= y.n:
            raise _BadRequest("index_out_of_range",
                              f"outcome {req.x} out of range for {y.n}")
        return ScoreResponse(score=rule.score(y, req.x))

    @app.post("/expected_score", response_model=ExpectedScoreResponse)
    def expected(req: ExpectedScoreRequest):
        rule = get_rule(req.rule)
        y_hat = _to_distribution(req.p_hat, req.n)
        y_star = _to_distribution(req.p_star, req.n if req.n else y_hat.n)
        if y_hat.n != y_star.n:
            raise _BadRequest("dimension_mismatch",
                              "p_hat and p_star live on different outcome spaces")
        return ExpectedScoreResponse(value=expected_score(rule, y_hat, y_star))

    return app
