"""Request and response schemas for the monitoring service."""

from __future__ import annotations

from typing import Literal, Union

from pydantic import BaseModel, Field

RuleName = Literal["brier", "spherical"]
MonitorKind = Literal["average", "differential", "weighted"]

Prediction = Union[list[float], dict[str, float]]


class StateWeights(BaseModel):
    """Markovian weights keyed by the last observed state.

    ``alpha`` holds one prediction weight per state; ``alpha_start`` applies
    before anything has been observed.  ``beta`` optionally holds one
    outcome-weight row per state (defaults to all ones), with ``beta_start``
    for the empty history.
    """

    alpha: list[float]
    alpha_start: float = 0.0
    beta: list[list[float]] | None = None
    beta_start: list[float] | None = None
    c_alpha: float | None = None
    c_beta: float | None = None


class CreateMonitorRequest(BaseModel):
    kind: MonitorKind = "average"
    rule: RuleName = "brier"
    delta: float = Field(default=0.05, gt=0.0, lt=1.0)
    n: int | None = Field(default=None, ge=1,
                          description="outcome count; required for weighted monitors")
    weights: StateWeights | None = None


class MonitorInfo(BaseModel):
    id: str
    kind: MonitorKind
    rule: RuleName
    delta: float
    steps: int
    decision: str | None = None
    last: "VerdictResponse | None" = None


class StepRequest(BaseModel):
    p: Prediction
    x: int = Field(ge=0)
    pref: Prediction | None = None
    n: int | None = Field(default=None, ge=1)


class VerdictResponse(BaseModel):
    t: int
    est: float | None
    lo: float | None
    hi: float | None
    decision: str | None = None
    no_information: bool = False


class ScoreRequest(BaseModel):
    rule: RuleName = "brier"
    p: Prediction
    x: int = Field(ge=0)
    n: int | None = Field(default=None, ge=1)


class ScoreResponse(BaseModel):
    score: float


class ExpectedScoreRequest(BaseModel):
    rule: RuleName = "brier"
    p_hat: Prediction
    p_star: Prediction
    n: int | None = Field(default=None, ge=1)


class ExpectedScoreResponse(BaseModel):
    value: float


class ErrorBody(BaseModel):
    code: str
    detail: str


MonitorInfo.model_rebuild()
