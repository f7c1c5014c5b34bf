"""Generalization-gap and Rademacher-complexity calculators.

All logarithms are natural. These are diagnostics: the probabilistic
statements behind them assume conditions (‖W‖ ≤ 1, a radius r bounding
‖E[WWᵀ]‖) that trained predictors are not checked against.
"""

import logging
import math
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from .errors import UsageError
from .matrix import svd, tail_sum

logger = logging.getLogger(__name__)


class BoundInputs(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    delta: float = Field(gt=0.0, lt=1.0)
    r: float = Field(default=0.0, ge=0.0)
    theta: int = Field(default=0, ge=0)
    tail_sum: float = Field(default=0.0, ge=0.0)
    rademacher: float = Field(default=0.0, ge=0.0)
    trace_bound: float = Field(default=0.0, ge=0.0)

    @property
    def log_term(self) -> float:
        return math.log(2.0 / self.delta)


class BoundReport(BaseModel):
    n: int
    delta: float
    r: float
    theta: int
    trace: float
    tail_sum: float
    trace_bound_value: float
    local_rc_value: float
    global_gap: float
    local_gap: float

    def pairs(self):
        return list(self.model_dump().items())


def global_bound_gap(inputs: BoundInputs) -> float:
    """4·R_n + √(2·ln(2/δ)/n)."""
    return 4.0 * inputs.rademacher + math.sqrt(2.0 * inputs.log_term / inputs.n)


def local_bound_gap(inputs: BoundInputs) -> float:
    """8·R_n + √(8·r·ln(2/δ)/n) + 3·ln(2/δ)/n."""
    log_term = inputs.log_term
    return (
        8.0 * inputs.rademacher
        + math.sqrt(8.0 * inputs.r * log_term / inputs.n)
        + 3.0 * log_term / inputs.n
    )


def local_rademacher_bound(inputs: BoundInputs) -> float:
    """r·√(θ/n) + Σ_{j>θ}λ_j/√n."""
    return inputs.r * math.sqrt(inputs.theta / inputs.n) + inputs.tail_sum / math.sqrt(inputs.n)


def trace_rademacher_bound(inputs: BoundInputs) -> float:
    """λ/√n for a trace-constrained predictor."""
    return inputs.trace_bound / math.sqrt(inputs.n)


def bound_report(w: Any, n: int, delta: float, r: float, theta: int) -> BoundReport:
    """
    Evaluate all four calculators on a predictor.

    The trace and tail sum come from W's singular values. The trace bound
    feeds the global gap; the local Rademacher bound feeds the local gap.

    Args:
        w: Predictor, d×L
        n: Training-set size
        delta: Confidence parameter in (0, 1)
        r: Radius input
        theta: Number of leading singular values left out of the tail

    Returns:
        BoundReport with inputs, norms and the four values
    """
    if theta < 0:
        raise UsageError(f"theta must be >= 0, got {theta}")
    sigma = svd(w).sigma
    trace = tail_sum(sigma, 0)
    tail = tail_sum(sigma, theta)

    base = BoundInputs(n=n, delta=delta, r=r, theta=theta, tail_sum=tail, trace_bound=trace)
    trace_value = trace_rademacher_bound(base)
    local_value = local_rademacher_bound(base)
    global_gap = global_bound_gap(base.model_copy(update={"rademacher": trace_value}))
    local_gap = local_bound_gap(base.model_copy(update={"rademacher": local_value}))

    logger.info(f"Bounds at n={n}: trace_rc={trace_value:.6g} local_rc={local_value:.6g}")
    return BoundReport(
        n=n,
        delta=delta,
        r=r,
        theta=theta,
        trace=trace,
        tail_sum=tail,
        trace_bound_value=trace_value,
        local_rc_value=local_value,
        global_gap=global_gap,
        local_gap=local_gap,
    )
