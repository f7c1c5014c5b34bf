"""Proximal operators for spectral penalties.

``conditional_svt`` solves

    argmin_W  ½‖W − Q‖²_F + C · Σ_{j>θ} λ_j(W)

by thresholding the singular values of Q; ``svt`` is the θ = 0 case (the
trace-norm prox). ``prox_oracle`` is a brute-force search over singular
values used to check both.
"""

import itertools
import logging
from typing import Any, Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .errors import UsageError
from .matrix import SvdResult, as_matrix, svd, tail_sum

logger = logging.getLogger(__name__)

ORACLE_MAX_DIM = 6


class ProxParams(BaseModel):
    """Threshold C and the number θ of protected leading singular values.

    rule="conditional" keeps σ_i (i ≤ θ) only when σ_i > C;
    rule="partial" keeps every σ_i with i ≤ θ.
    """

    model_config = ConfigDict(frozen=True)

    threshold: float = Field(ge=0.0)
    theta: int = Field(ge=0)
    rule: Literal["conditional", "partial"] = "conditional"


def threshold_singular_values(sigma: np.ndarray, params: ProxParams) -> np.ndarray:
    """Apply the thresholding rule to descending singular values."""
    c = params.threshold
    protected = np.arange(sigma.size) < params.theta
    shrunk = np.maximum(0.0, sigma - c)
    if params.rule == "partial":
        keep = protected
    else:
        keep = protected & (sigma > c)
    return np.where(keep, sigma, shrunk)


def conditional_svt(q: Any, params: ProxParams) -> np.ndarray:
    """
    Conditional singular value thresholding of q.

    Args:
        q: Matrix to threshold
        params: Threshold, θ and rule

    Returns:
        U · diag(thresholded σ) · Vᵀ; q itself (copied) when the threshold is
        zero or θ ≥ min(rows, cols), since the penalty then vanishes
    """
    q = as_matrix(q, "q")
    if params.threshold == 0.0 or params.theta >= min(q.shape):
        return q.copy()
    return thresholded_svd(q, params).reconstruct()


def thresholded_svd(q: Any, params: ProxParams) -> SvdResult:
    """Singular vectors of q with the thresholded, still descending, singular values."""
    dec = svd(as_matrix(q, "q"))
    return SvdResult(u=dec.u, sigma=threshold_singular_values(dec.sigma, params), v=dec.v)


def svt(q: Any, threshold: float) -> np.ndarray:
    """Soft-threshold every singular value of q by threshold."""
    return conditional_svt(q, ProxParams(threshold=threshold, theta=0))


def prox_objective(w: Any, q: Any, params: ProxParams) -> float:
    """½‖W − Q‖²_F + C · Σ_{j>θ} λ_j(W)."""
    w = as_matrix(w, "w")
    q = as_matrix(q, "q")
    if w.shape != q.shape:
        raise UsageError(f"shape mismatch: w is {w.shape}, q is {q.shape}")
    diff = w - q
    return 0.5 * float(np.sum(diff * diff)) + params.threshold * tail_sum(svd(w).sigma, params.theta)


def _spectral_objective(values: np.ndarray, sigma: np.ndarray, params: ProxParams) -> float:
    ordered = np.sort(values)[::-1]
    return 0.5 * float(np.sum((values - sigma) ** 2)) + params.threshold * float(np.sum(ordered[params.theta:]))


def prox_oracle(q: Any, params: ProxParams, grid_step: float) -> Tuple[np.ndarray, float]:
    """
    Exhaustive search for the prox minimizer among matrices sharing q's
    singular vectors.

    The objective of a singular-value assignment w equals the minimum over
    θ-subsets P of ½Σ(w_i − σ_i)² + C Σ_{i∉P} w_i, which separates per index.
    Each index is searched over {0, step, 2·step, …, σ_max + C} plus σ_i and
    max(0, σ_i − C), for every subset P; the winner is scored with the
    sorted-penalty objective.

    Args:
        q: Matrix of at most 6×6
        params: Threshold and θ (rule is ignored)
        grid_step: Grid spacing, > 0

    Returns:
        (minimizer, minimum objective)
    """
    q = as_matrix(q, "q")
    if max(q.shape) > ORACLE_MAX_DIM:
        raise UsageError(f"prox_oracle supports at most {ORACLE_MAX_DIM}x{ORACLE_MAX_DIM}, got {q.shape}")
    if grid_step <= 0:
        raise UsageError(f"grid_step must be > 0, got {grid_step}")

    dec = svd(q)
    sigma = dec.sigma
    r = sigma.size
    c = params.threshold
    top = float(sigma[0]) + c
    grid = np.arange(int(np.floor(top / grid_step)) + 1) * grid_step

    def best_value(i: int, penalized: bool) -> float:
        candidates = np.concatenate([grid, [sigma[i], max(0.0, sigma[i] - c)]])
        cost = 0.5 * (candidates - sigma[i]) ** 2
        if penalized:
            cost = cost + c * candidates
        return float(candidates[np.argmin(cost)])

    best_values = None
    best_objective = np.inf
    for protected in itertools.combinations(range(r), min(params.theta, r)):
        values = np.array([best_value(i, i not in protected) for i in range(r)])
        objective = _spectral_objective(values, sigma, params)
        if objective < best_objective:
            best_objective = objective
            best_values = values

    minimizer = (dec.u * best_values) @ dec.v.T
    return minimizer, best_objective
