"""Squared-loss multi-label ERM with spectral regularizers.

Data layout: X is n×d (one example per row), Y is n×L and W is d×L, so the
data-fit term is f(W) = ‖Y − XW‖²_F (a plain sum over examples) and its
gradient is 2Xᵀ(XW − Y).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import DEFAULT_C, DEFAULT_GAMMA, DEFAULT_MAX_ITERS, DEFAULT_REL_TOL, T_CAP_FACTOR
from .errors import DivergenceError, UsageError
from .matrix import as_matrix, check_product, spectral_norm, svd, tail_sum
from .prox import ProxParams, thresholded_svd

logger = logging.getLogger(__name__)

Regularizer = Literal["tail", "trace", "frobenius", "none"]


def resolve_theta_fraction(theta_frac: float, d: int, l: int) -> int:
    """Round θ = frac·L to the nearest integer (halves up), clamped to [0, min(d, L)]."""
    theta = int(math.floor(theta_frac * l + 0.5))
    return max(0, min(theta, min(d, l)))


class SolverConfig(BaseModel):
    """Hyperparameters of the proximal-gradient loop.

    t0=None means the gradient Lipschitz estimate 2σ_max(X)².
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    regularizer: Regularizer = "tail"
    theta: Optional[int] = Field(default=None, ge=0)
    theta_frac: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    c: float = Field(default=DEFAULT_C, ge=0.0)
    t0: Optional[float] = Field(default=None, gt=0.0)
    gamma: float = Field(default=DEFAULT_GAMMA, gt=1.0)
    max_iters: int = Field(default=DEFAULT_MAX_ITERS, ge=1)
    rel_tol: float = Field(default=DEFAULT_REL_TOL, gt=0.0)
    prox_rule: Literal["conditional", "partial"] = "conditional"
    w0: Optional[np.ndarray] = None

    @field_validator("w0", mode="before")
    @classmethod
    def _check_w0(cls, value):
        if value is None:
            return value
        return as_matrix(value, "w0")

    @model_validator(mode="after")
    def _check_theta(self):
        if self.theta is not None and self.theta_frac is not None:
            raise ValueError("theta and theta_frac are mutually exclusive")
        if self.regularizer == "tail" and self.theta is None and self.theta_frac is None:
            raise ValueError("tail regularizer needs theta or theta_frac")
        return self

    def resolved_theta(self, d: int, l: int) -> int:
        if self.theta_frac is not None:
            return resolve_theta_fraction(self.theta_frac, d, l)
        return self.theta or 0

    def settings(self) -> dict:
        """Scalar settings for report headers (w0 reported as given/zero)."""
        values = self.model_dump(exclude={"w0"})
        values["w0"] = "given" if self.w0 is not None else "zero"
        return values


@dataclass
class SolverTrace:
    objectives: List[float] = field(default_factory=list)
    loss_terms: List[float] = field(default_factory=list)
    reg_terms: List[float] = field(default_factory=list)
    steps: List[float] = field(default_factory=list)
    iterations_run: int = 0
    converged: bool = False

    def record(self, loss: float, reg: float, c: float, step: float) -> float:
        objective = loss + c * reg
        self.objectives.append(objective)
        self.loss_terms.append(loss)
        self.reg_terms.append(reg)
        self.steps.append(step)
        return objective

    def to_rows(self) -> List[Tuple[int, float, float, float, float]]:
        """Rows (iteration, objective, loss, penalty, t); row 0 is W₀."""
        return [
            (k, obj, loss, reg, t)
            for k, (obj, loss, reg, t) in enumerate(
                zip(self.objectives, self.loss_terms, self.reg_terms, self.steps)
            )
        ]


def _check_shapes(w: np.ndarray, x: np.ndarray, y: np.ndarray) -> None:
    if x.shape[0] != y.shape[0]:
        raise UsageError(f"dimension mismatch: x has {x.shape[0]} rows, y has {y.shape[0]}")
    check_product(x, w, "x", "w")
    if w.shape[1] != y.shape[1]:
        raise UsageError(f"dimension mismatch: w has {w.shape[1]} columns, y has {y.shape[1]}")


def data_loss(w: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    residual = y - x @ w
    return float(np.sum(residual * residual))


def penalty(w: Any, config: SolverConfig) -> float:
    """Regularizer value without the weight C."""
    w = as_matrix(w, "w")
    if config.regularizer == "none":
        return 0.0
    if config.regularizer == "frobenius":
        return float(np.sum(w * w))
    sigma = svd(w).sigma
    if config.regularizer == "trace":
        return tail_sum(sigma, 0)
    return tail_sum(sigma, config.resolved_theta(*w.shape))


def objective(w: Any, x: Any, y: Any, config: SolverConfig) -> float:
    """‖Y − XW‖²_F + C · penalty(W)."""
    w = as_matrix(w, "w")
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    _check_shapes(w, x, y)
    return data_loss(w, x, y) + config.c * penalty(w, config)


def gradient(w: Any, x: Any, y: Any) -> np.ndarray:
    """Gradient 2Xᵀ(XW − Y) of the data-fit term."""
    w = as_matrix(w, "w")
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    _check_shapes(w, x, y)
    return 2.0 * (x.T @ (x @ w - y))


def lipschitz_step(x: Any) -> float:
    """2σ_max(X)², the Lipschitz constant of the gradient."""
    return 2.0 * spectral_norm(x) ** 2


def _prox_step(g: np.ndarray, config: SolverConfig, theta: int, t: float) -> Tuple[np.ndarray, float]:
    """Prox of the configured penalty at g; returns the new W and its penalty value."""
    threshold = config.c / t
    if config.regularizer in ("tail", "trace"):
        protected = theta if config.regularizer == "tail" else 0
        if threshold == 0.0 or protected >= min(g.shape):
            w = g.copy()
            return w, penalty(w, config)
        dec = thresholded_svd(g, ProxParams(threshold=threshold, theta=protected, rule=config.prox_rule))
        return dec.reconstruct(), tail_sum(dec.sigma, protected)
    if config.regularizer == "frobenius":
        w = g * (t / (t + 2.0 * config.c))
        return w, float(np.sum(w * w))
    return g, 0.0


def fit(x: Any, y: Any, config: SolverConfig) -> Tuple[np.ndarray, SolverTrace]:
    """
    Proximal-gradient training loop.

    Each iteration grows t_k = γ·t_{k−1} (capped at 1e12·t₀), takes the
    gradient step G = W − ∇f(W)/t_k and applies the prox of the configured
    penalty with threshold C/t_k.

    Args:
        x: Feature matrix, n×d
        y: Label (or target) matrix, n×L
        config: Solver hyperparameters

    Returns:
        (final W, trace); trace entry 0 is the starting point W₀
    """
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    d, l = x.shape[1], y.shape[1]
    if x.shape[0] != y.shape[0]:
        raise UsageError(f"dimension mismatch: x has {x.shape[0]} rows, y has {y.shape[0]}")

    w = np.zeros((d, l)) if config.w0 is None else config.w0.copy()
    _check_shapes(w, x, y)

    t0 = config.t0
    if t0 is None:
        t0 = lipschitz_step(x)
        if t0 == 0.0:
            logger.warning("X is identically zero; using t0=1")
            t0 = 1.0
    t_cap = T_CAP_FACTOR * t0
    theta = config.resolved_theta(d, l)

    logger.info(
        f"Fitting {config.regularizer} regularizer: n={x.shape[0]} d={d} L={l} "
        f"C={config.c} theta={theta} t0={t0:.6g} gamma={config.gamma}"
    )

    trace = SolverTrace()
    previous = trace.record(data_loss(w, x, y), penalty(w, config), config.c, t0)
    t = t0
    for k in range(1, config.max_iters + 1):
        t = min(config.gamma * t, t_cap)
        g = w - (2.0 / t) * (x.T @ (x @ w - y))
        if not np.all(np.isfinite(g)):
            logger.error(f"Non-finite gradient step at iteration {k}")
            raise DivergenceError(k, float("nan"))
        w, reg = _prox_step(g, config, theta, t)

        loss = data_loss(w, x, y)
        current = loss + config.c * reg
        if not np.isfinite(current):
            logger.error(f"Non-finite objective at iteration {k}")
            raise DivergenceError(k, current)
        trace.record(loss, reg, config.c, t)
        trace.iterations_run = k
        logger.debug(f"iter {k}: objective={current:.12g} loss={loss:.12g} penalty={reg:.12g} t={t:.6g}")

        if abs(current - previous) / max(previous, 1e-12) < config.rel_tol:
            trace.converged = True
            break
        previous = current

    if trace.converged:
        logger.info(f"Converged after {trace.iterations_run} iterations, objective={trace.objectives[-1]:.12g}")
    else:
        logger.info(f"Stopped at max_iters={config.max_iters}, objective={trace.objectives[-1]:.12g}")
    return w, trace


def ridge_closed_form(x: Any, y: Any, c: float) -> np.ndarray:
    """
    argmin ‖Y − XW‖²_F + C‖W‖²_F = (XᵀX + C·I)⁻¹XᵀY, solved through the SVD of X.

    Args:
        x: Feature matrix, n×d
        y: Target matrix, n×L
        c: Ridge weight, > 0

    Returns:
        W, d×L
    """
    if c <= 0:
        raise UsageError(f"ridge weight must be > 0, got {c}")
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    if x.shape[0] != y.shape[0]:
        raise UsageError(f"dimension mismatch: x has {x.shape[0]} rows, y has {y.shape[0]}")
    dec = svd(x)
    shrink = dec.sigma / (dec.sigma ** 2 + c)
    return (dec.v * shrink) @ (dec.u.T @ y)


def predict(w: Any, x: Any) -> np.ndarray:
    """Score matrix XW (m×L)."""
    w = as_matrix(w, "w")
    x = as_matrix(x, "x")
    check_product(x, w, "x", "w")
    return x @ w
