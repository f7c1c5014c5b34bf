"""Dense real matrices, SVD and the spectral norms built on it.

A DenseMatrix is a C-ordered float64 ``numpy.ndarray`` with at least one row
and one column and only finite entries; ``as_matrix`` is its constructor.
"""

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import NumericalError, UsageError

logger = logging.getLogger(__name__)

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 60
RANK_RTOL = 1e-9


def as_matrix(obj: Any, name: str = "matrix") -> np.ndarray:
    """
    Convert obj to a DenseMatrix.

    Args:
        obj: Nested sequence or array
        name: Argument name used in error messages

    Returns:
        C-ordered float64 2-D array (a copy when obj is not already one)
    """
    try:
        a = np.ascontiguousarray(obj, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise UsageError(f"{name}: not a real matrix ({e})")
    if a.ndim != 2:
        raise UsageError(f"{name}: expected 2-D matrix, got {a.ndim}-D")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise UsageError(f"{name}: empty matrix of shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise UsageError(f"{name}: contains NaN or Inf")
    return a


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD ``a = u @ diag(sigma) @ v.T`` with sigma descending."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.v.T


def svd(a: Any, method: str = "lapack") -> SvdResult:
    """
    Thin SVD with r = min(rows, cols) singular values in descending order.

    Args:
        a: Input matrix
        method: "lapack" (numpy) or "jacobi" (one-sided cyclic Jacobi)

    Returns:
        SvdResult with orthonormal u (m×r) and v (n×r)
    """
    a = as_matrix(a, "a")
    if method == "lapack":
        try:
            u, sigma, vt = np.linalg.svd(a, full_matrices=False)
        except np.linalg.LinAlgError as e:
            logger.error(f"LAPACK SVD failed on {a.shape} matrix: {e}")
            raise NumericalError(f"SVD did not converge: {e}")
        return SvdResult(u=u, sigma=sigma, v=vt.T)
    if method == "jacobi":
        return _jacobi_svd(a)
    raise UsageError(f"unknown SVD method {method!r}")


def _jacobi_svd(a: np.ndarray) -> SvdResult:
    transposed = a.shape[0] < a.shape[1]
    work = (a.T if transposed else a).copy()
    m, n = work.shape
    v = np.eye(n)

    for sweep in range(JACOBI_MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = work[:, p] @ work[:, p]
                beta = work[:, q] @ work[:, q]
                gamma = work[:, p] @ work[:, q]
                if gamma == 0.0 or abs(gamma) <= JACOBI_TOL * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                col_p = work[:, p].copy()
                work[:, p] = c * col_p - s * work[:, q]
                work[:, q] = s * col_p + c * work[:, q]
                vec_p = v[:, p].copy()
                v[:, p] = c * vec_p - s * v[:, q]
                v[:, q] = s * vec_p + c * v[:, q]
        if not rotated:
            logger.debug(f"Jacobi SVD converged after {sweep + 1} sweeps")
            break
    else:
        logger.error(f"Jacobi SVD hit the {JACOBI_MAX_SWEEPS}-sweep cap on {a.shape} matrix")
        raise NumericalError(f"Jacobi SVD did not converge within {JACOBI_MAX_SWEEPS} sweeps")

    sigma = np.linalg.norm(work, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    work = work[:, order]
    v = v[:, order]

    nonzero = sigma > 0
    u = np.zeros((m, n))
    u[:, nonzero] = work[:, nonzero] / sigma[nonzero]
    k = int(nonzero.sum())
    if k < n:
        # complete zero-sigma columns to an orthonormal set
        q, _ = np.linalg.qr(np.hstack([u[:, :k], np.eye(m)]))
        u[:, k:] = q[:, k:n]

    if transposed:
        return SvdResult(u=v, sigma=sigma, v=u)
    return SvdResult(u=u, sigma=sigma, v=v)


def tail_sum(sigma: np.ndarray, theta: int) -> float:
    """Sum of the singular values beyond the theta largest."""
    if theta < 0:
        raise UsageError(f"theta must be >= 0, got {theta}")
    return float(np.sum(sigma[theta:]))


def tail_singular_sum(a: Any, theta: int) -> float:
    """
    Tail sum Σ_{j>θ} λ_j(a) of singular values.

    Args:
        a: Input matrix
        theta: Number of leading singular values left out

    Returns:
        The tail sum; 0.0 when theta >= min(rows, cols)
    """
    if theta < 0:
        raise UsageError(f"theta must be >= 0, got {theta}")
    return tail_sum(svd(a).sigma, theta)


def trace_norm(a: Any) -> float:
    return tail_singular_sum(a, 0)


def ky_fan_norm(a: Any, k: int) -> float:
    """Sum of the k largest singular values."""
    if k < 0:
        raise UsageError(f"k must be >= 0, got {k}")
    return float(np.sum(svd(a).sigma[:k]))


def frobenius_norm(a: Any) -> float:
    a = as_matrix(a, "a")
    return float(np.sqrt(np.sum(a * a)))


def spectral_norm(a: Any) -> float:
    return float(svd(a).sigma[0])


def numerical_rank(a: Any, rtol: float = RANK_RTOL) -> int:
    """Count singular values above rtol × σ_max."""
    sigma = svd(a).sigma
    if sigma[0] == 0.0:
        return 0
    return int(np.sum(sigma > rtol * sigma[0]))


def check_product(left: np.ndarray, right: np.ndarray, left_name: str, right_name: str) -> None:
    """Raise UsageError unless left @ right is defined."""
    if left.shape[1] != right.shape[0]:
        raise UsageError(
            f"dimension mismatch: {left_name} is {left.shape[0]}x{left.shape[1]}, "
            f"{right_name} is {right.shape[0]}x{right.shape[1]}"
        )
