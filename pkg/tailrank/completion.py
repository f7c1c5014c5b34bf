"""Spectral-norm completion of a matrix with one or two unknown entries.

The chosen norm (trace, or the tail sum beyond θ) is evaluated over a grid
of candidate values for the holes; ``find_minimizer`` refines the best grid
point by repeated local grids.
"""

import itertools
import logging
from typing import List, Literal, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import UsageError
from .matrix import as_matrix, svd, tail_sum

logger = logging.getLogger(__name__)

# Motivating 3×4 matrix; the zeros at (1, 2) and (2, 3) are the unknown entries
DEMO_BASE = [
    [2.0, 1.0, 2.0, 1.0],
    [1.0, 1.0, 0.0, 2.0],
    [1.0, 1.0, 2.0, 0.0],
]
DEMO_HOLES = [(1, 2), (2, 3)]
DEFAULT_BOUNDS = (1.0, 3.0)
REFINE_CELLS = 2
REFINE_FACTOR = 10.0


class CompletionProblem(BaseModel):
    """Base matrix, hole positions (0-based) and per-hole search bounds."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    base: np.ndarray
    holes: List[Tuple[int, int]]
    bounds: List[Tuple[float, float]]
    norm: Literal["trace", "tail"] = "trace"
    theta: int = Field(default=0, ge=0)

    @field_validator("base", mode="before")
    @classmethod
    def _coerce_base(cls, value):
        return as_matrix(value, "base")

    @model_validator(mode="after")
    def _check(self):
        if not 1 <= len(self.holes) <= 2:
            raise ValueError(f"need 1 or 2 holes, got {len(self.holes)}")
        if len(self.bounds) != len(self.holes):
            raise ValueError("need one (lo, hi) pair per hole")
        rows, cols = self.base.shape
        for i, j in self.holes:
            if not (0 <= i < rows and 0 <= j < cols):
                raise ValueError(f"hole ({i}, {j}) outside {rows}x{cols} matrix")
        if len(set(self.holes)) != len(self.holes):
            raise ValueError("duplicate holes")
        for lo, hi in self.bounds:
            if lo > hi:
                raise ValueError(f"search bounds ({lo}, {hi}) have lo > hi")
        return self

    @property
    def effective_theta(self) -> int:
        return self.theta if self.norm == "tail" else 0

    def complete(self, values: Sequence[float]) -> np.ndarray:
        m = self.base.copy()
        for (i, j), value in zip(self.holes, values):
            m[i, j] = value
        return m

    def sigma_at(self, values: Sequence[float]) -> np.ndarray:
        return svd(self.complete(values)).sigma

    def norm_at(self, values: Sequence[float]) -> float:
        return tail_sum(self.sigma_at(values), self.effective_theta)


def demo_problem(norm: str = "trace", theta: int = 2, lo: float = DEFAULT_BOUNDS[0],
                 hi: float = DEFAULT_BOUNDS[1]) -> CompletionProblem:
    """The motivating 3×4 completion problem with both holes searched over [lo, hi]."""
    return CompletionProblem(
        base=DEMO_BASE,
        holes=DEMO_HOLES,
        bounds=[(lo, hi)] * len(DEMO_HOLES),
        norm=norm,
        theta=theta if norm == "tail" else 0,
    )


class NormSurface(BaseModel):
    """Grid points in row-major order (first hole varies slowest) and their norms."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    points: np.ndarray
    values: np.ndarray
    shape: Tuple[int, ...]

    def rows(self) -> List[Tuple[float, ...]]:
        return [tuple(float(v) for v in p) + (float(norm),) for p, norm in zip(self.points, self.values)]

    def grid(self) -> np.ndarray:
        return self.values.reshape(self.shape)


class CompletionResult(BaseModel):
    values: List[float]
    norm: float
    sigma: List[float]

    def pairs(self) -> List[tuple]:
        pairs = [(f"v{k + 1}", v) for k, v in enumerate(self.values)]
        pairs.append(("norm", self.norm))
        pairs += [(f"sigma{k + 1}", s) for k, s in enumerate(self.sigma)]
        return pairs


def axis_grid(lo: float, hi: float, step: float) -> np.ndarray:
    """lo, lo+step, … up to hi (inclusive within round-off)."""
    if step <= 0:
        raise UsageError(f"grid step must be > 0, got {step}")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def _surface(problem: CompletionProblem, axes: Sequence[np.ndarray]) -> NormSurface:
    points = np.array(list(itertools.product(*axes)), dtype=np.float64)
    values = np.array([problem.norm_at(p) for p in points])
    return NormSurface(points=points, values=values, shape=tuple(len(a) for a in axes))


def norm_surface(problem: CompletionProblem, grid_step: float) -> NormSurface:
    """
    Evaluate the problem's norm at every point of the per-hole grids.

    Args:
        problem: Completion problem
        grid_step: Grid spacing, > 0

    Returns:
        NormSurface with one entry per grid point
    """
    axes = [axis_grid(lo, hi, grid_step) for lo, hi in problem.bounds]
    surface = _surface(problem, axes)
    logger.info(f"Evaluated {problem.norm} norm on {len(surface.values)} grid points")
    return surface


def find_minimizer(problem: CompletionProblem, coarse_step: float, refine_rounds: int) -> CompletionResult:
    """
    Coarse grid search followed by local refinement.

    Each refinement round searches ±2 cells of the previous step around the
    incumbent (clipped to the bounds) with a step ten times smaller. Ties go
    to the first point in row-major order.

    Args:
        problem: Completion problem
        coarse_step: Initial grid spacing
        refine_rounds: Number of refinement rounds, >= 0

    Returns:
        CompletionResult with argmin, norm and singular values there
    """
    if refine_rounds < 0:
        raise UsageError(f"refine_rounds must be >= 0, got {refine_rounds}")
    surface = norm_surface(problem, coarse_step)
    best = surface.points[int(np.argmin(surface.values))]
    step = coarse_step

    for round_no in range(refine_rounds):
        fine = step / REFINE_FACTOR
        axes = []
        for value, (lo, hi) in zip(best, problem.bounds):
            start = max(lo, value - REFINE_CELLS * step)
            stop = min(hi, value + REFINE_CELLS * step)
            axes.append(axis_grid(start, stop, fine))
        local = _surface(problem, axes)
        best = local.points[int(np.argmin(local.values))]
        step = fine
        logger.debug(f"Refinement round {round_no + 1}: step={step:g} best={best.tolist()}")

    sigma = problem.sigma_at(best)
    result = CompletionResult(
        values=[float(v) for v in best],
        norm=tail_sum(sigma, problem.effective_theta),
        sigma=[float(s) for s in sigma],
    )
    logger.info(f"Minimizer {result.values} with {problem.norm} norm {result.norm:.6g}")
    return result
