# src/special/quadrature.py
import logging
import math
from enum import Enum
from typing import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.special import roots_hermite

from src.core.errors import DomainError
from src.special.hermite import log_abs_hermite

logger = logging.getLogger(__name__)

MIN_POINTS = 16


class GridKind(str, Enum):
    gauss_hermite = "gauss-hermite"
    uniform_trapezoid = "uniform-trapezoid"


class QuadratureGrid(BaseModel):
    """
    Nodes and weights for ∫ f(x) dx ≈ Σ w_i f(x_i).

    Gauss–Hermite weights are stored pre-multiplied by e^{(x/scale)²} so the
    same rule integrates plain integrands; `hermite_weights` undoes that.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: GridKind
    nodes: np.ndarray
    weights: np.ndarray
    half_width: float
    scale: float = 1.0

    @model_validator(mode="after")
    def _check_invariants(self):
        if self.nodes.ndim != 1 or self.nodes.shape != self.weights.shape:
            raise DomainError("nodes and weights must be 1D arrays of equal length")
        if not np.all(np.isfinite(self.weights)) or not np.all(self.weights > 0):
            raise DomainError("quadrature weights must be finite and strictly positive")
        if not np.all(np.diff(self.nodes) > 0):
            raise DomainError("quadrature nodes must be strictly increasing")
        return self

    @property
    def points(self) -> int:
        return int(self.nodes.size)

    @property
    def hermite_weights(self) -> np.ndarray:
        """Weights against e^{-u²} in the unscaled variable u = x / scale."""
        u = self.nodes / self.scale
        return self.weights * np.exp(-u * u) / self.scale


def _gauss_hermite(half_width: float, points: int) -> QuadratureGrid:
    roots, _ = roots_hermite(points)
    # w_i e^{x_i²} = 1 / (n h_{n-1}(x_i)²), taken in log space for large grids
    scaled = np.exp(-math.log(points) - 2.0 * log_abs_hermite(points - 1, roots))
    scale = half_width / float(roots[-1])
    return QuadratureGrid(
        kind=GridKind.gauss_hermite,
        nodes=scale * roots,
        weights=scale * scaled,
        half_width=half_width,
        scale=scale,
    )


def _uniform_trapezoid(half_width: float, points: int) -> QuadratureGrid:
    nodes = np.linspace(-half_width, half_width, points)
    step = 2.0 * half_width / (points - 1)
    weights = np.full(points, step)
    weights[0] = weights[-1] = 0.5 * step
    return QuadratureGrid(
        kind=GridKind.uniform_trapezoid,
        nodes=nodes,
        weights=weights,
        half_width=half_width,
    )


def make_grid(kind, half_width: float, points: int) -> QuadratureGrid:
    kind = GridKind(kind)
    if not half_width > 0 or not math.isfinite(half_width):
        raise DomainError(f"half_width must be positive and finite, got {half_width}")
    if points < MIN_POINTS:
        raise DomainError(f"a grid needs at least {MIN_POINTS} points, got {points}")
    if kind is GridKind.gauss_hermite:
        return _gauss_hermite(half_width, points)
    return _uniform_trapezoid(half_width, points)


def integrate(grid: QuadratureGrid, values: np.ndarray) -> float:
    return float(np.dot(grid.weights, values))


def integrate_2d(grid1: QuadratureGrid, grid2: QuadratureGrid, values: np.ndarray) -> float:
    """Σ_ij w1_i w2_j f_ij with a fixed summation order."""
    return float(grid1.weights @ values @ grid2.weights)


def grid_convergence(
    integrand: Callable[[np.ndarray], np.ndarray],
    kind,
    half_width: float,
    points: int,
) -> float:
    """|I(2·points) - I(points)| for a 1D integrand."""
    coarse = make_grid(kind, half_width, points)
    fine = make_grid(kind, half_width, 2 * points)
    delta = abs(integrate(fine, integrand(fine.nodes)) - integrate(coarse, integrand(coarse.nodes)))
    logger.debug(f"grid convergence at {points} -> {2 * points} points: {delta:.3e}")
    return delta
