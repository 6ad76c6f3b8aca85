# src/tomogram/slices.py
import logging
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from src.core.errors import DomainError, GridTooSmallError
from src.core.metrics import GRID_FAILURES
from src.special.quadrature import QuadratureGrid, integrate_2d

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-6
NORMALIZED_WITHIN = 1e-8
MARGINAL_WITHIN = 1e-10


class Basis(str, Enum):
    position = "position"
    momentum = "momentum"


class TomogramSlice(BaseModel):
    """Joint density of one tomogram slice on grid1 × grid2, with both marginals."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    basis: Basis
    grid1: QuadratureGrid
    grid2: QuadratureGrid
    joint: np.ndarray
    marginal1: np.ndarray
    marginal2: np.ndarray
    eta: Optional[float] = None
    n_c: Optional[int] = None
    n_r: Optional[int] = None
    dimensionless: bool = False

    @model_validator(mode="after")
    def _check_invariants(self):
        shape = (self.grid1.points, self.grid2.points)
        if self.joint.shape != shape:
            raise DomainError(f"joint density has shape {self.joint.shape}, expected {shape}")
        if np.any(self.joint < 0) or np.any(self.marginal1 < 0) or np.any(self.marginal2 < 0):
            raise DomainError("tomogram densities must be nonnegative")
        total = integrate_2d(self.grid1, self.grid2, self.joint)
        if abs(total - 1.0) > NORMALIZED_WITHIN:
            raise DomainError(f"joint density integrates to {total!r}, not 1")
        if np.max(np.abs(self.marginal1 - self.joint @ self.grid2.weights)) > MARGINAL_WITHIN:
            raise DomainError("marginal1 is not the contraction of the joint density")
        if np.max(np.abs(self.marginal2 - self.grid1.weights @ self.joint)) > MARGINAL_WITHIN:
            raise DomainError("marginal2 is not the contraction of the joint density")
        return self

    @classmethod
    def from_joint(cls, basis, grid1: QuadratureGrid, grid2: QuadratureGrid, joint: np.ndarray, **labels):
        """
        Check the mass captured by the grid, rescale it to exactly one and
        contract the marginals. A deficit above 1e-6 means the grid is too
        small or too coarse for the state.
        """
        joint = np.asarray(joint, dtype=float)
        total = integrate_2d(grid1, grid2, joint)
        deficit = abs(1.0 - total)
        if deficit > NORMALIZATION_TOLERANCE:
            GRID_FAILURES.labels(what=f"{Basis(basis).value}_density").inc()
            raise GridTooSmallError(
                f"{Basis(basis).value} density normalization", deficit, grid1.half_width, grid1.points
            )
        joint = joint / total
        return cls(
            basis=basis,
            grid1=grid1,
            grid2=grid2,
            joint=joint,
            marginal1=joint @ grid2.weights,
            marginal2=grid1.weights @ joint,
            **labels,
        )
