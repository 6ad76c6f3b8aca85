# src/model/oscillator.py
import logging
import math
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core.config import HBAR, default_points
from src.core.errors import DomainError, GridTooSmallError
from src.core.metrics import GRID_FAILURES
from src.special.hermite import length_scale, momentum_eigenfunction, oscillator_eigenfunction
from src.special.quadrature import GridKind, QuadratureGrid, make_grid
from src.tomogram.slices import Basis, NORMALIZATION_TOLERANCE, TomogramSlice

logger = logging.getLogger(__name__)

EXTENT_FACTOR = 8.0

# === 1. Parameters ===


class OscillatorParams(BaseModel):
    """
    Two identical oscillators (mass m, frequency ω) with coupling λ x₁x₂ m/2.

    The centre-of-mass and relative modes oscillate at ω_c = sqrt(ω² + λ/2)
    and ω_r = sqrt(ω² - λ/2); the Hamiltonian is bounded below only while
    |λ| < 2ω².
    """
    model_config = ConfigDict(frozen=True)

    mass: float = Field(1.0, gt=0.0)
    frequency: float = Field(..., gt=0.0)
    coupling: float = 0.0

    @model_validator(mode="after")
    def _check_positive_definite(self):
        if not abs(self.coupling) < 2.0 * self.frequency ** 2:
            raise DomainError(
                f"|coupling| must be < 2ω² = {2.0 * self.frequency ** 2!r}, got {self.coupling!r}"
            )
        return self

    @classmethod
    def from_coupling(cls, mass: float, frequency: float, coupling: float) -> "OscillatorParams":
        return cls(mass=mass, frequency=frequency, coupling=coupling)

    @classmethod
    def from_ratio(cls, eta: float, mass: float = 1.0) -> "OscillatorParams":
        """ω_r = 1, ω_c = η; ω² = (ω_c² + ω_r²)/2 and λ = ω_c² - ω_r²."""
        if not eta > 0 or not math.isfinite(eta):
            raise DomainError(f"eta must be positive and finite, got {eta}")
        return cls(mass=mass, frequency=math.sqrt(0.5 * (eta * eta + 1.0)), coupling=eta * eta - 1.0)

    @property
    def omega_c(self) -> float:
        return math.sqrt(self.frequency ** 2 + 0.5 * self.coupling)

    @property
    def omega_r(self) -> float:
        return math.sqrt(self.frequency ** 2 - 0.5 * self.coupling)

    @property
    def eta(self) -> float:
        return self.omega_c / self.omega_r


def from_ratio(eta: float) -> OscillatorParams:
    return OscillatorParams.from_ratio(eta)


# === 2. Product eigenstates |n_c, n_r> ===


class ProductEigenstate(BaseModel):
    model_config = ConfigDict(frozen=True)

    params: OscillatorParams
    n_c: int = Field(0, ge=0)
    n_r: int = Field(0, ge=0)

    @property
    def com_mass(self) -> float:
        return 2.0 * self.params.mass

    @property
    def rel_mass(self) -> float:
        return 0.5 * self.params.mass

    @property
    def length_c(self) -> float:
        """L_c = sqrt(ħ / 2mω_c)"""
        return length_scale(self.com_mass, self.params.omega_c)

    @property
    def length_r(self) -> float:
        """L_r = sqrt(2ħ / mω_r)"""
        return length_scale(self.rel_mass, self.params.omega_r)

    @property
    def max_quantum(self) -> int:
        return max(self.n_c, self.n_r)


def energy(state: ProductEigenstate) -> float:
    p = state.params
    return HBAR * p.omega_c * (state.n_c + 0.5) + HBAR * p.omega_r * (state.n_r + 0.5)


def position_wavefunction(state: ProductEigenstate, x1, x2) -> np.ndarray:
    """ψ(x₁, x₂) = χ_{n_c}((x₁+x₂)/2) χ_{n_r}(x₁-x₂); real for every eigenstate."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    p = state.params
    com = oscillator_eigenfunction(state.n_c, state.com_mass, p.omega_c, 0.5 * (x1 + x2))
    rel = oscillator_eigenfunction(state.n_r, state.rel_mass, p.omega_r, x1 - x2)
    return com * rel


def momentum_wavefunction(state: ProductEigenstate, p1, p2) -> np.ndarray:
    """ψ̃(p₁, p₂) = φ_{n_c}(p₁+p₂) φ_{n_r}((p₁-p₂)/2)"""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    p = state.params
    com = momentum_eigenfunction(state.n_c, state.com_mass, p.omega_c, p1 + p2)
    rel = momentum_eigenfunction(state.n_r, state.rel_mass, p.omega_r, 0.5 * (p1 - p2))
    return com * rel


# === 3. Grids ===


def position_extent(state: ProductEigenstate) -> float:
    return EXTENT_FACTOR * max(state.length_c, state.length_r) * math.sqrt(state.max_quantum + 1)


def momentum_extent(state: ProductEigenstate) -> float:
    """
    (p₁+p₂)/2 spreads over ħ/2L_c and p₁-p₂ over 2ħ/L_r, the momentum
    counterparts of L_c and L_r. The momentum grid at η therefore coincides
    with the position grid at 1/η, where the two slices are the same density.
    """
    scale = max(HBAR / (2.0 * state.length_c), 2.0 * HBAR / state.length_r)
    return EXTENT_FACTOR * scale * math.sqrt(state.max_quantum + 1)


def default_position_grid(
    state: ProductEigenstate,
    points: Optional[int] = None,
    half_width: Optional[float] = None,
    kind=GridKind.uniform_trapezoid,
) -> QuadratureGrid:
    return make_grid(kind, half_width or position_extent(state), points or default_points())


def default_momentum_grid(
    state: ProductEigenstate,
    points: Optional[int] = None,
    half_width: Optional[float] = None,
    kind=GridKind.uniform_trapezoid,
) -> QuadratureGrid:
    return make_grid(kind, half_width or momentum_extent(state), points or default_points())


def slice_grids(
    state: ProductEigenstate,
    points: Optional[int] = None,
    half_width: Optional[float] = None,
    kind=GridKind.uniform_trapezoid,
) -> Tuple[QuadratureGrid, QuadratureGrid]:
    """
    Position and momentum grids for one state. An explicit half-width sets the
    position grid and the momentum grid scales with it, so a widened
    override keeps the same momentum-to-position extent ratio as the defaults.
    """
    momentum_width = None
    if half_width is not None:
        momentum_width = half_width * momentum_extent(state) / position_extent(state)
    return (
        default_position_grid(state, points=points, half_width=half_width, kind=kind),
        default_momentum_grid(state, points=points, half_width=momentum_width, kind=kind),
    )


# === 4. Densities and the reduced kernel ===


def _labels(state: ProductEigenstate) -> dict:
    return {"eta": state.params.eta, "n_c": state.n_c, "n_r": state.n_r}


def joint_position_density(state: ProductEigenstate, grid: QuadratureGrid) -> TomogramSlice:
    psi = position_wavefunction(state, grid.nodes[:, None], grid.nodes[None, :])
    return TomogramSlice.from_joint(Basis.position, grid, grid, psi * psi, **_labels(state))


def joint_momentum_density(state: ProductEigenstate, grid: QuadratureGrid) -> TomogramSlice:
    psi = momentum_wavefunction(state, grid.nodes[:, None], grid.nodes[None, :])
    return TomogramSlice.from_joint(Basis.momentum, grid, grid, np.abs(psi) ** 2, **_labels(state))


def weighted_amplitude(state: ProductEigenstate, grid: QuadratureGrid) -> np.ndarray:
    """A_ij = sqrt(w_i) ψ(x_i, x_j) sqrt(w_j); its squared singular values are the Schmidt coefficients."""
    root_w = np.sqrt(grid.weights)
    psi = position_wavefunction(state, grid.nodes[:, None], grid.nodes[None, :])
    return root_w[:, None] * psi * root_w[None, :]


def reduced_density_kernel(state: ProductEigenstate, grid: QuadratureGrid) -> np.ndarray:
    """K(x₁, x₁') = ∫ dx₂ ψ(x₁, x₂) ψ(x₁', x₂) by quadrature over oscillator 2."""
    psi = position_wavefunction(state, grid.nodes[:, None], grid.nodes[None, :])
    kernel = (psi * grid.weights[None, :]) @ psi.T
    trace = float(grid.weights @ np.diag(kernel))
    if abs(1.0 - trace) > NORMALIZATION_TOLERANCE:
        GRID_FAILURES.labels(what="reduced_kernel").inc()
        raise GridTooSmallError("reduced kernel trace", abs(1.0 - trace), grid.half_width, grid.points)
    return kernel


def ground_kernel_closed(params: OscillatorParams, x, xp) -> np.ndarray:
    """Closed-form reduced kernel of |0, 0> with c₁ = mω_c/4ħ, c₂ = mω_r/4ħ."""
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    c1 = params.mass * params.omega_c / (4.0 * HBAR)
    c2 = params.mass * params.omega_r / (4.0 * HBAR)
    total = c1 + c2
    prefactor = math.sqrt(8.0 * c1 * c2 / (math.pi * total))
    exponent = -total * (x * x + xp * xp) + (c1 - c2) ** 2 / (2.0 * total) * (x + xp) ** 2
    return prefactor * np.exp(exponent)
