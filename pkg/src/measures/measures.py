# src/measures/measures.py
import logging
import math
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import xlogy

from src.core.config import HBAR
from src.core.errors import DomainError, GridTooSmallError, NumericalFailureError
from src.core.metrics import GRID_FAILURES, SCHMIDT_CLAMPED, SCHMIDT_DECOMPOSITIONS
from src.model.oscillator import (
    OscillatorParams,
    ProductEigenstate,
    default_position_grid,
    weighted_amplitude,
)
from src.special.hermite import log_binomial, mehler_kernel
from src.special.quadrature import QuadratureGrid

logger = logging.getLogger(__name__)

DEFAULT_CUTOFF = 1e-14
CLAMP_SILENT = 1e-10
CLAMP_LIMIT = 1e-8
SUM_TOLERANCE = 1e-8
TRACE_TOLERANCE = 1e-6
SYMMETRY_TOLERANCE = 1e-10
LN2 = math.log(2.0)

# === 1. Schemas ===


class SchmidtSpectrum(BaseModel):
    model_config = ConfigDict(frozen=True)

    coefficients: List[float]
    truncation_residual: float = 0.0

    @model_validator(mode="after")
    def _check_invariants(self):
        c = self.coefficients
        if any(v < 0.0 for v in c):
            raise NumericalFailureError("Schmidt coefficients must be nonnegative after clamping")
        if any(a < b for a, b in zip(c, c[1:])):
            raise NumericalFailureError("Schmidt coefficients must be in descending order")
        total = math.fsum(c) + self.truncation_residual
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise NumericalFailureError(f"Schmidt coefficients plus residual sum to {total!r}, not 1")
        return self

    @property
    def rank(self) -> int:
        return sum(1 for v in self.coefficients if v > 0.0)


class EntropyPair(BaseModel):
    model_config = ConfigDict(frozen=True)

    sle: float = Field(..., ge=0.0, lt=1.0)
    svne: float = Field(..., ge=0.0)


class HeatBathEquivalent(BaseModel):
    """
    Thermal oscillator of frequency ϖ at inverse temperature β whose density
    matrix coincides with the ground-state reduced kernel. β is None at the
    uncoupled point, where the reduced state is pure (zero temperature).
    """
    model_config = ConfigDict(frozen=True)

    varpi: float = Field(..., gt=0.0)
    beta: Optional[float] = Field(None, gt=0.0)
    mass: float = Field(1.0, gt=0.0)

    @property
    def zero_temperature(self) -> bool:
        return self.beta is None

    @property
    def reduced_energy(self) -> float:
        """βħϖ"""
        return math.inf if self.beta is None else self.beta * HBAR * self.varpi

    @property
    def ratio(self) -> float:
        """q = e^{-βħϖ}, the common ratio of the geometric spectrum."""
        return 0.0 if self.beta is None else math.exp(-self.reduced_energy)

    def spectrum(self, cutoff: float = DEFAULT_CUTOFF) -> SchmidtSpectrum:
        q = self.ratio
        if q == 0.0:
            return SchmidtSpectrum(coefficients=[1.0])
        values = []
        value = 1.0 - q
        while value >= cutoff:
            values.append(value)
            value *= q
        # the dropped tail of a geometric series is exactly q^N
        return SchmidtSpectrum(coefficients=values, truncation_residual=q ** len(values))

    def sle(self) -> float:
        """1 - tanh(βħϖ/2), written as 2q/(1+q)."""
        q = self.ratio
        return 2.0 * q / (1.0 + q)

    def svne(self) -> float:
        q = self.ratio
        if q == 0.0:
            return 0.0
        return -math.log1p(-q) + self.reduced_energy * q / (1.0 - q)


class EntanglementSplit(BaseModel):
    """Entropies of |0, n_r> split into the state-induced part (λ → 0) and the coupling-induced rest."""
    model_config = ConfigDict(frozen=True)

    total: EntropyPair
    state: EntropyPair
    coupling_sle: float
    coupling_svne: float


# === 2. Entropies of a spectrum ===


def entropies(spectrum: SchmidtSpectrum) -> EntropyPair:
    c = np.asarray(spectrum.coefficients, dtype=float)
    sle = 1.0 - float(np.sum(c * c))
    svne = -float(np.sum(xlogy(c, c)))
    # roundoff on a pure spectrum can leave -1e-16
    return EntropyPair(sle=max(sle, 0.0), svne=max(svne, 0.0))


def _spectrum_from_values(values: np.ndarray, cutoff: float) -> SchmidtSpectrum:
    values = np.sort(np.asarray(values, dtype=float))[::-1]
    lowest = float(values[-1]) if values.size else 0.0
    if lowest < -CLAMP_LIMIT:
        raise NumericalFailureError(
            f"Schmidt coefficient {lowest:.3e} below -{CLAMP_LIMIT:g}: grid or state is inconsistent"
        )
    negative = values < 0.0
    if np.any(negative):
        if lowest < -CLAMP_SILENT:
            logger.warning(f"Clamping Schmidt coefficient {lowest:.3e} to zero")
        SCHMIDT_CLAMPED.inc(int(np.count_nonzero(negative)))
        values = np.where(negative, 0.0, values)
    kept = values[values >= cutoff]
    residual = 1.0 - math.fsum(kept)
    return SchmidtSpectrum(coefficients=kept.tolist(), truncation_residual=residual)


# === 3. Uncoupled oscillators (λ = 0) ===


def schmidt_uncoupled(nu_c: int, nu_r: int) -> SchmidtSpectrum:
    """
    Schmidt coefficients of |ν_c, ν_r> at λ = 0 in the |ν₁, ν₂> basis, ν₁ + ν₂ = ν_c + ν_r.

    The amplitude for ν₂ = k + k' reduces to
        S(ν₂) [ν₁! ν₂! / (ν_c! ν_r! 2^N)]^{1/2},  S(ν₂) = Σ (-1)^{k'} C(ν_r, k) C(ν_c, k'),
    with S an exact integer; the squared amplitude is assembled in log space.
    """
    if nu_c < 0 or nu_r < 0:
        raise DomainError(f"quantum numbers must be nonnegative, got ({nu_c}, {nu_r})")
    total = nu_c + nu_r
    log_norm = math.lgamma(nu_c + 1) + math.lgamma(nu_r + 1) + total * LN2
    values = []
    for nu_2 in range(total + 1):
        nu_1 = total - nu_2
        signed = sum(
            (-1) ** k_prime * math.comb(nu_r, nu_2 - k_prime) * math.comb(nu_c, k_prime)
            for k_prime in range(max(0, nu_2 - nu_r), min(nu_c, nu_2) + 1)
        )
        if signed == 0:
            values.append(0.0)
            continue
        log_value = 2.0 * math.log(abs(signed)) + math.lgamma(nu_1 + 1) + math.lgamma(nu_2 + 1) - log_norm
        values.append(math.exp(log_value))
    values.sort(reverse=True)
    return SchmidtSpectrum(coefficients=values, truncation_residual=1.0 - math.fsum(values))


def sle_uncoupled(nu_r: int) -> float:
    """1 - 2^{-2ν_r} C(2ν_r, ν_r)"""
    if nu_r < 0:
        raise DomainError(f"nu_r must be nonnegative, got {nu_r}")
    return -math.expm1(log_binomial(2 * nu_r, nu_r) - 2 * nu_r * LN2)


def svne_uncoupled(nu_r: int) -> float:
    """ν_r ln 2 - 2^{-ν_r} Σ_l C(ν_r, l) ln C(ν_r, l)"""
    if nu_r < 0:
        raise DomainError(f"nu_r must be nonnegative, got {nu_r}")
    logs = [log_binomial(nu_r, l) for l in range(nu_r + 1)]
    weighted = math.fsum(math.exp(lc - nu_r * LN2) * lc for lc in logs)
    return nu_r * LN2 - weighted


def sle_asymptote_check(nu_r: int) -> float:
    """|SLE(ν_r) - (1 - (π ν_r)^{-1/2})|"""
    if nu_r < 1:
        raise DomainError(f"asymptote needs nu_r >= 1, got {nu_r}")
    return abs(sle_uncoupled(nu_r) - (1.0 - (math.pi * nu_r) ** -0.5))


# === 4. Ground state (n_c = n_r = 0) closed forms ===


def _check_eta(eta: float) -> None:
    if not eta > 0 or not math.isfinite(eta):
        raise DomainError(f"eta must be positive and finite, got {eta}")


def sle_ground_closed(eta: float) -> float:
    """(1 - √η)² / (1 + η)"""
    _check_eta(eta)
    return (1.0 - math.sqrt(eta)) ** 2 / (1.0 + eta)


def svne_ground_closed(eta: float) -> float:
    _check_eta(eta)
    s = math.sqrt(eta)
    t = min(s, 1.0 / s)
    if t >= 1.0:
        return 0.0
    # ln[(1+√η)/(1-√η)]² = 4 artanh(t) on both sides of η = 1
    first = -math.log(4.0 * s) + 2.0 * math.log1p(s)
    second = (1.0 - s) ** 2 / (4.0 * s) * 4.0 * math.atanh(t)
    return first + second


def heat_bath_map(params: OscillatorParams) -> HeatBathEquivalent:
    """
    ϖ = sqrt(ω_c ω_r) and βħϖ = ln[(1+√η')/(1-√η')]², η' = min(η, 1/η).

    The printed relation is real only for η < 1; the reduced spectrum is
    invariant under η → 1/η, which fixes the other branch.
    """
    varpi = math.sqrt(params.omega_c * params.omega_r)
    eta = params.eta
    t = math.sqrt(min(eta, 1.0 / eta))
    if t >= 1.0:
        return HeatBathEquivalent(varpi=varpi, beta=None, mass=params.mass)
    return HeatBathEquivalent(varpi=varpi, beta=4.0 * math.atanh(t) / (HBAR * varpi), mass=params.mass)


def thermal_kernel(bath: HeatBathEquivalent, x, xp) -> np.ndarray:
    """⟨x|ρ̃|x'⟩ = Σ λ_n χ_n(x) χ_n(x'), summed with Mehler's formula at s = e^{-βħϖ}."""
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    k = math.sqrt(bath.mass * bath.varpi / HBAR)
    u, v = k * x, k * xp
    q = bath.ratio
    prefactor = (1.0 - q) * k / math.sqrt(math.pi)
    return prefactor * np.exp(-0.5 * (u * u + v * v)) * mehler_kernel(u, v, q)


# === 5. Numerical Schmidt decomposition ===


def schmidt_numeric(kernel: np.ndarray, grid: QuadratureGrid, cutoff: float = DEFAULT_CUTOFF) -> SchmidtSpectrum:
    """Eigenvalues of √w_i K(x_i, x_j) √w_j."""
    kernel = np.asarray(kernel, dtype=float)
    asymmetry = float(np.max(np.abs(kernel - kernel.T)))
    if asymmetry > SYMMETRY_TOLERANCE:
        raise NumericalFailureError(f"reduced kernel is not symmetric (max deviation {asymmetry:.3e})")
    trace = float(grid.weights @ np.diag(kernel))
    if abs(1.0 - trace) > TRACE_TOLERANCE:
        GRID_FAILURES.labels(what="schmidt_trace").inc()
        raise GridTooSmallError("reduced kernel trace", abs(1.0 - trace), grid.half_width, grid.points)
    root_w = np.sqrt(grid.weights)
    matrix = root_w[:, None] * kernel * root_w[None, :]
    SCHMIDT_DECOMPOSITIONS.labels(route="eigh").inc()
    return _spectrum_from_values(np.linalg.eigvalsh(matrix), cutoff)


def schmidt_from_state(
    state: ProductEigenstate,
    grid: Optional[QuadratureGrid] = None,
    cutoff: float = DEFAULT_CUTOFF,
) -> SchmidtSpectrum:
    """Squared singular values of the weighted amplitude matrix (the default route)."""
    grid = grid or default_position_grid(state)
    amplitude = weighted_amplitude(state, grid)
    singular = np.linalg.svd(amplitude, compute_uv=False)
    values = singular * singular
    mass = float(np.sum(values))
    if abs(1.0 - mass) > TRACE_TOLERANCE:
        GRID_FAILURES.labels(what="schmidt_mass").inc()
        raise GridTooSmallError("amplitude matrix norm", abs(1.0 - mass), grid.half_width, grid.points)
    SCHMIDT_DECOMPOSITIONS.labels(route="svd").inc()
    return _spectrum_from_values(values, cutoff)


def numeric_entropies(
    params: OscillatorParams,
    n_r: int,
    n_c: int = 0,
    points: Optional[int] = None,
    half_width: Optional[float] = None,
) -> EntropyPair:
    state = ProductEigenstate(params=params, n_c=n_c, n_r=n_r)
    grid = default_position_grid(state, points=points, half_width=half_width)
    return entropies(schmidt_from_state(state, grid))


def entanglement_split(params: OscillatorParams, n_r: int, points: Optional[int] = None) -> EntanglementSplit:
    total = numeric_entropies(params, n_r, points=points)
    state = EntropyPair(sle=sle_uncoupled(n_r), svne=svne_uncoupled(n_r))
    return EntanglementSplit(
        total=total,
        state=state,
        coupling_sle=total.sle - state.sle,
        coupling_svne=total.svne - state.svne,
    )
