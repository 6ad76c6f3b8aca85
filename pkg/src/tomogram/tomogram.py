# src/tomogram/tomogram.py
import logging
import math
from enum import Enum
from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.core.errors import DomainError, QuadratureFailureError, SupportMismatchError
from src.core.metrics import INDICATOR_EVALUATIONS
from src.model.oscillator import (
    OscillatorParams,
    ProductEigenstate,
    default_momentum_grid,
    default_position_grid,
    joint_momentum_density,
    joint_position_density,
    position_wavefunction,
    slice_grids,
)
from src.special.quadrature import QuadratureGrid, integrate, integrate_2d
from src.tomogram.slices import Basis, TomogramSlice

logger = logging.getLogger(__name__)

KL_FLOOR = 1e-300
CLAMP_TOLERANCE = 1e-10
IPR_ETA = 0.25
IPR_ETA_TOLERANCE = 1e-12
IPR_EXTENT = 8.0


class Indicator(str, Enum):
    bd = "bd"
    kl = "kl"
    ipr = "ipr"


class SliceKind(str, Enum):
    position = "position"
    momentum = "momentum"
    average = "average"


class IndicatorResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    indicator: Indicator
    slice: SliceKind
    value: float = Field(..., ge=0.0)
    per_slice: Dict[str, float] = Field(default_factory=dict)
    eta: Optional[float] = None
    n_r: Optional[int] = None


# === 1. Slices ===


def position_slice(state: ProductEigenstate, grid: Optional[QuadratureGrid] = None) -> TomogramSlice:
    return joint_position_density(state, grid or default_position_grid(state))


def momentum_slice(state: ProductEigenstate, grid: Optional[QuadratureGrid] = None) -> TomogramSlice:
    return joint_momentum_density(state, grid or default_momentum_grid(state))


def _check_ipr_eta(eta: float) -> None:
    if abs(eta - IPR_ETA) > IPR_ETA_TOLERANCE:
        raise DomainError(
            f"the IPR indicator needs L_c = L_r, i.e. eta = 1/4; got eta={eta!r}"
        )


def ipr_slice(state: ProductEigenstate, points: Optional[int] = None, half_width: Optional[float] = None) -> TomogramSlice:
    """
    Position slice in the dimensionless coordinates x̄_k = x_k / L, with
    P̄(x̄₁, x̄₂) = L² P(L x̄₁, L x̄₂). Only defined where L_c = L_r = L.
    """
    _check_ipr_eta(state.params.eta)
    scale = state.length_c
    extent = half_width or IPR_EXTENT * math.sqrt(state.max_quantum + 1)
    grid = default_position_grid(state, points=points, half_width=extent)
    x = scale * grid.nodes
    psi = position_wavefunction(state, x[:, None], x[None, :])
    return TomogramSlice.from_joint(
        Basis.position,
        grid,
        grid,
        scale * scale * psi * psi,
        eta=state.params.eta,
        n_c=state.n_c,
        n_r=state.n_r,
        dimensionless=True,
    )


# === 2. Indicators ===


def _clamped(name: str, value: float) -> float:
    if value < -CLAMP_TOLERANCE:
        raise QuadratureFailureError(f"{name} evaluated to {value:.3e} < 0")
    if value < 0.0:
        logger.debug(f"{name} clamped from {value:.3e} to 0")
        return 0.0
    return value


def epsilon_bd(tomogram: TomogramSlice) -> float:
    """-log₂ ∬ [P(X,Y) P₁(X) P₂(Y)]^{1/2} dX dY"""
    root = np.sqrt(tomogram.joint) * np.sqrt(tomogram.marginal1)[:, None] * np.sqrt(tomogram.marginal2)[None, :]
    overlap = integrate_2d(tomogram.grid1, tomogram.grid2, root)
    INDICATOR_EVALUATIONS.labels(indicator="bd", slice=tomogram.basis.value).inc()
    return _clamped("epsilon_bd", -math.log2(overlap))


def epsilon_kl(tomogram: TomogramSlice, floor: float = KL_FLOOR) -> float:
    """
    ∬ P [log₂ P - log₂ P₁ - log₂ P₂]; points with P <= floor contribute nothing.
    The marginals enter separately since their product underflows in the tails.
    """
    joint = tomogram.joint
    m1, m2 = tomogram.marginal1, tomogram.marginal2
    support = joint > floor
    mismatch = support & ((m1[:, None] <= 0.0) | (m2[None, :] <= 0.0))
    if np.any(mismatch):
        index = tuple(int(i) for i in np.argwhere(mismatch)[0])
        point = (tomogram.grid1.nodes[index[0]], tomogram.grid2.nodes[index[1]])
        raise SupportMismatchError(index, point, float(joint[index]))
    log_ratio = (
        np.log2(np.maximum(joint, floor))
        - np.log2(np.where(m1 > 0.0, m1, 1.0))[:, None]
        - np.log2(np.where(m2 > 0.0, m2, 1.0))[None, :]
    )
    integrand = np.where(support, joint * log_ratio, 0.0)
    INDICATOR_EVALUATIONS.labels(indicator="kl", slice=tomogram.basis.value).inc()
    return _clamped("epsilon_kl", integrate_2d(tomogram.grid1, tomogram.grid2, integrand))


def epsilon_ipr(tomogram: TomogramSlice) -> float:
    """1 + ∬ P̄² - ∫ P̄₁² - ∫ P̄₂², on a dimensionless position slice."""
    if not tomogram.dimensionless or tomogram.basis is not Basis.position:
        raise DomainError("epsilon_ipr needs the dimensionless position slice built by ipr_slice")
    if tomogram.eta is None:
        raise DomainError("epsilon_ipr needs a slice labelled with its eta")
    _check_ipr_eta(tomogram.eta)
    joint_purity = integrate_2d(tomogram.grid1, tomogram.grid2, tomogram.joint ** 2)
    purity1 = integrate(tomogram.grid1, tomogram.marginal1 ** 2)
    purity2 = integrate(tomogram.grid2, tomogram.marginal2 ** 2)
    INDICATOR_EVALUATIONS.labels(indicator="ipr", slice="position").inc()
    return 1.0 + joint_purity - purity1 - purity2


_SLICE_INDICATORS = {Indicator.bd: epsilon_bd, Indicator.kl: epsilon_kl}


def averaged_indicator(
    indicator,
    state: ProductEigenstate,
    position_grid: Optional[QuadratureGrid] = None,
    momentum_grid: Optional[QuadratureGrid] = None,
) -> IndicatorResult:
    """Arithmetic mean of the position-slice and momentum-slice values."""
    indicator = Indicator(indicator)
    if indicator not in _SLICE_INDICATORS:
        raise DomainError(f"only bd and kl can be averaged over slices, got {indicator.value}")
    fn = _SLICE_INDICATORS[indicator]
    per_slice = {
        "position": fn(position_slice(state, position_grid)),
        "momentum": fn(momentum_slice(state, momentum_grid)),
    }
    return IndicatorResult(
        indicator=indicator,
        slice=SliceKind.average,
        value=0.5 * (per_slice["position"] + per_slice["momentum"]),
        per_slice=per_slice,
        eta=state.params.eta,
        n_r=state.n_r,
    )


def evaluate_indicator(
    indicator,
    slice_kind,
    state: ProductEigenstate,
    points: Optional[int] = None,
    half_width: Optional[float] = None,
) -> IndicatorResult:
    indicator = Indicator(indicator)
    slice_kind = SliceKind(slice_kind)
    if indicator is Indicator.ipr:
        if slice_kind is not SliceKind.position:
            raise DomainError("the IPR indicator is defined on the position slice only")
        value = epsilon_ipr(ipr_slice(state, points=points, half_width=half_width))
        return IndicatorResult(indicator=indicator, slice=slice_kind, value=value, eta=state.params.eta, n_r=state.n_r)
    position_grid, momentum_grid = slice_grids(state, points=points, half_width=half_width)
    if slice_kind is SliceKind.average:
        return averaged_indicator(indicator, state, position_grid, momentum_grid)
    fn = _SLICE_INDICATORS[indicator]
    if slice_kind is SliceKind.position:
        value = fn(position_slice(state, position_grid))
    else:
        value = fn(momentum_slice(state, momentum_grid))
    return IndicatorResult(
        indicator=indicator,
        slice=slice_kind,
        value=value,
        per_slice={slice_kind.value: value},
        eta=state.params.eta,
        n_r=state.n_r,
    )


# === 3. Sweeps and probes ===


def sweep_indicator(
    indicator,
    slice_kind,
    n_r: int,
    etas: Sequence[float],
    points: Optional[int] = None,
    n_c: int = 0,
) -> List[IndicatorResult]:
    return [
        evaluate_indicator(
            indicator,
            slice_kind,
            ProductEigenstate(params=OscillatorParams.from_ratio(eta), n_c=n_c, n_r=n_r),
            points=points,
        )
        for eta in etas
    ]


def divergence_probe(
    indicator,
    n_r: int,
    etas: Sequence[float],
    slice_kind=SliceKind.average,
    points: Optional[int] = None,
) -> List[float]:
    """Indicator values along η decreasing towards 0; grids widen with L_c ~ η^{-1/2}."""
    etas = list(etas)
    if any(not eta > 0 for eta in etas):
        raise DomainError("divergence probe needs positive eta values")
    if any(b >= a for a, b in zip(etas, etas[1:])):
        raise DomainError("divergence probe needs a strictly decreasing eta sequence")
    return [result.value for result in sweep_indicator(indicator, slice_kind, n_r, etas, points=points)]


def interior_minimum(values: Sequence[float]) -> Optional[int]:
    """Index of the minimum if both neighbours are strictly larger, else None."""
    values = np.asarray(values, dtype=float)
    index = int(np.argmin(values))
    if 0 < index < values.size - 1 and values[index - 1] > values[index] < values[index + 1]:
        return index
    return None


# === 4. Gaussian oracles ===


def slice_correlation(tomogram: TomogramSlice) -> float:
    """Correlation coefficient of the joint density from quadrature moments."""
    x, y = tomogram.grid1.nodes, tomogram.grid2.nodes
    mean_x = integrate(tomogram.grid1, x * tomogram.marginal1)
    mean_y = integrate(tomogram.grid2, y * tomogram.marginal2)
    dx, dy = x - mean_x, y - mean_y
    var_x = integrate(tomogram.grid1, dx * dx * tomogram.marginal1)
    var_y = integrate(tomogram.grid2, dy * dy * tomogram.marginal2)
    cov = integrate_2d(tomogram.grid1, tomogram.grid2, dx[:, None] * dy[None, :] * tomogram.joint)
    return cov / math.sqrt(var_x * var_y)


def gaussian_mutual_information(r: float) -> float:
    """-½ log₂(1 - r²), the KL divergence of a bivariate Gaussian from its marginals."""
    if not abs(r) < 1.0:
        raise DomainError(f"correlation must satisfy |r| < 1, got {r}")
    return -0.5 * math.log2(1.0 - r * r)


def gaussian_bhattacharyya(r: float) -> float:
    if not abs(r) < 1.0:
        raise DomainError(f"correlation must satisfy |r| < 1, got {r}")
    return -math.log2((1.0 - r * r) ** 0.25 / math.sqrt(1.0 - 0.25 * r * r))


def log_symmetric_etas(eta_max: float, points: int) -> List[float]:
    """Odd number of η values, log-spaced on [1/eta_max, eta_max], in exact reciprocal pairs around 1."""
    if points < 3 or points % 2 == 0:
        raise DomainError(f"a log-symmetric grid needs an odd point count >= 3, got {points}")
    if not eta_max > 1.0:
        raise DomainError(f"eta_max must exceed 1, got {eta_max}")
    upper = np.geomspace(1.0, eta_max, points // 2 + 1)
    upper[0] = 1.0
    lower = 1.0 / upper[:0:-1]
    return [float(v) for v in np.concatenate([lower, upper])]
