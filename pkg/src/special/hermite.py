# src/special/hermite.py
import logging
import math
from typing import Union

import numpy as np
from scipy.special import gammaln

from src.core.config import HBAR, max_hermite_order
from src.core.errors import DomainError, OrderOutOfRangeError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

_PI_QUARTER = math.pi ** -0.25
_RESCALE = 1e100
_LOG_RESCALE = math.log(_RESCALE)


# === 1. Normalized Hermite functions ===

def _check_order(n: int) -> None:
    if not isinstance(n, (int, np.integer)):
        raise TypeError(f"Hermite order must be an integer, got {type(n).__name__}")
    limit = max_hermite_order()
    if n < 0 or n > limit:
        raise OrderOutOfRangeError(int(n), limit)


def _scaled_recurrence(n_max: int, u: np.ndarray):
    """
    Yields (m, p_m, log_scale) for m = 0..n_max with h_m(u) = p_m e^{log_scale - u²/2}.

    The recurrence runs on the polynomial part, rescaled per element whenever
    it passes 1e100; the Gaussian is applied by the caller. Arrays are updated
    in place between yields.
    """
    log_scale = np.zeros_like(u)
    h_prev = np.full_like(u, _PI_QUARTER)
    yield 0, h_prev, log_scale
    if n_max == 0:
        return
    h_curr = math.sqrt(2.0) * u * h_prev
    yield 1, h_curr, log_scale
    for m in range(2, n_max + 1):
        h_prev, h_curr = h_curr, math.sqrt(2.0 / m) * u * h_curr - math.sqrt((m - 1) / m) * h_prev
        big = np.abs(h_curr) > _RESCALE
        if np.any(big):
            h_curr[big] /= _RESCALE
            h_prev[big] /= _RESCALE
            log_scale[big] += _LOG_RESCALE
        yield m, h_curr, log_scale


def _hermite_all(n_max: int, u: np.ndarray) -> np.ndarray:
    flat = np.atleast_1d(u)
    out = np.empty((n_max + 1,) + flat.shape)
    for m, poly, log_scale in _scaled_recurrence(n_max, flat):
        out[m] = poly * np.exp(log_scale - 0.5 * flat * flat)
    return out.reshape((n_max + 1,) + u.shape)


def _hermite_single(n: int, u: np.ndarray) -> np.ndarray:
    flat = np.atleast_1d(u)
    for _, poly, log_scale in _scaled_recurrence(n, flat):
        pass
    return (poly * np.exp(log_scale - 0.5 * flat * flat)).reshape(u.shape)


def log_abs_hermite(n: int, u: ArrayLike) -> np.ndarray:
    """ln|h_n(u)| without underflow at large |u|."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    for _, poly, log_scale in _scaled_recurrence(n, u):
        pass
    with np.errstate(divide="ignore"):
        return np.log(np.abs(poly)) + log_scale - 0.5 * u * u


def hermite_function(n: int, u: ArrayLike) -> np.ndarray:
    """
    h_n(u) = H_n(u) e^{-u²/2} / sqrt(2^n n! √π), L²-normalized in u.

    Three-term recurrence on the normalized polynomial part,
        p_n(u) = sqrt(2/n) u p_{n-1}(u) - sqrt((n-1)/n) p_{n-2}(u),
    with the Gaussian applied last, so the tails stay nonzero past |u| ~ 38.
    """
    _check_order(n)
    return _hermite_single(int(n), np.asarray(u, dtype=float))


def hermite_functions(n_max: int, u: ArrayLike) -> np.ndarray:
    """All of h_0 .. h_{n_max} at u; shape (n_max + 1,) + u.shape."""
    _check_order(n_max)
    return _hermite_all(int(n_max), np.asarray(u, dtype=float))


# === 2. Oscillator eigenfunctions ===

def _check_positive(name: str, value: float) -> None:
    if not value > 0:
        raise DomainError(f"{name} must be positive, got {value}")


def length_scale(mass: float, frequency: float) -> float:
    """sqrt(ħ / (m ω))"""
    _check_positive("mass", mass)
    _check_positive("frequency", frequency)
    return math.sqrt(HBAR / (mass * frequency))


def oscillator_eigenfunction(n: int, mass: float, frequency: float, x: ArrayLike) -> np.ndarray:
    """χ_n(x) of the 1D oscillator with the given mass and frequency."""
    scale = length_scale(mass, frequency)
    return hermite_function(n, np.asarray(x, dtype=float) / scale) / math.sqrt(scale)


def momentum_eigenfunction(n: int, mass: float, frequency: float, p: ArrayLike) -> np.ndarray:
    # Hermite functions are eigenfunctions of the Fourier transform with eigenvalue (-i)^n,
    # so φ_n(p) is χ_n on the momentum scale ħ/L.
    scale = HBAR / length_scale(mass, frequency)
    phase = (-1j) ** (n % 4)
    return phase * hermite_function(n, np.asarray(p, dtype=float) / scale) / math.sqrt(scale)


# === 3. Mehler kernel ===

def mehler_kernel(u: ArrayLike, v: ArrayLike, s: float) -> np.ndarray:
    """Closed form of Σ_n H_n(u) H_n(v) s^n / (2^n n!) for |s| < 1."""
    if not abs(s) < 1.0:
        raise DomainError(f"Mehler kernel requires |s| < 1, got s={s}")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    one_minus = 1.0 - s * s
    exponent = -(s * s * u * u + s * s * v * v - 2.0 * u * v * s) / one_minus
    return np.exp(exponent) / math.sqrt(one_minus)


def mehler_series(u: float, v: float, s: float, terms: int) -> float:
    """
    Truncated series side of Mehler's formula, summed over n < terms.

    H_n(u)/sqrt(2^n n!) = π^{1/4} h_n(u) e^{u²/2}, so each term is
    √π h_n(u) h_n(v) e^{(u²+v²)/2} s^n and nothing overflows.
    """
    if terms < 1:
        raise DomainError(f"terms must be >= 1, got {terms}")
    h = _hermite_all(terms - 1, np.array([u, v], dtype=float))
    powers = s ** np.arange(terms)
    total = float(np.sum(h[:, 0] * h[:, 1] * powers))
    return math.sqrt(math.pi) * math.exp(0.5 * (u * u + v * v)) * total


# === 4. Binomials in log space ===

def log_binomial(n: int, k: int) -> float:
    """ln C(n, k) from log-gamma."""
    if n < 0 or k < 0:
        raise DomainError(f"log_binomial needs nonnegative arguments, got ({n}, {k})")
    if k > n:
        raise DomainError(f"log_binomial needs k <= n, got ({n}, {k})")
    if k == 0 or k == n:
        return 0.0
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))
