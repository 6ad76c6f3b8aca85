# tests/test_tomogram.py
import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import spearmanr

from src.core.errors import DomainError, SupportMismatchError
from src.measures.measures import numeric_entropies
from src.model.oscillator import (
    ProductEigenstate,
    default_momentum_grid,
    default_position_grid,
    from_ratio,
    momentum_extent,
    position_extent,
    slice_grids,
)
from src.special.quadrature import GridKind, integrate, make_grid
from src.tomogram.slices import Basis, TomogramSlice
from src.tomogram.tomogram import (
    Indicator,
    SliceKind,
    averaged_indicator,
    divergence_probe,
    epsilon_bd,
    epsilon_ipr,
    epsilon_kl,
    evaluate_indicator,
    gaussian_bhattacharyya,
    gaussian_mutual_information,
    interior_minimum,
    ipr_slice,
    log_symmetric_etas,
    momentum_slice,
    position_slice,
    slice_correlation,
    sweep_indicator,
)


def state(eta, n_r=0, n_c=0):
    return ProductEigenstate(params=from_ratio(eta), n_c=n_c, n_r=n_r)


def slices(eta, n_r, points):
    s = state(eta, n_r)
    return (
        position_slice(s, default_position_grid(s, points=points)),
        momentum_slice(s, default_momentum_grid(s, points=points)),
    )


@pytest.fixture
def product_slices(points):
    return slices(1.0, 0, points)


# === Slices ===


def test_slice_invariants(points):
    for tomogram in slices(2.0, 3, points):
        assert integrate(tomogram.grid1, tomogram.marginal1) == pytest.approx(1.0, abs=1e-8)
        assert np.all(tomogram.joint >= 0)
        assert np.allclose(tomogram.marginal1, tomogram.joint @ tomogram.grid2.weights, atol=1e-10)


def test_slice_rejects_negative_density():
    grid = make_grid(GridKind.uniform_trapezoid, 5.0, 32)
    joint = np.full((32, 32), 1.0 / 100.0)
    joint[3, 4] = -1e-3
    with pytest.raises((DomainError, ValidationError)):
        TomogramSlice(
            basis=Basis.position,
            grid1=grid,
            grid2=grid,
            joint=joint,
            marginal1=joint @ grid.weights,
            marginal2=grid.weights @ joint,
        )


# === Zero baseline on the product state ===


def test_indicators_vanish_on_product_state(product_slices):
    for tomogram in product_slices:
        assert epsilon_bd(tomogram) < 1e-9
        assert epsilon_kl(tomogram) < 1e-9


def test_averaged_indicators_vanish_on_product_state(points):
    for indicator in (Indicator.bd, Indicator.kl):
        result = evaluate_indicator(indicator, SliceKind.average, state(1.0), points=points)
        assert result.value < 1e-8
        assert set(result.per_slice) == {"position", "momentum"}


def test_average_is_mean_of_slices(points):
    s = state(3.0, 2)
    result = averaged_indicator(
        Indicator.kl,
        s,
        default_position_grid(s, points=points),
        default_momentum_grid(s, points=points),
    )
    assert result.value == 0.5 * (result.per_slice["position"] + result.per_slice["momentum"])
    assert result.slice is SliceKind.average


def test_half_width_override_scales_momentum_grid(points):
    # at η = 9 the momentum extent is 1.5 times the position extent
    s = state(9.0, 1)
    ratio = momentum_extent(s) / position_extent(s)
    assert ratio == pytest.approx(1.5)
    position_grid, momentum_grid = slice_grids(s, points=points, half_width=10.0)
    assert position_grid.half_width == 10.0
    assert momentum_grid.half_width == pytest.approx(15.0)

    default = evaluate_indicator(Indicator.bd, SliceKind.average, s, points=points)
    pinned = evaluate_indicator(Indicator.bd, SliceKind.average, s, points=points, half_width=position_extent(s))
    assert pinned.per_slice["position"] == pytest.approx(default.per_slice["position"], abs=1e-12)
    assert pinned.per_slice["momentum"] == pytest.approx(default.per_slice["momentum"], abs=1e-12)


def test_ipr_cannot_be_averaged():
    with pytest.raises(DomainError):
        averaged_indicator(Indicator.ipr, state(0.25))


# === Gaussian oracles ===


@pytest.mark.parametrize("eta", [2.0, 4.0])
def test_kl_matches_gaussian_mutual_information(eta, points):
    tomogram, _ = slices(eta, 0, points)
    r = slice_correlation(tomogram)
    assert r == pytest.approx((1.0 - eta) / (1.0 + eta), abs=1e-9)
    assert epsilon_kl(tomogram) == pytest.approx(gaussian_mutual_information(r), abs=1e-6)


def test_bd_matches_gaussian_oracle_and_refinement(points):
    s = state(4.0)
    coarse = position_slice(s, default_position_grid(s, points=points))
    fine = position_slice(s, default_position_grid(s, points=2 * points))
    r = (1.0 - 4.0) / (1.0 + 4.0)
    assert epsilon_bd(coarse) >= 0.0
    assert epsilon_bd(coarse) == pytest.approx(gaussian_bhattacharyya(r), abs=1e-6)
    assert epsilon_bd(coarse) == pytest.approx(epsilon_bd(fine), abs=1e-6)


def test_indicators_nonnegative(points):
    for eta, n_r in ((0.2, 1), (1.0, 3), (6.0, 2)):
        for tomogram in slices(eta, n_r, points):
            assert epsilon_bd(tomogram) >= 0.0
            assert epsilon_kl(tomogram) >= 0.0


def test_kl_support_mismatch_names_point():
    grid = make_grid(GridKind.uniform_trapezoid, 4.0, 32)
    w = grid.weights
    joint = np.ones((32, 32))
    joint[5, :] = 0.0
    joint /= w @ joint @ w
    joint[5, 9] = 1e-12
    marginal1 = joint @ w
    # row 5 carries no marginal mass, within the contraction tolerance
    marginal1[5] = 0.0
    tomogram = TomogramSlice(
        basis=Basis.position,
        grid1=grid,
        grid2=grid,
        joint=joint,
        marginal1=marginal1,
        marginal2=w @ joint,
    )
    with pytest.raises(SupportMismatchError) as excinfo:
        epsilon_kl(tomogram)
    assert "index (5, 9)" in str(excinfo.value)
    assert "marginal vanishes" in str(excinfo.value)


def test_kl_two_cell_correlation_is_one_bit():
    grid = make_grid(GridKind.uniform_trapezoid, 4.0, 32)
    w = grid.weights
    joint = np.zeros((32, 32))
    joint[5, 9] = 0.5 / (w[5] * w[9])
    joint[6, 10] = 0.5 / (w[6] * w[10])
    tomogram = TomogramSlice.from_joint(Basis.position, grid, grid, joint)
    # a floor above every marginal value is not a support loss
    floor = 0.75 * tomogram.joint[5, 9]
    assert tomogram.marginal1[5] < floor
    assert epsilon_kl(tomogram, floor=floor) == pytest.approx(1.0, abs=1e-12)
    assert epsilon_kl(tomogram) == pytest.approx(1.0, abs=1e-12)


TAIL_POINTS = 1024


@pytest.mark.parametrize("n_r", [1, 2, 3, 4, 5])
def test_kl_survives_far_tails_across_full_sweep(n_r):
    etas = log_symmetric_etas(20.0, 49)
    results = sweep_indicator(Indicator.kl, SliceKind.average, n_r, etas, points=TAIL_POINTS)
    values = [r.value for r in results]
    assert all(math.isfinite(v) and v >= 0.0 for v in values)
    assert values == pytest.approx(values[::-1], abs=1e-6)


# === Slice duality and curve structure ===


def test_position_at_eta_equals_momentum_at_inverse(points):
    for eta in log_symmetric_etas(4.0, 5):
        p = position_slice(state(eta, 2), default_position_grid(state(eta, 2), points=points))
        q = momentum_slice(state(1.0 / eta, 2), default_momentum_grid(state(1.0 / eta, 2), points=points))
        assert epsilon_bd(p) == pytest.approx(epsilon_bd(q), abs=1e-6)
        assert epsilon_kl(p) == pytest.approx(epsilon_kl(q), abs=1e-6)


@pytest.mark.parametrize("indicator", [Indicator.bd, Indicator.kl])
@pytest.mark.parametrize("n_r", [1, 2, 3])
def test_averaged_minimum_at_one(indicator, n_r, points):
    etas = log_symmetric_etas(8.0, 13)
    results = sweep_indicator(indicator, SliceKind.average, n_r, etas, points=points)
    values = [r.value for r in results]
    assert interior_minimum(values) == 6
    assert etas[6] == 1.0
    position = [r.per_slice["position"] for r in results]
    momentum = [r.per_slice["momentum"] for r in results]
    assert etas[int(np.argmin(position))] < 1.0
    assert etas[int(np.argmin(momentum))] > 1.0


def test_averaged_curves_symmetric_under_inversion(points):
    etas = log_symmetric_etas(5.0, 7)
    for indicator in (Indicator.bd, Indicator.kl):
        values = [r.value for r in sweep_indicator(indicator, SliceKind.average, 2, etas, points=points)]
        assert values == pytest.approx(values[::-1], abs=1e-6)


@pytest.mark.parametrize("n_r", [1, 2])
def test_bd_tracks_svne(n_r, points):
    etas = [1.0, 2.0, 4.0, 8.0]
    bd = [r.value for r in sweep_indicator(Indicator.bd, SliceKind.average, n_r, etas, points=points)]
    svne = [numeric_entropies(from_ratio(eta), n_r, points=points).svne for eta in etas]
    assert spearmanr(bd, svne).correlation == pytest.approx(1.0)


DIVERGENCE_EXPECTED = {
    Indicator.bd: [0.267, 0.970, 1.786],
    Indicator.kl: [0.798, 2.336, 3.984],
}


@pytest.mark.parametrize("slice_kind", [SliceKind.position, SliceKind.average])
@pytest.mark.parametrize("indicator", [Indicator.bd, Indicator.kl])
def test_divergence_towards_small_eta(indicator, slice_kind):
    etas = [1e-1, 1e-2, 1e-3]
    values = divergence_probe(indicator, 0, etas, slice_kind=slice_kind, points=TAIL_POINTS)
    assert all(b >= 1.2 * a for a, b in zip(values, values[1:]))
    assert values == pytest.approx(DIVERGENCE_EXPECTED[indicator], abs=5e-3)


def test_no_divergence_at_one(points):
    assert divergence_probe(Indicator.bd, 0, [1.0], points=points)[0] < 1e-8


def test_divergence_probe_needs_decreasing_sequence():
    with pytest.raises(DomainError):
        divergence_probe(Indicator.kl, 0, [0.1, 0.2])
    with pytest.raises(DomainError):
        divergence_probe(Indicator.kl, 0, [0.1, -0.2])


def test_interior_minimum():
    assert interior_minimum([3.0, 1.0, 2.0]) == 1
    assert interior_minimum([1.0, 2.0, 3.0]) is None
    assert interior_minimum([2.0, 1.0, 1.0, 2.0]) is None


def test_log_symmetric_etas_pairs():
    etas = log_symmetric_etas(20.0, 49)
    assert len(etas) == 49
    assert etas[24] == 1.0
    assert etas[0] == pytest.approx(0.05)
    assert etas[-1] == pytest.approx(20.0)
    for k in range(24):
        assert etas[k] == 1.0 / etas[-1 - k]
    with pytest.raises(DomainError):
        log_symmetric_etas(20.0, 48)


# === IPR ===


def test_ipr_requires_quarter(points):
    with pytest.raises(DomainError):
        ipr_slice(state(0.3), points=points)
    with pytest.raises(DomainError):
        evaluate_indicator(Indicator.ipr, SliceKind.position, state(1.0), points=points)
    with pytest.raises(DomainError):
        evaluate_indicator(Indicator.ipr, SliceKind.momentum, state(0.25), points=points)


def test_ipr_rejects_dimensionful_slice(points):
    tomogram, _ = slices(0.25, 0, points)
    with pytest.raises(DomainError):
        epsilon_ipr(tomogram)


def test_ipr_product_fixture():
    grid = make_grid(GridKind.uniform_trapezoid, 10.0, 801)
    g = np.exp(-grid.nodes ** 2) / math.sqrt(math.pi)
    tomogram = TomogramSlice.from_joint(Basis.position, grid, grid, np.outer(g, g), eta=0.25, dimensionless=True)
    purity = 1.0 / math.sqrt(2.0 * math.pi)
    assert epsilon_ipr(tomogram) == pytest.approx((1.0 - purity) ** 2, abs=1e-10)


def test_ipr_ground_state_value(points):
    tomogram = ipr_slice(state(0.25), points=points)
    expected = 1.0 + 1.0 / (2.0 * math.pi) - 1.0 / math.sqrt(0.625 * math.pi)
    assert epsilon_ipr(tomogram) == pytest.approx(expected, abs=1e-9)


def test_ipr_increases_with_n_r(points):
    values = [epsilon_ipr(ipr_slice(state(0.25, n_r), points=points)) for n_r in range(6)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_ipr_stable_under_refinement(points):
    for n_r in (0, 5):
        coarse = epsilon_ipr(ipr_slice(state(0.25, n_r), points=points))
        fine = epsilon_ipr(ipr_slice(state(0.25, n_r), points=2 * points))
        assert fine == pytest.approx(coarse, abs=1e-7)
