# tests/test_measures.py
import math

import numpy as np
import pytest

from src.core.errors import DomainError, NumericalFailureError
from src.measures.measures import (
    HeatBathEquivalent,
    SchmidtSpectrum,
    entanglement_split,
    entropies,
    heat_bath_map,
    numeric_entropies,
    schmidt_from_state,
    schmidt_numeric,
    schmidt_uncoupled,
    sle_asymptote_check,
    sle_ground_closed,
    sle_uncoupled,
    svne_ground_closed,
    svne_uncoupled,
    thermal_kernel,
)
from src.model.oscillator import (
    ProductEigenstate,
    default_position_grid,
    from_ratio,
    ground_kernel_closed,
    reduced_density_kernel,
)
from src.tomogram.tomogram import log_symmetric_etas

LN2 = math.log(2.0)
ORACLE_ETAS = [0.1, 0.25, 0.5, 2.0, 4.0, 10.0]


def state(eta, n_r=0, n_c=0):
    return ProductEigenstate(params=from_ratio(eta), n_c=n_c, n_r=n_r)


# === Uncoupled closed forms ===


def test_schmidt_uncoupled_known_values():
    assert schmidt_uncoupled(0, 0).coefficients == [1.0]
    assert schmidt_uncoupled(0, 1).coefficients == pytest.approx([0.5, 0.5], abs=1e-15)
    assert schmidt_uncoupled(0, 2).coefficients == pytest.approx([0.5, 0.25, 0.25], abs=1e-15)


def test_schmidt_uncoupled_symmetric_in_modes():
    # |ν_c, ν_r> and |ν_r, ν_c> have the same spectrum up to relabelling
    for nu_c, nu_r in ((1, 2), (3, 0), (2, 5)):
        a = schmidt_uncoupled(nu_c, nu_r).coefficients
        b = schmidt_uncoupled(nu_r, nu_c).coefficients
        assert a == pytest.approx(b, abs=1e-14)


def test_schmidt_uncoupled_sums_to_one_up_to_sixty_quanta():
    for nu_c, nu_r in ((0, 60), (30, 30), (17, 43)):
        spectrum = schmidt_uncoupled(nu_c, nu_r)
        assert len(spectrum.coefficients) == nu_c + nu_r + 1
        assert math.fsum(spectrum.coefficients) == pytest.approx(1.0, abs=1e-12)
        assert abs(spectrum.truncation_residual) < 1e-12


def test_schmidt_uncoupled_rejects_negative_quanta():
    with pytest.raises(DomainError):
        schmidt_uncoupled(-1, 2)


def test_sle_uncoupled_values():
    assert sle_uncoupled(0) == 0.0
    assert sle_uncoupled(1) == pytest.approx(0.5, abs=1e-12)
    assert sle_uncoupled(2) == pytest.approx(5 / 8, abs=1e-12)
    assert sle_uncoupled(5) == pytest.approx(193 / 256, abs=1e-12)


def test_svne_uncoupled_values():
    assert svne_uncoupled(0) == 0.0
    assert svne_uncoupled(1) == pytest.approx(LN2, abs=1e-12)
    assert svne_uncoupled(3) == pytest.approx(3 * LN2 - 0.75 * math.log(3.0), abs=1e-12)
    expected = (70 * LN2 - 15 * math.log(5.0)) / 16
    assert svne_uncoupled(5) == pytest.approx(expected, abs=1e-12)
    assert svne_uncoupled(5) == pytest.approx(1.5237, abs=1e-4)


def test_closed_forms_match_spectrum_up_to_thirty():
    for nu_r in range(31):
        pair = entropies(schmidt_uncoupled(0, nu_r))
        assert pair.sle == pytest.approx(sle_uncoupled(nu_r), abs=1e-10)
        assert pair.svne == pytest.approx(svne_uncoupled(nu_r), abs=1e-10)


def test_sle_asymptote():
    assert sle_asymptote_check(100) < 2e-3
    assert sle_asymptote_check(1000) < 1e-4
    assert sle_asymptote_check(1) == pytest.approx(abs(0.5 - (1 - math.pi ** -0.5)), abs=1e-12)
    with pytest.raises(DomainError):
        sle_asymptote_check(0)


# === Entropies ===


def test_entropies_known_values():
    assert entropies(SchmidtSpectrum(coefficients=[1.0])).sle == 0.0
    assert entropies(SchmidtSpectrum(coefficients=[1.0])).svne == 0.0
    pair = entropies(SchmidtSpectrum(coefficients=[0.5, 0.5]))
    assert pair.sle == pytest.approx(0.5)
    assert pair.svne == pytest.approx(LN2)


def test_geometric_spectrum_entropy_at_ln9():
    bath = heat_bath_map(from_ratio(0.25))
    x = math.log(9.0)
    expected = -math.log(1.0 - math.exp(-x)) + x / math.expm1(x)
    assert entropies(bath.spectrum()).svne == pytest.approx(expected, abs=1e-12)


def test_spectrum_rejects_bad_values():
    with pytest.raises(NumericalFailureError):
        SchmidtSpectrum(coefficients=[0.25, 0.75])
    with pytest.raises(NumericalFailureError):
        SchmidtSpectrum(coefficients=[0.5, 0.4])


# === Ground state ===


def test_sle_ground_closed_values():
    assert sle_ground_closed(1.0) == 0.0
    assert sle_ground_closed(4.0) == pytest.approx(0.2, abs=1e-15)
    assert sle_ground_closed(0.25) == pytest.approx(0.2, abs=1e-15)
    with pytest.raises(DomainError):
        sle_ground_closed(0.0)


def test_svne_ground_closed_values():
    assert svne_ground_closed(1.0) == 0.0
    expected = -math.log(8 / 9) + math.log(9.0) / 8
    assert svne_ground_closed(4.0) == pytest.approx(expected, abs=1e-12)
    assert svne_ground_closed(4.0) == pytest.approx(0.392436, abs=1e-6)
    assert svne_ground_closed(1e-8) > 4.0


def test_ground_closed_forms_symmetric_under_inversion():
    for eta in np.geomspace(0.05, 20.0, 20):
        assert sle_ground_closed(eta) == pytest.approx(sle_ground_closed(1.0 / eta), abs=1e-12)
        assert svne_ground_closed(eta) == pytest.approx(svne_ground_closed(1.0 / eta), abs=1e-12)


def test_heat_bath_zero_temperature_marker():
    bath = heat_bath_map(from_ratio(1.0))
    assert bath.zero_temperature
    assert bath.spectrum().coefficients == [1.0]
    assert bath.sle() == 0.0
    assert bath.svne() == 0.0


def test_heat_bath_at_quarter():
    params = from_ratio(0.25)
    bath = heat_bath_map(params)
    assert bath.varpi == pytest.approx(0.5)
    assert bath.reduced_energy == pytest.approx(math.log(9.0), abs=1e-12)
    assert heat_bath_map(from_ratio(4.0)).reduced_energy == pytest.approx(math.log(9.0), abs=1e-12)


def test_heat_bath_triangle_on_figure_grid():
    for eta in log_symmetric_etas(20.0, 49):
        bath = heat_bath_map(from_ratio(eta))
        pair = entropies(bath.spectrum())
        assert pair.sle == pytest.approx(sle_ground_closed(eta), abs=1e-10)
        assert pair.svne == pytest.approx(svne_ground_closed(eta), abs=1e-10)
        assert bath.sle() == pytest.approx(1.0 - math.tanh(0.5 * bath.reduced_energy) if bath.beta else 0.0, abs=1e-12)


def test_heat_bath_spectrum_residual_is_geometric_tail():
    bath = HeatBathEquivalent(varpi=1.0, beta=0.5)
    spectrum = bath.spectrum(cutoff=1e-6)
    q = math.exp(-0.5)
    assert spectrum.truncation_residual == pytest.approx(q ** len(spectrum.coefficients), rel=1e-9)


def test_thermal_kernel_equals_closed_ground_kernel():
    x = np.linspace(-3.0, 3.0, 13)
    for eta in (0.1, 0.25, 4.0, 9.0):
        params = from_ratio(eta)
        closed = ground_kernel_closed(params, x[:, None], x[None, :])
        thermal = thermal_kernel(heat_bath_map(params), x[:, None], x[None, :])
        assert np.allclose(thermal, closed, rtol=1e-10, atol=1e-14)


# === Numerical Schmidt decomposition ===


@pytest.mark.parametrize("eta", ORACLE_ETAS)
def test_oracle_triangle(eta, points):
    numeric = numeric_entropies(from_ratio(eta), 0, points=points)
    bath = entropies(heat_bath_map(from_ratio(eta)).spectrum())
    assert numeric.sle == pytest.approx(sle_ground_closed(eta), abs=1e-6)
    assert numeric.svne == pytest.approx(svne_ground_closed(eta), abs=1e-5)
    assert numeric.sle == pytest.approx(bath.sle, abs=1e-6)


def test_numeric_ground_state_on_figure_grid(points):
    for eta in log_symmetric_etas(20.0, 49):
        numeric = numeric_entropies(from_ratio(eta), 0, points=points)
        assert abs(numeric.sle - sle_ground_closed(eta)) < 1e-6
        assert abs(numeric.svne - svne_ground_closed(eta)) < 1e-5


def test_eigen_route_known_values(points):
    s = state(1.0)
    grid = default_position_grid(s, points=points)
    assert schmidt_numeric(reduced_density_kernel(s, grid), grid).coefficients[0] == pytest.approx(1.0, abs=1e-10)

    s = state(4.0)
    grid = default_position_grid(s, points=points)
    pair = entropies(schmidt_numeric(reduced_density_kernel(s, grid), grid))
    assert pair.sle == pytest.approx(0.2, abs=1e-6)


def test_routes_agree(points):
    s = state(3.0, n_r=2)
    grid = default_position_grid(s, points=points)
    by_svd = entropies(schmidt_from_state(s, grid))
    by_eigh = entropies(schmidt_numeric(reduced_density_kernel(s, grid), grid))
    assert by_svd.sle == pytest.approx(by_eigh.sle, abs=1e-9)
    assert by_svd.svne == pytest.approx(by_eigh.svne, abs=1e-8)


def test_uncoupled_reduction_per_coefficient(points):
    for n_r in range(7):
        s = state(1.0, n_r=n_r)
        numeric = schmidt_from_state(s, default_position_grid(s, points=points)).coefficients
        exact = schmidt_uncoupled(0, n_r).coefficients
        assert numeric[: n_r + 1] == pytest.approx(exact, abs=1e-8)
        assert sum(numeric[n_r + 1:]) < 1e-8


def test_spectrum_sanity(points):
    for eta, n_r in ((0.3, 1), (2.5, 3)):
        spectrum = schmidt_from_state(state(eta, n_r=n_r), default_position_grid(state(eta, n_r=n_r), points=points))
        assert math.fsum(spectrum.coefficients) + spectrum.truncation_residual == pytest.approx(1.0, abs=1e-8)
        assert abs(spectrum.truncation_residual) < 1e-10


@pytest.mark.parametrize("eta", [0.25, 4.0])
def test_entropies_increase_with_n_r(eta, points):
    pairs = [numeric_entropies(from_ratio(eta), n_r, points=points) for n_r in range(6)]
    sle = [p.sle for p in pairs]
    svne = [p.svne for p in pairs]
    assert all(b > a for a, b in zip(sle, sle[1:]))
    assert all(b > a for a, b in zip(svne, svne[1:]))


def test_asymmetric_kernel_rejected(points):
    s = state(2.0)
    grid = default_position_grid(s, points=points)
    kernel = reduced_density_kernel(s, grid)
    kernel[0, 1] += 1e-6
    with pytest.raises(NumericalFailureError):
        schmidt_numeric(kernel, grid)


def test_entanglement_split(points):
    split = entanglement_split(from_ratio(1.0), 2, points=points)
    assert split.coupling_sle == pytest.approx(0.0, abs=1e-8)
    assert split.coupling_svne == pytest.approx(0.0, abs=1e-7)

    split = entanglement_split(from_ratio(4.0), 2, points=points)
    assert split.state.sle == pytest.approx(5 / 8)
    assert split.total.sle == pytest.approx(split.state.sle + split.coupling_sle)
    assert split.coupling_sle > 0.0
