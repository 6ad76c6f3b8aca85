# src/cli/selfcheck.py
import logging
import math
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from src.core.errors import OscitomError
from src.core.metrics import SELFCHECK_RESULTS
from src.measures.measures import (
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
    OscillatorParams,
    ProductEigenstate,
    default_momentum_grid,
    default_position_grid,
    ground_kernel_closed,
    joint_momentum_density,
    joint_position_density,
    reduced_density_kernel,
)
from src.special.hermite import hermite_functions, log_binomial, mehler_kernel, mehler_series
from src.special.quadrature import GridKind, make_grid
from src.tomogram.tomogram import (
    IPR_ETA,
    Indicator,
    SliceKind,
    epsilon_bd,
    epsilon_kl,
    evaluate_indicator,
    gaussian_bhattacharyya,
    gaussian_mutual_information,
    interior_minimum,
    log_symmetric_etas,
    momentum_slice,
    position_slice,
)

logger = logging.getLogger(__name__)

SELFCHECK_POINTS = 256

UNCOUPLED_SLE = [0.0, 1 / 2, 5 / 8, 11 / 16, 93 / 128, 193 / 256]
LN2, LN3, LN5 = math.log(2.0), math.log(3.0), math.log(5.0)
UNCOUPLED_SVNE = [
    0.0,
    LN2,
    1.5 * LN2,
    3 * LN2 - 0.75 * LN3,
    (21 * LN2 - 3 * LN3) / 8,
    (70 * LN2 - 15 * LN5) / 16,
]
# 1 + ∬P̄² - 2∫P̄₁² for the ground state at η = 1/4, a Gaussian with precision [[5/2, -3/2], [-3/2, 5/2]]
IPR_GROUND = 1.0 + 1.0 / (2.0 * math.pi) - 1.0 / math.sqrt(0.625 * math.pi)


class CheckFailed(OscitomError):
    pass


class CheckResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    passed: bool
    detail: str


class SelfCheckReport(BaseModel):
    results: List[CheckResult]

    @property
    def ok(self) -> bool:
        return all(result.passed for result in self.results)

    @property
    def failed(self) -> List[str]:
        return [result.name for result in self.results if not result.passed]

    def table(self) -> str:
        width = max(len(result.name) for result in self.results)
        lines = [f"{'check':<{width}}  result  detail"]
        for result in self.results:
            status = "PASS" if result.passed else "FAIL"
            lines.append(f"{result.name:<{width}}  {status:<6}  {result.detail}")
        passed = sum(result.passed for result in self.results)
        lines.append(f"{passed}/{len(self.results)} checks passed")
        return "\n".join(lines) + "\n"


def _expect(error: float, tolerance: float, what: str) -> str:
    if not error <= tolerance:
        raise CheckFailed(f"{what}: error {error:.3e} exceeds {tolerance:.0e}")
    return f"{what}: max error {error:.3e} <= {tolerance:.0e}"


def _state(eta: float, n_r: int, n_c: int = 0) -> ProductEigenstate:
    return ProductEigenstate(params=OscillatorParams.from_ratio(eta), n_c=n_c, n_r=n_r)


class SelfCheck:
    """
    Runs every closed-form oracle against the numerical pipelines. Checks
    that need a grid use `points` nodes per axis; the special-function
    checks carry their own fixed grids.
    """

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        config = config or {}
        self.points = int(config.get("points") or SELFCHECK_POINTS)
        self.checks: List[tuple] = [
            ("hermite_orthonormality", self.check_hermite_orthonormality),
            ("mehler_identity", self.check_mehler_identity),
            ("log_binomial", self.check_log_binomial),
            ("uncoupled_closed_forms", self.check_uncoupled_closed_forms),
            ("sle_asymptote", self.check_sle_asymptote),
            ("heat_bath_equivalence", self.check_heat_bath_equivalence),
            ("thermal_kernel", self.check_thermal_kernel),
            ("slice_normalization", self.check_slice_normalization),
            ("ground_state_numeric", self.check_ground_state_numeric),
            ("uncoupled_numeric", self.check_uncoupled_numeric),
            ("kernel_route", self.check_kernel_route),
            ("tei_zero_baseline", self.check_tei_zero_baseline),
            ("gaussian_slice_oracles", self.check_gaussian_slice_oracles),
            ("slice_duality", self.check_slice_duality),
            ("bd_minimum_at_one", self.check_bd_minimum_at_one),
            ("ipr_trend", self.check_ipr_trend),
        ]

    # === 1. Special functions ===

    def check_hermite_orthonormality(self) -> str:
        grid = make_grid(GridKind.uniform_trapezoid, 20.0, 2048)
        h = hermite_functions(50, grid.nodes)
        gram = (h * grid.weights[None, :]) @ h.T
        return _expect(float(np.max(np.abs(gram - np.eye(51)))), 1e-10, "<h_m|h_n> for m, n <= 50")

    def check_mehler_identity(self) -> str:
        series = mehler_series(0.7, -0.3, 0.9, 400)
        closed = float(mehler_kernel(0.7, -0.3, 0.9))
        return _expect(abs(series - closed) / abs(closed), 1e-8, "400-term series at (0.7, -0.3, 0.9)")

    def check_log_binomial(self) -> str:
        error = max(
            abs(log_binomial(n, k) - math.log(math.comb(n, k)))
            for n in range(61)
            for k in range(n + 1)
        )
        return _expect(error, 1e-9, "ln C(n, k) for n <= 60")

    # === 2. Closed forms ===

    def check_uncoupled_closed_forms(self) -> str:
        error = 0.0
        for nu_r in range(31):
            pair = entropies(schmidt_uncoupled(0, nu_r))
            error = max(error, abs(pair.sle - sle_uncoupled(nu_r)), abs(pair.svne - svne_uncoupled(nu_r)))
        for nu_r, (sle, svne) in enumerate(zip(UNCOUPLED_SLE, UNCOUPLED_SVNE)):
            error = max(error, abs(sle_uncoupled(nu_r) - sle), abs(svne_uncoupled(nu_r) - svne))
        return _expect(error, 1e-11, "spectrum vs closed forms, nu_r <= 30")

    def check_sle_asymptote(self) -> str:
        _expect(sle_asymptote_check(100), 2e-3, "SLE asymptote at nu_r = 100")
        return _expect(sle_asymptote_check(1000), 1e-4, "SLE asymptote at nu_r = 1000")

    def check_heat_bath_equivalence(self) -> str:
        error = 0.0
        for eta in log_symmetric_etas(20.0, 49):
            bath = heat_bath_map(OscillatorParams.from_ratio(eta))
            pair = entropies(bath.spectrum())
            error = max(
                error,
                abs(bath.sle() - sle_ground_closed(eta)),
                abs(bath.svne() - svne_ground_closed(eta)),
                abs(pair.sle - bath.sle()),
                abs(pair.svne - bath.svne()),
            )
        return _expect(error, 1e-10, "heat bath vs ground-state closed forms, eta in [0.05, 20]")

    def check_thermal_kernel(self) -> str:
        x = np.linspace(-2.0, 2.0, 9)
        error = 0.0
        for eta in (0.25, 4.0):
            params = OscillatorParams.from_ratio(eta)
            closed = ground_kernel_closed(params, x[:, None], x[None, :])
            thermal = thermal_kernel(heat_bath_map(params), x[:, None], x[None, :])
            error = max(error, float(np.max(np.abs(thermal - closed) / np.max(np.abs(closed)))))
        return _expect(error, 1e-10, "thermal kernel vs closed reduced kernel")

    # === 3. Grid-based pipelines ===

    def check_slice_normalization(self) -> str:
        for eta, n_r in ((4.0, 2), (0.25, 3), (1.0, 5)):
            state = _state(eta, n_r)
            joint_position_density(state, default_position_grid(state, points=self.points))
            joint_momentum_density(state, default_momentum_grid(state, points=self.points))
        return f"position and momentum slices normalized on {self.points}-point grids"

    def check_ground_state_numeric(self) -> str:
        sle_error = svne_error = 0.0
        for eta in (0.1, 0.25, 0.5, 2.0, 4.0, 10.0):
            pair = numeric_entropies(OscillatorParams.from_ratio(eta), 0, points=self.points)
            sle_error = max(sle_error, abs(pair.sle - sle_ground_closed(eta)))
            svne_error = max(svne_error, abs(pair.svne - svne_ground_closed(eta)))
        _expect(sle_error, 1e-6, "ground-state SLE")
        _expect(svne_error, 1e-5, "ground-state SVNE")
        return f"SLE error {sle_error:.3e}, SVNE error {svne_error:.3e}"

    def check_uncoupled_numeric(self) -> str:
        error = 0.0
        for n_r in range(5):
            pair = numeric_entropies(OscillatorParams.from_ratio(1.0), n_r, points=self.points)
            error = max(error, abs(pair.sle - sle_uncoupled(n_r)), abs(pair.svne - svne_uncoupled(n_r)))
        return _expect(error, 1e-5, "numeric Schmidt at eta = 1, n_r <= 4")

    def check_kernel_route(self) -> str:
        state = _state(3.0, 2)
        grid = default_position_grid(state, points=self.points)
        by_kernel = entropies(schmidt_numeric(reduced_density_kernel(state, grid), grid))
        by_amplitude = entropies(schmidt_from_state(state, grid))
        error = max(abs(by_kernel.sle - by_amplitude.sle), abs(by_kernel.svne - by_amplitude.svne))
        return _expect(error, 1e-9, "reduced-kernel eigh vs amplitude SVD at eta = 3, n_r = 2")

    def check_tei_zero_baseline(self) -> str:
        state = _state(1.0, 0)
        bd = evaluate_indicator(Indicator.bd, SliceKind.average, state, points=self.points).value
        kl = evaluate_indicator(Indicator.kl, SliceKind.average, state, points=self.points).value
        return _expect(max(bd, kl), 1e-9, "averaged BD and KL of |0,0> at eta = 1")

    def check_gaussian_slice_oracles(self) -> str:
        error = 0.0
        for eta in (0.5, 2.0, 4.0):
            r = (1.0 - eta) / (1.0 + eta)
            state = _state(eta, 0)
            tomogram = position_slice(state, default_position_grid(state, points=self.points))
            error = max(
                error,
                abs(epsilon_kl(tomogram) - gaussian_mutual_information(r)),
                abs(epsilon_bd(tomogram) - gaussian_bhattacharyya(r)),
            )
        return _expect(error, 1e-6, "ground-state position slice vs Gaussian oracles")

    def check_slice_duality(self) -> str:
        error = 0.0
        for eta, n_r in ((2.0, 2), (4.0, 1)):
            direct, dual = _state(eta, n_r), _state(1.0 / eta, n_r)
            p = position_slice(direct, default_position_grid(direct, points=self.points))
            q = momentum_slice(dual, default_momentum_grid(dual, points=self.points))
            error = max(error, abs(epsilon_bd(p) - epsilon_bd(q)), abs(epsilon_kl(p) - epsilon_kl(q)))
        return _expect(error, 1e-6, "position slice at eta vs momentum slice at 1/eta")

    def check_bd_minimum_at_one(self) -> str:
        etas = log_symmetric_etas(4.0, 9)
        values = [
            evaluate_indicator(Indicator.bd, SliceKind.average, _state(eta, 1), points=self.points).value
            for eta in etas
        ]
        index = interior_minimum(values)
        if index is None or etas[index] != 1.0:
            raise CheckFailed(f"averaged BD for n_r = 1 has no interior minimum at eta = 1: {values}")
        return f"averaged BD minimum {values[index]:.6f} at eta = 1"

    def check_ipr_trend(self) -> str:
        values = [
            evaluate_indicator(Indicator.ipr, SliceKind.position, _state(IPR_ETA, n_r), points=self.points).value
            for n_r in range(6)
        ]
        _expect(abs(values[0] - IPR_GROUND), 1e-6, "IPR of |0,0>")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise CheckFailed(f"IPR not strictly increasing in n_r: {values}")
        return "IPR strictly increasing for n_r = 0..5, " + ", ".join(f"{v:.4f}" for v in values)

    # === 4. Driver ===

    def _run_one(self, name: str, check: Callable[[], str]) -> CheckResult:
        try:
            detail = check()
            passed = True
        except (OscitomError, ValidationError) as e:
            detail = f"{type(e).__name__}: {e}"
            passed = False
        SELFCHECK_RESULTS.labels(outcome="pass" if passed else "fail").inc()
        if not passed:
            logger.error(f"Self-check {name} failed: {detail}")
        return CheckResult(name=name, passed=passed, detail=detail)

    def run(self) -> SelfCheckReport:
        logger.info(f"Running {len(self.checks)} self-checks at {self.points} grid points")
        report = SelfCheckReport(results=[self._run_one(name, check) for name, check in self.checks])
        logger.info(f"Self-check finished: {len(report.failed)} failed")
        return report


def cmd_selfcheck(points: Optional[int] = None, config: Optional[Dict[str, Any]] = None) -> SelfCheckReport:
    return SelfCheck({**(config or {}), "points": points}).run()
