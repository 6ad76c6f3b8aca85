# src/cli/sweep.py
import asyncio
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.cli.datasets import FigureDataset
from src.core.config import default_jobs, default_points
from src.core.errors import OscitomError, UsageError
from src.core.metrics import SWEEP_POINT_DURATION, SWEEP_ROWS
from src.measures.measures import (
    numeric_entropies,
    sle_ground_closed,
    sle_uncoupled,
    svne_ground_closed,
    svne_uncoupled,
)
from src.model.oscillator import OscillatorParams, ProductEigenstate
from src.tomogram.tomogram import IPR_ETA, Indicator, SliceKind, evaluate_indicator, log_symmetric_etas

logger = logging.getLogger(__name__)

MIN_SWEEP_POINTS = 64


class OutputFormat(str, Enum):
    csv = "csv"
    json = "json"


# === 1. Sweep parameters ===


class SweepSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    etas: List[float] = Field(..., min_length=1)
    n_r: List[int] = Field(default_factory=lambda: [0], min_length=1)
    n_c: int = Field(0, ge=0)
    points: int = Field(default_factory=default_points, ge=MIN_SWEEP_POINTS)
    half_width: Optional[float] = Field(None, gt=0.0)
    format: OutputFormat = OutputFormat.csv
    out: Optional[Path] = None

    @field_validator("etas")
    @classmethod
    def _positive_etas(cls, values: List[float]) -> List[float]:
        for eta in values:
            if not eta > 0 or not math.isfinite(eta):
                raise ValueError(f"eta values must be positive and finite, got {eta}")
        return values

    @field_validator("n_r")
    @classmethod
    def _nonnegative_nr(cls, values: List[int]) -> List[int]:
        if any(n < 0 for n in values):
            raise ValueError(f"n_r values must be nonnegative, got {values}")
        return values

    def grid_points(self) -> List[Tuple[float, int]]:
        """(η, n_r) pairs in output order: η outer, n_r inner."""
        return [(eta, n_r) for eta in self.etas for n_r in self.n_r]

    def parameters(self) -> Dict[str, Any]:
        """Everything that determines the numbers, for the manifest."""
        return self.model_dump(mode="json", exclude={"out", "format"})


def parse_eta_range(text: str) -> List[float]:
    """'lo:hi:n' → n log-spaced values; exact reciprocal pairs when lo·hi = 1 and n is odd."""
    try:
        lo_text, hi_text, n_text = text.split(":")
        lo, hi, n = float(lo_text), float(hi_text), int(n_text)
    except ValueError as e:
        raise UsageError(f"--eta-range expects lo:hi:n, got {text!r}") from e
    if not (0 < lo < hi) or n < 2:
        raise UsageError(f"--eta-range needs 0 < lo < hi and n >= 2, got {text!r}")
    if n % 2 == 1 and math.isclose(lo * hi, 1.0, rel_tol=1e-12):
        return log_symmetric_etas(hi, n)
    ratio = (hi / lo) ** (1.0 / (n - 1))
    return [lo * ratio ** k for k in range(n - 1)] + [hi]


def build_spec(**fields) -> SweepSpec:
    try:
        return SweepSpec(**{k: v for k, v in fields.items() if v is not None})
    except ValidationError as e:
        raise UsageError(f"invalid sweep parameters: {e}") from e


# === 2. Runner ===


class SweepOutcome(BaseModel):
    rows: List[List[Optional[float]]]
    failures: List[str] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


class SweepRunner:
    """
    Evaluates independent sweep points on a thread pool. Rows come back in
    parameter order whatever the completion order; a point failing with a
    toolkit error is skipped and reported, it does not stop the sweep.
    """

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        config = config or {}
        self.jobs = max(1, int(config.get("jobs") or default_jobs()))
        self.command = config.get("command", "sweep")

    def _timed(self, fn: Callable[[Any], List[Optional[float]]], item: Any) -> List[Optional[float]]:
        start_time = time.time()
        try:
            return fn(item)
        finally:
            SWEEP_POINT_DURATION.labels(command=self.command).observe(time.time() - start_time)

    async def run_async(self, fn: Callable[[Any], List[Optional[float]]], items: Sequence[Any]) -> SweepOutcome:
        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            tasks = [loop.run_in_executor(pool, self._timed, fn, item) for item in items]
            results = await asyncio.gather(*tasks, return_exceptions=True)

        rows, failures = [], []
        for item, result in zip(items, results):
            if isinstance(result, (OscitomError, ValidationError)):
                logger.error(f"{self.command}: skipping row {item}: {result}")
                SWEEP_ROWS.labels(command=self.command, outcome="skipped").inc()
                failures.append(f"{item}: {result}")
            elif isinstance(result, BaseException):
                raise result
            else:
                SWEEP_ROWS.labels(command=self.command, outcome="ok").inc()
                rows.append(result)
        return SweepOutcome(rows=rows, failures=failures)

    def run(self, fn: Callable[[Any], List[Optional[float]]], items: Sequence[Any]) -> SweepOutcome:
        """Synchronous entry point"""
        logger.info(f"{self.command}: {len(items)} points on {self.jobs} worker(s)")
        outcome = asyncio.run(self.run_async(fn, items))
        logger.info(f"{self.command}: {len(outcome.rows)} rows, {len(outcome.failures)} skipped")
        return outcome


# === 3. measures / tei commands ===


def measures_row(spec: SweepSpec, eta: float, n_r: int) -> List[Optional[float]]:
    """η, n_r, closed-form SLE/SVNE where a closed form exists, numeric SLE/SVNE."""
    params = OscillatorParams.from_ratio(eta)
    sle_closed = svne_closed = None
    if spec.n_c == 0 and n_r == 0:
        sle_closed, svne_closed = sle_ground_closed(eta), svne_ground_closed(eta)
    elif spec.n_c == 0 and eta == 1.0:
        sle_closed, svne_closed = sle_uncoupled(n_r), svne_uncoupled(n_r)
    numeric = numeric_entropies(params, n_r, n_c=spec.n_c, points=spec.points, half_width=spec.half_width)
    return [eta, float(n_r), sle_closed, svne_closed, numeric.sle, numeric.svne]


def cmd_measures(spec: SweepSpec, config: Optional[Dict[str, Any]] = None):
    runner = SweepRunner({"command": "measures", **(config or {})})
    outcome = runner.run(lambda point: measures_row(spec, *point), spec.grid_points())
    dataset = FigureDataset.build("measures", outcome.rows, {"command": "measures", **spec.parameters()})
    return dataset, outcome.failures


def check_tei_contract(spec: SweepSpec, indicator, slice_kind) -> None:
    """Reject IPR requests the indicator cannot honour before any work starts."""
    indicator, slice_kind = Indicator(indicator), SliceKind(slice_kind)
    if indicator is not Indicator.ipr:
        return
    if slice_kind is not SliceKind.position:
        raise UsageError("--indicator ipr is defined on --slice position only")
    bad = [eta for eta in spec.etas if abs(eta - IPR_ETA) > 1e-12]
    if bad:
        raise UsageError(f"--indicator ipr requires eta = 0.25 (L_c = L_r); got {bad}")


def tei_row(spec: SweepSpec, indicator, slice_kind, eta: float, n_r: int) -> List[Optional[float]]:
    state = ProductEigenstate(params=OscillatorParams.from_ratio(eta), n_c=spec.n_c, n_r=n_r)
    result = evaluate_indicator(indicator, slice_kind, state, points=spec.points, half_width=spec.half_width)
    return [eta, float(n_r), result.value]


def cmd_tei(spec: SweepSpec, indicator, slice_kind, config: Optional[Dict[str, Any]] = None):
    check_tei_contract(spec, indicator, slice_kind)
    indicator, slice_kind = Indicator(indicator), SliceKind(slice_kind)
    runner = SweepRunner({"command": "tei", **(config or {})})
    outcome = runner.run(lambda point: tei_row(spec, indicator, slice_kind, *point), spec.grid_points())
    manifest = {
        "command": "tei",
        "indicator": indicator.value,
        "slice": slice_kind.value,
        **spec.parameters(),
    }
    units = {"value": "1"} if indicator is Indicator.ipr else None
    return FigureDataset.build("tei", outcome.rows, manifest, units=units), outcome.failures
