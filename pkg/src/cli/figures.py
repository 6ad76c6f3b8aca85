# src/cli/figures.py
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from jsonschema import validate
from pydantic import BaseModel, ConfigDict, Field

from src.cli.datasets import FigureDataset, load_schema
from src.cli.sweep import SweepRunner
from src.core.config import default_points
from src.measures.measures import numeric_entropies, sle_ground_closed, sle_uncoupled, svne_ground_closed, svne_uncoupled
from src.model.oscillator import OscillatorParams, ProductEigenstate
from src.tomogram.tomogram import IPR_ETA, Indicator, SliceKind, evaluate_indicator, log_symmetric_etas

logger = logging.getLogger(__name__)

# η grid: 49 points, log-symmetric about 1 on [0.05, 20]
DEFAULT_ETA_MAX = 20.0
DEFAULT_ETA_POINTS = 49
DEFAULT_N_R = (1, 2, 3, 4, 5)
UNCOUPLED_NU_MAX = 30
IPR_N_R = (0, 1, 2, 3, 4, 5)

FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6")


class FigureParameters(BaseModel):
    model_config = ConfigDict(frozen=True)

    etas: List[float] = Field(default_factory=lambda: log_symmetric_etas(DEFAULT_ETA_MAX, DEFAULT_ETA_POINTS))
    n_r: List[int] = Field(default_factory=lambda: list(DEFAULT_N_R))
    points: int = Field(default_factory=default_points, ge=16)
    nu_r_max: int = Field(UNCOUPLED_NU_MAX, ge=0)
    ipr_n_r: List[int] = Field(default_factory=lambda: list(IPR_N_R))
    ipr_eta: float = IPR_ETA


class FiguresReport(BaseModel):
    datasets: Dict[str, FigureDataset]
    failures: List[str] = Field(default_factory=list)
    manifest_path: Path

    @property
    def ok(self) -> bool:
        return not self.failures


# === 1. Row builders ===


def uncoupled_row(nu_r: int) -> List[Optional[float]]:
    return [float(nu_r), sle_uncoupled(nu_r), svne_uncoupled(nu_r)]


def ground_row(eta: float) -> List[Optional[float]]:
    return [eta, sle_ground_closed(eta), svne_ground_closed(eta)]


def numeric_row(eta: float, n_r: int, points: int) -> List[Optional[float]]:
    pair = numeric_entropies(OscillatorParams.from_ratio(eta), n_r, points=points)
    return [eta, float(n_r), pair.sle, pair.svne]


def _state(eta: float, n_r: int) -> ProductEigenstate:
    return ProductEigenstate(params=OscillatorParams.from_ratio(eta), n_c=0, n_r=n_r)


def bd_row(eta: float, n_r: int, points: int) -> List[Optional[float]]:
    result = evaluate_indicator(Indicator.bd, SliceKind.average, _state(eta, n_r), points=points)
    return [eta, float(n_r), result.per_slice["position"], result.per_slice["momentum"], result.value]


def kl_row(eta: float, n_r: int, points: int) -> List[Optional[float]]:
    result = evaluate_indicator(Indicator.kl, SliceKind.average, _state(eta, n_r), points=points)
    return [eta, float(n_r), result.value]


def ipr_row(n_r: int, points: int) -> List[Optional[float]]:
    result = evaluate_indicator(Indicator.ipr, SliceKind.position, _state(IPR_ETA, n_r), points=points)
    return [float(n_r), result.value]


# === 2. Figure assembly ===


def build_figures(parameters: FigureParameters, config: Optional[Dict[str, Any]] = None):
    """All six datasets plus the rows skipped on the way, in figure order."""
    config = config or {}
    points = parameters.points
    pairs = [(eta, n_r) for eta in parameters.etas for n_r in parameters.n_r]
    plan = {
        "fig1": (uncoupled_row, list(range(parameters.nu_r_max + 1))),
        "fig2": (ground_row, list(parameters.etas)),
        "fig3": (lambda pair: numeric_row(*pair, points), pairs),
        "fig4": (lambda pair: bd_row(*pair, points), pairs),
        "fig5": (lambda pair: kl_row(*pair, points), pairs),
        "fig6": (lambda n_r: ipr_row(n_r, points), list(parameters.ipr_n_r)),
    }

    datasets: Dict[str, FigureDataset] = {}
    failures: List[str] = []
    for figure in FIGURE_IDS:
        fn, items = plan[figure]
        runner = SweepRunner({**config, "command": figure})
        outcome = runner.run(fn, items)
        manifest = {"skipped": len(outcome.failures), **parameters.model_dump(mode="json")}
        datasets[figure] = FigureDataset.build(figure, outcome.rows, manifest)
        failures.extend(f"{figure} {message}" for message in outcome.failures)
    return datasets, failures


def write_manifest(
    out_dir: Path,
    datasets: Dict[str, FigureDataset],
    parameters: FigureParameters,
    fmt: str,
) -> Path:
    manifest = {
        "format": fmt,
        "figures": {
            figure: {
                "file": f"{figure}.{fmt}",
                "columns": dataset.column_names,
                "rows": len(dataset.rows),
                "skipped": dataset.manifest.get("skipped", 0),
            }
            for figure, dataset in datasets.items()
        },
        "parameters": parameters.model_dump(mode="json"),
    }
    validate(instance=manifest, schema=load_schema()["definitions"]["Manifest"])
    path = out_dir / "manifest.json"
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(json.dumps(manifest, indent=2) + "\n")
    except OSError as e:
        raise OSError(f"cannot write manifest to {path}: {e}") from e
    return path


def cmd_figures(
    out_dir,
    fmt: str = "csv",
    points: Optional[int] = None,
    etas: Optional[Sequence[float]] = None,
    n_r: Optional[Sequence[int]] = None,
    config: Optional[Dict[str, Any]] = None,
) -> FiguresReport:
    """Write fig1..fig6 and manifest.json into out_dir."""
    overrides = {"points": points, "etas": list(etas) if etas is not None else None}
    overrides["n_r"] = list(n_r) if n_r is not None else None
    parameters = FigureParameters(**{k: v for k, v in overrides.items() if v is not None})

    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create output directory {out_dir}: {e}") from e

    logger.info(
        f"Building figure datasets: {len(parameters.etas)} eta values, n_r {parameters.n_r}, "
        f"{parameters.points} grid points"
    )
    datasets, failures = build_figures(parameters, config)
    for figure, dataset in datasets.items():
        dataset.write(out_dir / f"{figure}.{fmt}", fmt)
    manifest_path = write_manifest(out_dir, datasets, parameters, fmt)
    logger.info(f"Figures written to {out_dir} ({len(failures)} rows skipped)")
    return FiguresReport(datasets=datasets, failures=failures, manifest_path=manifest_path)
