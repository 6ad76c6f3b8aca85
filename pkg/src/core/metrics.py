# src/core/metrics.py
from prometheus_client import Counter, Histogram, REGISTRY


def create_metric(metric_class, name, doc, labels=None, **kwargs):
    try:
        return metric_class(name, doc, labels or [], **kwargs)
    except ValueError:
        return REGISTRY._names_to_collectors.get(name) or metric_class(name + "_v2", doc, labels or [], **kwargs)


# Define all metrics here, imported once globally
SCHMIDT_DECOMPOSITIONS = create_metric(
    Counter, "oscitom_schmidt_decompositions_total", "Numerical Schmidt decompositions", ["route"]
)
SCHMIDT_CLAMPED = create_metric(
    Counter, "oscitom_schmidt_clamped_total", "Schmidt coefficients clamped from small negative values"
)
INDICATOR_EVALUATIONS = create_metric(
    Counter, "oscitom_indicator_evaluations_total", "Tomographic indicator evaluations", ["indicator", "slice"]
)
GRID_FAILURES = create_metric(
    Counter, "oscitom_grid_failures_total", "Normalization or trace deficits beyond tolerance", ["what"]
)
SWEEP_ROWS = create_metric(
    Counter, "oscitom_sweep_rows_total", "Sweep rows by outcome", ["command", "outcome"]
)
SWEEP_POINT_DURATION = create_metric(
    Histogram,
    "oscitom_sweep_point_duration_seconds",
    "Time spent computing one sweep point",
    ["command"],
    buckets=[0.01, 0.05, 0.1, 0.5, 1.0, 2.5, 5.0, 10.0],
)
SELFCHECK_RESULTS = create_metric(
    Counter, "oscitom_selfcheck_results_total", "Self-check outcomes", ["outcome"]
)
