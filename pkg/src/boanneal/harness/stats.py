"""Median/quartile aggregation over repetition records."""

from typing import NamedTuple

import numpy as np


class Aggregate(NamedTuple):
    median: float
    lower_quartile: float
    upper_quartile: float
    n: int


#: metric name -> extractor over a RunRecord with a non-empty trace
_METRICS = {
    "best": lambda r: r.trace.best_value,
    "final": lambda r: r.trace.entries[-1].value,
    "first": lambda r: r.trace.entries[0].value,
}


def metric_values(records, metric: str = "best") -> list:
    """Per-record scalars; error records (no trace) are skipped."""
    try:
        extract = _METRICS[metric]
    except KeyError:
        raise ValueError(
            f"unknown metric {metric!r}; choose from {sorted(_METRICS)}"
        ) from None
    return [extract(r) for r in records
            if getattr(r, "trace", None) is not None and len(r.trace) > 0]


def aggregate(records, metric: str = "best") -> Aggregate:
    """(median, lower quartile, upper quartile, n) of a metric.

    Accepts either RunRecords or raw numbers.  Quartiles interpolate
    linearly between order statistics, so (1, 2, 3) -> 2 with quartiles
    1.5 and 2.5, and a single value v gives (v, v, v, 1).
    """
    records = list(records)
    if records and isinstance(records[0], (int, float, np.floating)):
        values = [float(v) for v in records]
    else:
        values = metric_values(records, metric)
    if not values:
        raise ValueError("nothing to aggregate")
    lower, median, upper = np.percentile(values, [25.0, 50.0, 75.0])
    return Aggregate(float(median), float(lower), float(upper), len(values))


def running_best_quartiles(records):
    """Median and quartile curves of the best-so-far value per evaluation.

    Truncated to the shortest trace so every column aggregates the same
    number of repetitions.  Returns (evaluations, median, lower, upper).
    """
    curves = [r.trace.running_best() for r in records
              if getattr(r, "trace", None) is not None and len(r.trace) > 0]
    if not curves:
        raise ValueError("no usable traces")
    length = min(len(c) for c in curves)
    stacked = np.vstack([c[:length] for c in curves])
    lower, median, upper = np.percentile(stacked, [25.0, 50.0, 75.0], axis=0)
    return np.arange(1, length + 1), median, lower, upper
