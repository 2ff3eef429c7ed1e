"""Plot-data emission: CSV files shaped for the standard figures.

No images are produced here -- only the data files a plotting script
would consume.  Each kind documents the ``source`` object it expects.
"""

import csv
import math

from .. import pspin
from .stats import aggregate, running_best_quartiles


def _write_rows(path, fieldnames, rows, comments=()):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for comment in comments:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        writer.writerows(rows)


def _emit_scaling(source, path):
    """source: iterable of (x, values-or-records) pairs, e.g. (N, records).

    Rows are sorted by x ascending so scaling curves read left to right.
    """
    rows = []
    for x, group in source:
        agg = aggregate(group)
        rows.append((x, agg.median, agg.lower_quartile, agg.upper_quartile,
                     agg.n))
    rows.sort(key=lambda r: r[0])
    _write_rows(path, ("n_spins", "median", "lower_quartile",
                       "upper_quartile", "count"), rows)


def _emit_best_vs_evaluations(source, path):
    """source: RunRecords of one experiment."""
    evals, median, lower, upper = running_best_quartiles(list(source))
    rows = zip(evals.tolist(), median.tolist(), lower.tolist(),
               upper.tolist())
    _write_rows(path, ("evaluation", "median_best", "lower_quartile",
                       "upper_quartile"), rows)


def _emit_gap_landscape(source, path):
    """source: (system, s_values) or (system, s_values, lambda_values)."""
    system, s_values, *rest = source
    lam_values = rest[0] if rest else None
    rows = []
    if lam_values is None:
        for s in s_values:
            rows.append((float(s), pspin.spectral_gap(system, float(s))))
        _write_rows(path, ("s", "gap"), rows)
        return
    for s in s_values:
        for lam in lam_values:
            rows.append((float(s), float(lam),
                         pspin.spectral_gap(system, float(s), float(lam))))
    _write_rows(path, ("s", "lambda", "gap"), rows)


def _emit_control_path(source, path):
    """source: (times, named control curves) with curves a dict of arrays."""
    times, curves = source
    names = list(curves)
    rows = [(float(t), *(float(curves[name][k]) for name in names))
            for k, t in enumerate(times)]
    _write_rows(path, ("t", *names), rows)


def _emit_instantaneous(source, path):
    """source: (times, fidelities, gaps); arrays of equal length."""
    times, fidelities, gaps = source
    rows = zip((float(t) for t in times), (float(f) for f in fidelities),
               (float(g) for g in gaps))
    _write_rows(path, ("t", "fidelity", "gap"), rows)


def _emit_mis_histogram(source, path):
    """source: (energies, mis_size) or (energies, mis_size, bin_width).

    Bins are the integer multiples of the bin width; empty bins are not
    written.  The |MIS| reference value rides along as a comment so the
    plotting side can draw its marker line.
    """
    energies, mis_size, *rest = source
    width = float(rest[0]) if rest else 1.0
    if width <= 0:
        raise ValueError("bin width must be positive")
    counts = {}
    for e in energies:
        key = math.floor(float(e) / width + 0.5)
        counts[key] = counts.get(key, 0) + 1
    rows = [(key * width, counts[key]) for key in sorted(counts)]
    _write_rows(path, ("energy", "count"), rows,
                comments=(f"reference_mis_size = {mis_size}",))


def _emit_excitations(source, path):
    """source: per-node excitation probabilities."""
    rows = [(node, float(p)) for node, p in enumerate(source)]
    _write_rows(path, ("node", "probability"), rows)


_KINDS = {
    "scaling": _emit_scaling,
    "best-vs-evaluations": _emit_best_vs_evaluations,
    "gap-landscape": _emit_gap_landscape,
    "control-path": _emit_control_path,
    "instantaneous": _emit_instantaneous,
    "mis-histogram": _emit_mis_histogram,
    "excitations": _emit_excitations,
}


def emit_plot_data(source, kind: str, path):
    """Write one CSV data file of the requested kind."""
    try:
        emit = _KINDS[kind]
    except KeyError:
        raise ValueError(
            f"unknown plot kind {kind!r}; choose from {sorted(_KINDS)}"
        ) from None
    emit(source, path)
    return path
