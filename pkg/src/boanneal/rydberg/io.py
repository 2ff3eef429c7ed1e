"""Graph files and measurement-record ingestion.

Graphs are stored as JSON with explicit positions (micrometers), the
disk radius, lattice metadata, and optionally an externally known MIS
size (for instances beyond the exact oracles).  Edges are written for
readability but re-derived and cross-checked on load, since the
unit-disk property defines them.

Sample files are newline-delimited ``bitstring [count]`` records, as
produced by hardware runs; '#' starts a comment.
"""

from __future__ import annotations

import json
from pathlib import Path

from .graphs import UnitDiskGraph
from .scoring import SampleSet

__all__ = ["save_graph", "load_graph", "ingest_samples", "SampleFormatError"]

GRAPH_FORMAT_VERSION = 1


class SampleFormatError(ValueError):
    """Raised for malformed sample files; ``errors`` lists every bad line."""

    def __init__(self, path, errors):
        self.errors = list(errors)
        detail = "; ".join(self.errors[:5])
        more = "" if len(self.errors) <= 5 else f" (+{len(self.errors) - 5} more)"
        super().__init__(f"{path}: {detail}{more}")


def graph_to_dict(graph: UnitDiskGraph) -> dict:
    out = {
        "format_version": GRAPH_FORMAT_VERSION,
        "positions_um": [list(p) for p in graph.positions],
        "r_d_um": graph.r_d,
        "edges": [list(e) for e in graph.edges],
    }
    if graph.rows is not None:
        out["lattice"] = {
            "rows": graph.rows,
            "cols": graph.cols,
            "a_um": graph.lattice_a,
        }
    if graph.known_mis_size is not None:
        out["known_mis_size"] = graph.known_mis_size
    return out


def graph_from_dict(data: dict) -> UnitDiskGraph:
    lattice = data.get("lattice") or {}
    graph = UnitDiskGraph(
        positions=tuple(tuple(p) for p in data["positions_um"]),
        r_d=float(data["r_d_um"]),
        rows=lattice.get("rows"),
        cols=lattice.get("cols"),
        lattice_a=lattice.get("a_um"),
        known_mis_size=data.get("known_mis_size"),
    )
    stored = {tuple(sorted(e)) for e in data.get("edges", [])}
    derived = {tuple(sorted(e)) for e in graph.edges}
    if stored and stored != derived:
        raise ValueError(
            "stored edges disagree with the unit-disk rule for these positions"
        )
    return graph


def save_graph(graph: UnitDiskGraph, path) -> None:
    Path(path).write_text(json.dumps(graph_to_dict(graph), indent=2) + "\n")


def load_graph(path) -> UnitDiskGraph:
    return graph_from_dict(json.loads(Path(path).read_text()))


def ingest_samples(path, graph: UnitDiskGraph) -> SampleSet:
    """Parse a ``bitstring [count]`` file; duplicate bitstrings merge.

    All malformed lines are collected and reported together with their
    line numbers, rather than failing at the first one.
    """
    counts: dict = {}
    errors = []
    n = graph.n_vertices
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) > 2:
                errors.append(f"line {lineno}: expected 'bitstring [count]'")
                continue
            bits = parts[0]
            if set(bits) - {"0", "1"}:
                errors.append(f"line {lineno}: non-binary characters in {bits!r}")
                continue
            if len(bits) != n:
                errors.append(
                    f"line {lineno}: bitstring length {len(bits)} != {n} vertices"
                )
                continue
            count = 1
            if len(parts) == 2:
                try:
                    count = int(parts[1])
                except ValueError:
                    errors.append(f"line {lineno}: bad count {parts[1]!r}")
                    continue
                if count < 1:
                    errors.append(f"line {lineno}: count must be >= 1")
                    continue
            counts[bits] = counts.get(bits, 0) + count
    if errors:
        raise SampleFormatError(path, errors)
    if not counts:
        raise SampleFormatError(path, ["no records found"])
    return SampleSet.from_counts(counts)
