"""MIS cost function and sample-based figures of merit.

Bitstring convention: character k of a bitstring is vertex k, '1'
meaning the atom was measured in the Rydberg state (vertex selected).
The same convention orders the computational basis, so vertex 0 is the
most significant bit of a basis index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import UnitDiskGraph, brute_force_mis

__all__ = [
    "DEFAULT_ALPHA",
    "SampleSet",
    "mis_energy",
    "is_independent",
    "p_mis",
    "p_mis_exact",
    "fom_top_quantile",
    "approximation_ratio",
    "excitation_probabilities",
]

#: edge-violation penalty weight in the cost function
DEFAULT_ALPHA = 1.2


@dataclass(frozen=True)
class SampleSet:
    """Measurement outcomes: (bitstring, count) pairs and the shot total."""

    entries: tuple
    total_shots: int

    def __post_init__(self):
        entries = tuple((str(b), int(c)) for b, c in self.entries)
        object.__setattr__(self, "entries", entries)
        if any(c < 1 for _, c in entries):
            raise ValueError("counts must be >= 1")
        if entries and len({len(b) for b, _ in entries}) != 1:
            raise ValueError("bitstrings must share one length")
        if any(set(b) - {"0", "1"} for b, _ in entries):
            raise ValueError("bitstrings must be binary")
        if sum(c for _, c in entries) != self.total_shots:
            raise ValueError("counts must sum to total_shots")

    @classmethod
    def from_counts(cls, counts: dict) -> "SampleSet":
        entries = tuple(sorted(counts.items()))
        return cls(entries=entries, total_shots=sum(counts.values()))

    @property
    def n_bits(self) -> int:
        return len(self.entries[0][0]) if self.entries else 0


def _check_length(bits: str, graph: UnitDiskGraph):
    if len(bits) != graph.n_vertices:
        raise ValueError(
            f"bitstring length {len(bits)} != {graph.n_vertices} vertices"
        )


def mis_energy(bits: str, graph: UnitDiskGraph, alpha: float = DEFAULT_ALPHA) -> float:
    """Cost H(x) = -sum_i x_i + alpha sum_(i,j) in E x_i x_j."""
    _check_length(bits, graph)
    x = [c == "1" for c in bits]
    selected = sum(x)
    violations = sum(1 for i, j in graph.edges if x[i] and x[j])
    return -float(selected) + alpha * violations


def is_independent(bits: str, graph: UnitDiskGraph) -> bool:
    _check_length(bits, graph)
    x = [c == "1" for c in bits]
    return not any(x[i] and x[j] for i, j in graph.edges)


def _mis_size(graph: UnitDiskGraph) -> int:
    if graph.known_mis_size is not None:
        return graph.known_mis_size
    return brute_force_mis(graph).mis_size


def p_mis(samples: SampleSet, graph: UnitDiskGraph) -> float:
    """Fraction of shots whose bitstring is a maximum independent set."""
    target = _mis_size(graph)
    hits = 0
    for bits, count in samples.entries:
        _check_length(bits, graph)
        if bits.count("1") == target and is_independent(bits, graph):
            hits += count
    return hits / samples.total_shots if samples.total_shots else 0.0


def p_mis_exact(amplitudes: np.ndarray, graph: UnitDiskGraph) -> float:
    """Total probability weight on maximum-independent-set basis states."""
    n = graph.n_vertices
    amps = np.asarray(amplitudes)
    if amps.shape[0] != 2**n:
        raise ValueError("state dimension does not match the graph")
    result = brute_force_mis(graph)
    total = 0.0
    for vertices in result.maximum_sets:
        idx = 0
        for v in vertices:
            idx |= 1 << (n - 1 - v)  # vertex 0 is the most significant bit
        total += float(np.abs(amps[idx]) ** 2)
    return total


def fom_top_quantile(
    samples: SampleSet,
    graph: UnitDiskGraph,
    x: float = 0.5,
    alpha: float = DEFAULT_ALPHA,
) -> float:
    """Negated mean cost of the best ceil(x * shots) shots (maximization FoM)."""
    if not samples.entries:
        raise ValueError("empty sample set")
    if not 0.0 < x <= 1.0:
        raise ValueError("quantile fraction must lie in (0, 1]")
    pairs = sorted(
        ((mis_energy(bits, graph, alpha), count) for bits, count in samples.entries),
        key=lambda t: t[0],
    )
    keep = math.ceil(x * samples.total_shots)
    total, used = 0.0, 0
    for energy, count in pairs:
        take = min(count, keep - used)
        total += energy * take
        used += take
        if used == keep:
            break
    return -total / keep


def approximation_ratio(samples: SampleSet, graph: UnitDiskGraph,
                        alpha: float = DEFAULT_ALPHA):
    """(|min sampled cost| / |MIS|, argmin-is-independent flag).

    The cost of a non-independent string can still be negative, so the
    ratio alone can mislead; the validity flag reports whether the best
    sampled string actually satisfies the independence constraint.
    """
    if not samples.entries:
        raise ValueError("empty sample set")
    best_bits, best_energy = None, math.inf
    for bits, _ in samples.entries:
        e = mis_energy(bits, graph, alpha)
        if e < best_energy:
            best_bits, best_energy = bits, e
    ratio = abs(best_energy) / _mis_size(graph)
    return ratio, is_independent(best_bits, graph)


def excitation_probabilities(samples: SampleSet, graph: UnitDiskGraph) -> np.ndarray:
    """Per-vertex excitation frequency <n_i> from a sample set."""
    n = graph.n_vertices
    acc = np.zeros(n)
    for bits, count in samples.entries:
        _check_length(bits, graph)
        acc += count * np.array([c == "1" for c in bits], dtype=float)
    return acc / samples.total_shots if samples.total_shots else acc
