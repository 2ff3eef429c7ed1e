"""Unit-disk graphs on square lattices and exact independent-set oracles.

Vertices live at lattice sites (spacing ``a`` micrometers) and are
connected whenever they are closer than the disk radius R_d.  With
sqrt(2) a < R_d < 2 a this wires nearest and diagonal neighbours, the
operating regime of the blockade condition.

Two independent exact MIS routines are provided: an independence-
polynomial recursion counting sets of every size, and a
branch-and-bound search with degree pivoting.  Agreement between them
is part of the test suite.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

__all__ = [
    "DEFAULT_LATTICE_A",
    "DEFAULT_RD_FACTOR",
    "MAX_ENUM_VERTICES",
    "UnitDiskGraph",
    "MISResult",
    "generate_lattice_udgs",
    "filter_unique_mis_noniso",
    "brute_force_mis",
    "branch_and_bound_mis",
    "hardness_parameter",
    "are_isomorphic",
    "blockade_radius",
]

#: lattice constant in micrometers
DEFAULT_LATTICE_A = 5.3

#: disk radius as a multiple of the lattice constant; any value strictly
#: between sqrt(2) and 2 produces the nearest + diagonal edge set
DEFAULT_RD_FACTOR = 1.6

#: exhaustive enumeration guard
MAX_ENUM_VERTICES = 30

#: exact isomorphism search guard
MAX_ISO_VERTICES = 16


@dataclass(frozen=True)
class UnitDiskGraph:
    """Geometric graph: vertices within R_d of each other are adjacent.

    ``edges`` is derived from the positions on construction, so the
    defining equivalence (i, j) in E <=> ||x_i - x_j|| < R_d holds by
    construction.  ``known_mis_size`` carries externally supplied MIS
    metadata for graphs too large for the exact oracles.
    """

    positions: tuple
    r_d: float
    rows: int | None = None
    cols: int | None = None
    lattice_a: float | None = None
    known_mis_size: int | None = None
    edges: tuple = field(init=False, compare=False)

    def __post_init__(self):
        pos = tuple((float(x), float(y)) for x, y in self.positions)
        if self.r_d <= 0:
            raise ValueError("disk radius must be positive")
        object.__setattr__(self, "positions", pos)
        edges = []
        for i in range(len(pos)):
            for j in range(i + 1, len(pos)):
                dx = pos[i][0] - pos[j][0]
                dy = pos[i][1] - pos[j][1]
                if math.hypot(dx, dy) < self.r_d:
                    edges.append((i, j))
        object.__setattr__(self, "edges", tuple(edges))

    @property
    def n_vertices(self) -> int:
        return len(self.positions)

    @cached_property
    def neighbor_masks(self) -> tuple:
        """Bitmask of neighbours per vertex (bit v set for neighbour v)."""
        masks = [0] * self.n_vertices
        for i, j in self.edges:
            masks[i] |= 1 << j
            masks[j] |= 1 << i
        return tuple(masks)

    @cached_property
    def degrees(self) -> tuple:
        return tuple(bin(m).count("1") for m in self.neighbor_masks)

    def distance(self, i: int, j: int) -> float:
        (xi, yi), (xj, yj) = self.positions[i], self.positions[j]
        return math.hypot(xi - xj, yi - yj)


def _lattice_positions(rows: int, cols: int, a: float):
    return [(c * a, r * a) for r in range(rows) for c in range(cols)]


def generate_lattice_udgs(
    rows: int,
    cols: int,
    a: float = DEFAULT_LATTICE_A,
    occupancy=None,
    seed: int | None = None,
    r_d: float | None = None,
) -> list:
    """Place atoms on an rows x cols lattice and build their UDGs.

    ``occupancy`` is one node count or a collection of node counts.
    Without a seed every site subset of each requested size is
    enumerated (the small-instance protocol); with a seed one uniformly
    random subset is drawn per size (the large-instance protocol).
    """
    n_sites = rows * cols
    if occupancy is None:
        raise ValueError("occupancy (node count or counts) is required")
    sizes = [occupancy] if isinstance(occupancy, int) else list(occupancy)
    for size in sizes:
        if not 1 <= size <= n_sites:
            raise ValueError(f"cannot place {size} nodes on {n_sites} sites")
    radius = (DEFAULT_RD_FACTOR * a) if r_d is None else r_d
    sites = _lattice_positions(rows, cols, a)

    graphs = []
    if seed is None:
        for size in sizes:
            for subset in itertools.combinations(range(n_sites), size):
                graphs.append(
                    UnitDiskGraph(
                        positions=tuple(sites[i] for i in subset),
                        r_d=radius,
                        rows=rows,
                        cols=cols,
                        lattice_a=a,
                    )
                )
    else:
        rng = np.random.default_rng(seed)
        for size in sizes:
            subset = np.sort(rng.choice(n_sites, size=size, replace=False))
            graphs.append(
                UnitDiskGraph(
                    positions=tuple(sites[i] for i in subset),
                    r_d=radius,
                    rows=rows,
                    cols=cols,
                    lattice_a=a,
                )
            )
    return graphs


# ------------------------------------------------------------ MIS oracles


@dataclass(frozen=True)
class MISResult:
    """Exact independence structure: counts N_M for every set size M."""

    mis_size: int
    counts: tuple
    maximum_sets: tuple

    @property
    def n_mis(self) -> int:
        return self.counts[self.mis_size]


def _add_poly(p, q):
    if len(p) < len(q):
        p, q = q, p
    out = list(p)
    for i, c in enumerate(q):
        out[i] += c
    return out


def _independence_polynomial(masks, mask, cache):
    """Coefficients c[M] = number of independent sets of size M inside ``mask``."""
    if mask == 0:
        return [1]
    got = cache.get(mask)
    if got is not None:
        return got
    # pivot on the highest-degree remaining vertex; if even that one is
    # isolated, the rest factor as (1 + x)^k
    best, best_deg = -1, -1
    m = mask
    while m:
        v = (m & -m).bit_length() - 1
        deg = bin(masks[v] & mask).count("1")
        if deg > best_deg:
            best, best_deg = v, deg
        m &= m - 1
    if best_deg == 0:
        k = bin(mask).count("1")
        out = [math.comb(k, i) for i in range(k + 1)]
    else:
        without = _independence_polynomial(masks, mask & ~(1 << best), cache)
        with_v = _independence_polynomial(
            masks, mask & ~((1 << best) | masks[best]), cache
        )
        out = _add_poly(without, [0] + with_v)
    cache[mask] = out
    return out


def _collect_maximum_sets(masks, n, target):
    found = []

    def rec(mask, chosen, size):
        if size + bin(mask).count("1") < target:
            return
        if size == target:
            found.append(frozenset(chosen))
            return
        if mask == 0:
            return
        v = (mask & -mask).bit_length() - 1
        rec(mask & ~(1 << v), chosen, size)
        chosen.append(v)
        rec(mask & ~((1 << v) | masks[v]), chosen, size + 1)
        chosen.pop()

    rec((1 << n) - 1, [], 0)
    return tuple(sorted(found, key=sorted))


@lru_cache(maxsize=None)
def brute_force_mis(graph: UnitDiskGraph) -> MISResult:
    """Exact counts of independent sets of every size, plus all maximum sets.

    Uses the independence-polynomial recursion I(G) = I(G - v) +
    x I(G - N[v]) with memoization; guarded at MAX_ENUM_VERTICES.
    """
    n = graph.n_vertices
    if n > MAX_ENUM_VERTICES:
        raise ValueError(f"exhaustive enumeration limited to {MAX_ENUM_VERTICES} vertices")
    masks = graph.neighbor_masks
    poly = _independence_polynomial(masks, (1 << n) - 1, {})
    mis_size = len(poly) - 1
    maximum_sets = _collect_maximum_sets(masks, n, mis_size) if n else (frozenset(),)
    return MISResult(mis_size=mis_size, counts=tuple(poly), maximum_sets=maximum_sets)


def branch_and_bound_mis(graph: UnitDiskGraph):
    """Independent second MIS routine: branch and bound with degree pivoting.

    Returns (mis_size, N_mis, N_mis_minus_1).  Shares no code with
    :func:`brute_force_mis`; used as a cross-check oracle.
    """
    n = graph.n_vertices
    if n > MAX_ENUM_VERTICES:
        raise ValueError(f"exhaustive enumeration limited to {MAX_ENUM_VERTICES} vertices")
    masks = graph.neighbor_masks

    best = 0

    def search(mask, size):
        nonlocal best
        if size > best:
            best = size
        remaining = bin(mask).count("1")
        if remaining == 0 or size + remaining <= best:
            return
        # pivot: highest degree inside the candidate set
        pivot, pivot_deg = -1, -1
        m = mask
        while m:
            v = (m & -m).bit_length() - 1
            deg = bin(masks[v] & mask).count("1")
            if deg > pivot_deg:
                pivot, pivot_deg = v, deg
            m &= m - 1
        search(mask & ~((1 << pivot) | masks[pivot]), size + 1)
        search(mask & ~(1 << pivot), size)

    search((1 << n) - 1, 0)
    mis_size = best

    def count_exact(target):
        total = 0

        def rec(mask, size):
            nonlocal total
            if size == target:
                total += 1
                return
            if mask == 0 or size + bin(mask).count("1") < target:
                return
            v = (mask & -mask).bit_length() - 1
            rec(mask & ~((1 << v) | masks[v]), size + 1)
            rec(mask & ~(1 << v), size)

        rec((1 << n) - 1, 0)
        return total

    n_mis = count_exact(mis_size)
    n_below = count_exact(mis_size - 1) if mis_size >= 1 else 0
    return mis_size, n_mis, n_below


def hardness_parameter(graph: UnitDiskGraph) -> float:
    """Degeneracy-ratio difficulty proxy N_(M-1) / (M N_M) for M = |MIS|."""
    result = brute_force_mis(graph)
    m = result.mis_size
    if m == 0:
        raise ValueError("hardness parameter undefined for an empty graph")
    return float(Fraction(result.counts[m - 1], m * result.counts[m]))


# ------------------------------------------------------------ isomorphism


def _neighbor_degree_signature(graph: UnitDiskGraph):
    degs = graph.degrees
    masks = graph.neighbor_masks
    sig = []
    for v in range(graph.n_vertices):
        neigh = sorted(degs[u] for u in range(graph.n_vertices) if masks[v] >> u & 1)
        sig.append((degs[v], tuple(neigh)))
    return sig


def are_isomorphic(g1: UnitDiskGraph, g2: UnitDiskGraph) -> bool:
    """Exact isomorphism by backtracking with degree-signature pruning."""
    n = g1.n_vertices
    if n != g2.n_vertices or len(g1.edges) != len(g2.edges):
        return False
    if n > MAX_ISO_VERTICES:
        raise ValueError(f"exact isomorphism search limited to {MAX_ISO_VERTICES} vertices")
    sig1 = _neighbor_degree_signature(g1)
    sig2 = _neighbor_degree_signature(g2)
    if sorted(sig1) != sorted(sig2):
        return False
    masks1, masks2 = g1.neighbor_masks, g2.neighbor_masks
    # map vertices of g1 in order of decreasing constraint (degree)
    order = sorted(range(n), key=lambda v: -g1.degrees[v])
    mapping = [-1] * n
    used = [False] * n

    def extend(k):
        if k == n:
            return True
        v = order[k]
        for w in range(n):
            if used[w] or sig1[v] != sig2[w]:
                continue
            ok = True
            for prev in order[:k]:
                if (masks1[v] >> prev & 1) != (masks2[w] >> mapping[prev] & 1):
                    ok = False
                    break
            if ok:
                mapping[v] = w
                used[w] = True
                if extend(k + 1):
                    return True
                used[w] = False
                mapping[v] = -1
        return False

    return extend(0)


def filter_unique_mis_noniso(graphs) -> list:
    """Keep graphs with exactly one maximum independent set, then drop
    isomorphic duplicates (first occurrence wins)."""
    unique = [g for g in graphs if brute_force_mis(g).n_mis == 1]
    survivors = []
    for g in unique:
        if not any(are_isomorphic(g, kept) for kept in survivors):
            survivors.append(g)
    return survivors


def blockade_radius(c6: float, omega: float) -> float:
    """R_b = (C6 / Omega)^(1/6) in micrometers (hbar = 1, angular units)."""
    if omega <= 0:
        raise ValueError("Rabi frequency must be positive")
    return (c6 / omega) ** (1.0 / 6.0)
