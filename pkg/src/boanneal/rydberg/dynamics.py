"""Rydberg-array Hamiltonian and drive-protocol simulation.

H(t) = (Omega(t)/2) sum_i sigma_x^i - Delta(t) sum_i n_i
       + sum_{i<j} V_ij n_i n_j,      V_ij = C6 / r_ij^6

with n = (1 - sigma_z)/2 the Rydberg-state projector.  Interactions are
kept for every atom pair (the unit-disk edge set only defines the MIS
problem).  The Rabi drive Omega(t) is a trapezoid -- linear ramps of
length tau_omega around a flat top -- and the detuning Delta(t) sweeps
from delta_i < 0 to delta_f > 0 either linearly or through interpolated
interior points (optionally low-pass smoothed).

Frequencies are angular MHz (rad/us), times in us, distances in um.
Basis ordering: vertex 0 is the most significant bit, so the start
state |00...0> is index 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.sparse import csr_matrix

from ..schedule import Family, ParameterVector, ScheduleSpec, evaluate
from .graphs import UnitDiskGraph
from .scoring import SampleSet

__all__ = [
    "DEFAULT_C6",
    "MAX_SIM_VERTICES",
    "RydbergParams",
    "omega_schedule",
    "delta_schedule",
    "rydberg_hamiltonian",
    "evolve_rydberg",
    "sample",
]

#: van der Waals coefficient, angular MHz * um^6 (Rb-87, 70S)
DEFAULT_C6 = 5.42e6

#: state-vector simulation guard
MAX_SIM_VERTICES = 16


@dataclass(frozen=True)
class RydbergParams:
    """Drive-protocol parameters (angular MHz / us units)."""

    t_f: float = 0.7
    omega_max: float = 9.0
    tau_omega: float | None = None  # None -> 0.1 * t_f
    delta_i: float = -30.0
    delta_f: float = 60.0
    delta_interior: ParameterVector | None = None
    low_pass: bool = False
    c6: float = DEFAULT_C6

    def __post_init__(self):
        if self.t_f <= 0:
            raise ValueError("t_f must be positive")
        if self.tau_omega is None:
            object.__setattr__(self, "tau_omega", 0.1 * self.t_f)
        if not 0.0 < self.tau_omega < 0.5 * self.t_f:
            raise ValueError("need 0 < tau_omega < t_f / 2")
        if not self.delta_i < 0.0 < self.delta_f:
            raise ValueError("detuning must sweep from negative to positive")
        if self.omega_max < 0:
            raise ValueError("omega_max must be non-negative")
        if self.c6 <= 0:
            raise ValueError("C6 must be positive")


def omega_schedule(params: RydbergParams):
    """Trapezoidal Rabi drive: ramp up, hold at omega_max, ramp down."""
    tf, tau, peak = params.t_f, params.tau_omega, params.omega_max

    def omega(t):
        if t <= 0.0 or t >= tf:
            return 0.0
        if t < tau:
            return peak * t / tau
        if t > tf - tau:
            return peak * (tf - t) / tau
        return peak

    return omega


def delta_schedule(params: RydbergParams):
    """Detuning sweep delta_i -> delta_f, linear or through interior points."""
    tf, lo, hi = params.t_f, params.delta_i, params.delta_f
    if params.delta_interior is None:
        return lambda t: lo + (hi - lo) * (t / tf)
    family = Family.LOW_PASS if params.low_pass else Family.REAL
    spec = ScheduleSpec(
        family=family, n_params=len(params.delta_interior.values), t_final=tf
    )
    theta = params.delta_interior

    def delta(t):
        return lo + (hi - lo) * float(evaluate(spec, theta, t))

    return delta


def _interaction_terms(graph: UnitDiskGraph, c6: float):
    """Diagonal excitation-count and pair-interaction vectors, and the
    sparse sigma-x sum, over the 2^n computational basis."""
    n = graph.n_vertices
    dim = 1 << n
    states = np.arange(dim, dtype=np.uint32)
    bits = (states[:, None] >> (n - 1 - np.arange(n))) & 1  # column v = vertex v
    n_exc = bits.sum(axis=1).astype(float)
    vpair = np.zeros(dim)
    for i in range(n):
        for j in range(i + 1, n):
            vij = c6 / graph.distance(i, j) ** 6
            vpair += vij * (bits[:, i] * bits[:, j])
    rows = np.repeat(states, n)
    cols = (states[:, None] ^ (1 << (n - 1 - np.arange(n)))).ravel()
    xmat = csr_matrix(
        (np.ones(rows.size), (rows, cols.astype(np.int64))), shape=(dim, dim)
    )
    return n_exc, vpair, xmat


def rydberg_hamiltonian(graph: UnitDiskGraph, omega: float, delta: float,
                        c6: float = DEFAULT_C6):
    """Sparse Hamiltonian at fixed drive values (2^n x 2^n, n <= 16)."""
    n = graph.n_vertices
    if n > MAX_SIM_VERTICES:
        raise ValueError(f"state-vector simulation limited to {MAX_SIM_VERTICES} atoms")
    n_exc, vpair, xmat = _interaction_terms(graph, c6)
    dim = n_exc.size
    diag = csr_matrix(
        (-delta * n_exc + vpair, (np.arange(dim), np.arange(dim))), shape=(dim, dim)
    )
    return (0.5 * omega) * xmat + diag


def evolve_rydberg(graph: UnitDiskGraph, params: RydbergParams,
                   rtol: float = 1e-10, atol: float = 1e-12) -> np.ndarray:
    """Propagate |00...0> through the drive protocol; returns amplitudes."""
    n = graph.n_vertices
    if n > MAX_SIM_VERTICES:
        raise ValueError(f"state-vector simulation limited to {MAX_SIM_VERTICES} atoms")
    if n == 0:
        raise ValueError("empty graph")
    n_exc, vpair, xmat = _interaction_terms(graph, params.c6)
    omega = omega_schedule(params)
    delta = delta_schedule(params)
    psi0 = np.zeros(1 << n, dtype=complex)
    psi0[0] = 1.0

    def rhs(t, psi):
        h_psi = (0.5 * omega(t)) * (xmat @ psi)
        h_psi += (vpair - delta(t) * n_exc) * psi
        return -1j * h_psi

    sol = solve_ivp(
        rhs, (0.0, params.t_f), psi0, method="DOP853", rtol=rtol, atol=atol
    )
    if not sol.success:  # pragma: no cover - integrator failure is exceptional
        raise RuntimeError(f"propagation failed: {sol.message}")
    return sol.y[:, -1]


def sample(state: np.ndarray, n_shots: int, seed: int | None = None) -> SampleSet:
    """Computational-basis measurement: multinomial draw over |amps|^2."""
    if n_shots <= 0:
        raise ValueError("n_shots must be positive")
    amps = np.asarray(state)
    dim = amps.shape[0]
    n = dim.bit_length() - 1
    if 1 << n != dim:
        raise ValueError("state length must be a power of two")
    probs = np.abs(amps) ** 2
    total = probs.sum()
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"state norm deviates from 1 by {abs(total - 1.0):.2e}")
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(n_shots, probs / total)
    hit = np.nonzero(counts)[0]
    return SampleSet.from_counts(
        {format(int(idx), f"0{n}b"): int(counts[idx]) for idx in hit}
    )
