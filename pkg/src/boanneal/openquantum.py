"""Adiabatic master equation for p-spin protocols with collective dephasing.

The system couples to an Ohmic bosonic bath through the collective
operator S_z.  In the instantaneous eigenbasis {|E_a>} of H(t) the
Lindblad operators are L_ab = |E_a><E_a| S_z |E_b><E_b| and the density
matrix evolves under

    d rho / dt = -i [H + H_LS, rho] + D[rho]

where every a != b pair with a distinct Bohr frequency omega_ba = E_b -
E_a contributes an independent channel at rate gamma(omega_ba), and the
zero-frequency operators (a = b, plus any pair whose Bohr frequency
vanishes within DEGENERACY_TOL) are summed into one collective
dephasing channel at rate gamma(0).  H_LS is the Lamb shift built from
the Hilbert transform S(omega) of the bath correlation spectrum.

Only the lowest ``n_levels`` eigenstates enter the dissipative
structure; the coherent commutator is always exact.  Internally the
right-hand side is evaluated elementwise in the full eigenbasis, where
the commutator is a phase matrix and the distinct-frequency dissipator
reduces to row/column sums, so one step costs an eigendecomposition
plus a handful of dense matrix products.

Units: hbar = k_B = 1 and energies are measured in Grad/s, so a
temperature of T milli-kelvin corresponds to beta = 1/(0.13092 T).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh

from .pspin import Mode, PSpinSystem, _as_control_tuple, _coefficients, _terms, initial_state

__all__ = [
    "OhmicBath",
    "DensityMatrix",
    "LindbladSet",
    "PositivityError",
    "beta_from_temperature_mk",
    "relaxation_rate",
    "lamb_shift",
    "lamb_shift_direct",
    "build_lindblad_set",
    "evolve_ame",
    "fidelity_mixed",
    "DEFAULT_N_LEVELS",
    "DEFAULT_OMEGA_C",
    "DEFAULT_BETA",
    "DEGENERACY_TOL",
]

#: instantaneous eigenstates kept in the dissipative structure
DEFAULT_N_LEVELS = 30

#: Ohmic cutoff frequency (Grad/s)
DEFAULT_OMEGA_C = 8.0 * math.pi

#: Bohr frequencies smaller than this join the collective gamma(0) channel
DEGENERACY_TOL = 1e-9

#: integration cutoff for the Hilbert transform, in units of omega_c
LAMB_SHIFT_CUTOFF = 20.0

#: tabulated |omega| range, in units of omega_c; kept inside the cutoff
#: because the hard-cutoff transform diverges logarithmically at the edge
LAMB_SHIFT_TABLE_RANGE = 19.0

#: grid points for the cached Lamb-shift table
LAMB_SHIFT_GRID = 3001

# k_B / hbar = 1.380649e-23 / 1.054571817e-34 in rad/s/K, expressed in
# Grad/s per milli-kelvin
_KB_OVER_HBAR_GRAD_PER_MK = 1.380649e-23 / 1.054571817e-34 * 1e-9 * 1e-3


def beta_from_temperature_mk(temperature_mk: float) -> float:
    """Inverse temperature (in 1/(Grad/s)) for a temperature in mK."""
    if temperature_mk <= 0:
        raise ValueError("temperature must be positive")
    return 1.0 / (_KB_OVER_HBAR_GRAD_PER_MK * temperature_mk)


#: default inverse temperature: 12 mK in the Grad/s convention
DEFAULT_BETA = beta_from_temperature_mk(12.0)


class PositivityError(RuntimeError):
    """Final density matrix had an eigenvalue below the tolerance."""


@dataclass(frozen=True)
class OhmicBath:
    """Ohmic bath with exponential cutoff: J(omega) = eta omega e^(-|omega|/omega_c)."""

    eta: float
    beta: float = DEFAULT_BETA
    omega_c: float = DEFAULT_OMEGA_C

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("eta must be non-negative")
        if self.beta <= 0 or self.omega_c <= 0:
            raise ValueError("beta and omega_c must be positive")


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed state over the collective basis, with diagnostic defect measures."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        object.__setattr__(self, "matrix", m)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace_defect(self) -> float:
        return abs(np.trace(self.matrix) - 1.0)

    @property
    def hermiticity_defect(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())

    @property
    def populations(self) -> np.ndarray:
        return self.matrix.diagonal().real.copy()

    def min_eigenvalue(self) -> float:
        herm = (self.matrix + self.matrix.conj().T) / 2.0
        return float(np.linalg.eigvalsh(herm)[0])


def relaxation_rate(bath: OhmicBath, omega):
    """Bath rate gamma(omega) = 2 pi eta omega e^(-|omega|/omega_c) / (1 - e^(-beta omega)).

    The omega -> 0 limit 2 pi eta / beta is taken analytically, and the
    detailed-balance (KMS) relation gamma(-omega) = e^(-beta omega)
    gamma(omega) holds to machine precision.
    """
    w = np.asarray(omega, dtype=float)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    x = bath.beta * w
    envelope = 2.0 * math.pi * bath.eta * np.exp(-np.abs(w) / bath.omega_c)
    out = np.empty_like(w)
    small = np.abs(x) < 1e-8
    with np.errstate(over="ignore", invalid="ignore"):
        denom = -np.expm1(-x[~small])
        out[~small] = envelope[~small] * w[~small] / denom
    xs = x[small]
    # series of x / (1 - e^(-x)) around 0
    out[small] = envelope[small] / bath.beta * (1.0 + xs / 2.0 + xs**2 / 12.0)
    out = np.where(np.isfinite(out), out, 0.0)
    return float(out[0]) if scalar else out


# ------------------------------------------------------------- Lamb shift


def _rate_scalar(eta: float, beta: float, omega_c: float, w: float) -> float:
    """Scalar gamma(w) without array overhead, for quadrature inner loops."""
    x = beta * w
    envelope = 2.0 * math.pi * eta * math.exp(-abs(w) / omega_c)
    if abs(x) < 1e-8:
        return envelope / beta * (1.0 + x / 2.0 + x * x / 12.0)
    try:
        return envelope * w / -math.expm1(-x)
    except OverflowError:
        return 0.0


def lamb_shift_direct(bath: OhmicBath, omega: float) -> float:
    """Principal-value Hilbert transform of gamma, evaluated by quadrature.

    S(omega) = (1/2pi) PV int gamma(w) / (omega - w) dw with the
    integration window cut off at +-20 omega_c.  The pole is removed by
    subtracting gamma(omega), which leaves a smooth integrand plus an
    analytic logarithm.
    """
    cut = LAMB_SHIFT_CUTOFF * bath.omega_c
    eta, beta, omega_c = bath.eta, bath.beta, bath.omega_c
    g_at = _rate_scalar(eta, beta, omega_c, omega)

    if abs(omega) >= cut:
        val, _ = quad(
            lambda w: _rate_scalar(eta, beta, omega_c, w) / (omega - w),
            -cut, cut, limit=200,
        )
        return val / (2.0 * math.pi)

    def smooth(w):
        d = omega - w
        if abs(d) < 1e-9:
            h = 1e-6 * (1.0 + abs(omega))
            return -(_rate_scalar(eta, beta, omega_c, omega + h)
                     - _rate_scalar(eta, beta, omega_c, omega - h)) / (2.0 * h)
        return (_rate_scalar(eta, beta, omega_c, w) - g_at) / d

    val, _ = quad(smooth, -cut, cut, points=[omega], limit=400)
    val += g_at * math.log((cut + omega) / (cut - omega))
    return val / (2.0 * math.pi)


_LS_TABLES: dict = {}


def _lamb_table(beta: float, omega_c: float, n_points: int = LAMB_SHIFT_GRID):
    """Cubic-spline table of S(omega) at unit eta (S scales linearly in eta)."""
    key = (beta, omega_c, n_points)
    table = _LS_TABLES.get(key)
    if table is None:
        span = LAMB_SHIFT_TABLE_RANGE * omega_c
        # gamma's cutoff factor has a slope kink at omega = 0, so S picks
        # up a mild omega*log|omega| feature there; a sinh-spaced grid
        # concentrates nodes near zero while staying smooth everywhere
        scale = omega_c / 25.0
        u_max = math.asinh(span / scale)
        grid = scale * np.sinh(np.linspace(-u_max, u_max, n_points))
        grid[0], grid[-1] = -span, span
        unit = OhmicBath(1.0, beta, omega_c)
        vals = np.array([lamb_shift_direct(unit, w) for w in grid])
        table = CubicSpline(grid, vals)
        _LS_TABLES[key] = table
    return table


def lamb_shift(bath: OhmicBath, omega, n_points: int = LAMB_SHIFT_GRID):
    """Table-interpolated Lamb-shift integral S(omega) (vectorized)."""
    if bath.eta == 0.0:
        return 0.0 if np.ndim(omega) == 0 else np.zeros(np.shape(omega))
    span = LAMB_SHIFT_TABLE_RANGE * bath.omega_c
    w = np.asarray(omega, dtype=float)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    if np.any(np.abs(w) > span):
        raise ValueError(
            f"|omega| beyond the tabulated range {LAMB_SHIFT_TABLE_RANGE} omega_c"
        )
    out = bath.eta * _lamb_table(bath.beta, bath.omega_c, n_points)(w)
    return float(out[0]) if scalar else out


# ------------------------------------------------------- Lindblad structure


@dataclass
class LindbladSet:
    """Truncated eigenbasis data defining the Lindblad operators.

    ``couplings[a, b]`` is <E_a| A |E_b>, so the operator L_ab equals
    couplings[a, b] |E_a><E_b| with the kets stored as columns of
    ``basis``; its Bohr frequency is energies[b] - energies[a].
    """

    energies: np.ndarray
    basis: np.ndarray
    couplings: np.ndarray

    @property
    def n_levels(self) -> int:
        return self.energies.size

    def frequency(self, a: int, b: int) -> float:
        return float(self.energies[b] - self.energies[a])

    def operator(self, a: int, b: int) -> np.ndarray:
        return self.couplings[a, b] * np.outer(self.basis[:, a], self.basis[:, b])


def _fix_eigenvector_signs(vecs: np.ndarray) -> np.ndarray:
    """Deterministic sign convention: largest-magnitude component positive."""
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def build_lindblad_set(h: np.ndarray, a_diag: np.ndarray, n_levels: int) -> LindbladSet:
    """Eigendecompose ``h`` and project the diagonal operator ``a_diag``.

    Keeps the ``n_levels`` lowest eigenstates (all of them if the
    dimension is smaller).  Summed over a complete basis the operators
    reconstruct A exactly; truncation discards only matrix elements
    involving high-lying states.
    """
    vals, vecs = eigh(h, check_finite=False)
    vecs = _fix_eigenvector_signs(vecs)
    k = min(n_levels, vals.size)
    basis = vecs[:, :k]
    couplings = basis.T @ (np.asarray(a_diag, dtype=float)[:, None] * basis)
    return LindbladSet(energies=vals[:k], basis=basis, couplings=couplings)


# ---------------------------------------------------------------- dynamics


def evolve_ame(
    system: PSpinSystem,
    controls,
    t_f: float,
    bath: OhmicBath,
    n_levels: int = DEFAULT_N_LEVELS,
    include_lamb_shift: bool = True,
    rtol: float = 1e-7,
    atol: float = 1e-10,
    initial: np.ndarray | None = None,
) -> DensityMatrix:
    """Propagate the density matrix from t = 0 to t = t_f.

    ``controls`` follows :func:`boanneal.pspin.evolve`: one callable for
    ``qa_dependent``, a pair for ``qa_independent`` / ``ra``.  The
    Lindblad structure is rebuilt from the instantaneous Hamiltonian at
    every right-hand-side evaluation.  Trace is preserved to ~1e-8 at
    the default tolerance, and the final state is checked for
    positivity (eigenvalues above -1e-6).
    """
    if system.mode is Mode.BANG_BANG:
        raise ValueError("the master equation propagates continuous protocols only")
    if t_f <= 0:
        raise ValueError("t_f must be positive")
    controls = _as_control_tuple(system, controls)
    terms = _terms(system)
    d = system.dimension
    sx = terms.sx.toarray()
    target = terms.target_diag
    init_diag = terms.init_diag
    a_diag = terms.magnetizations.astype(float)  # collective S_z
    gamma_sys = system.gamma
    k = min(n_levels, d)
    diag_k = np.diag_indices(k)

    dissipative = bath.eta > 0.0
    gamma0 = relaxation_rate(bath, 0.0)
    if dissipative and include_lamb_shift:
        ls_table = _lamb_table(bath.beta, bath.omega_c)
        s0 = bath.eta * float(ls_table(0.0))
    else:
        ls_table = None
        s0 = 0.0

    if initial is None:
        psi0 = initial_state(system).amplitudes
        rho0 = np.outer(psi0, psi0.conj())
    else:
        rho0 = np.asarray(initial, dtype=complex)
        if rho0.shape != (d, d):
            raise ValueError(f"initial density matrix must be {d} x {d}")

    def rhs(t, y):
        rho = y.reshape(d, d)
        ca, cb, cc = _coefficients(system, controls, t)
        h = (-gamma_sys * ca) * sx
        h[np.diag_indices_from(h)] += cb * target + cc * init_diag
        vals, vecs = eigh(h, check_finite=False, overwrite_a=True)
        rho_e = vecs.T @ rho @ vecs

        phase = vals.copy()
        damp = np.zeros(d)
        if dissipative:
            basis = vecs[:, :k]
            atil = basis.T @ (a_diag[:, None] * basis)
            asq = atil**2
            bohr = vals[None, :k] - vals[:k, None]  # omega_ba at [a, b]
            zero_group = np.abs(bohr) < DEGENERACY_TOL  # always includes a = b
            rates = relaxation_rate(bath, bohr.ravel()).reshape(k, k) * asq
            rates[zero_group] = 0.0
            damp[:k] = rates.sum(axis=0)
            if ls_table is not None:
                shifts = bath.eta * ls_table(bohr.ravel()).reshape(k, k) * asq
                shifts[zero_group] = 0.0
                phase[:k] += shifts.sum(axis=0)

        dtil = (-1j * (phase[:, None] - phase[None, :])
                - 0.5 * (damp[:, None] + damp[None, :])) * rho_e

        if dissipative:
            # distinct-frequency gains feed populations only
            dtil[diag_k] += rates @ rho_e.diagonal()[:k].real
            # zero-frequency operators act as one collective channel, so
            # near-degenerate pairs keep their cross terms
            m0 = np.where(zero_group, atil, 0.0)
            m0sq = m0 @ m0
            dtil[:k, :k] += gamma0 * (m0 @ rho_e[:k, :k] @ m0)
            half_loss = 0.5 * gamma0 * m0sq
            dtil[:k, :] -= half_loss @ rho_e[:k, :]
            dtil[:, :k] -= rho_e[:, :k] @ half_loss
            if ls_table is not None:
                hls0 = s0 * m0sq
                dtil[:k, :] -= 1j * (hls0 @ rho_e[:k, :])
                dtil[:, :k] += 1j * (rho_e[:, :k] @ hls0)
        return (vecs @ dtil @ vecs.T).ravel()

    sol = solve_ivp(
        rhs, (0.0, t_f), rho0.ravel(), method="DOP853", rtol=rtol, atol=atol
    )
    if not sol.success:  # pragma: no cover - integrator failure is exceptional
        raise RuntimeError(f"master-equation propagation failed: {sol.message}")
    rho = DensityMatrix(sol.y[:, -1].reshape(d, d))

    if rho.trace_defect > 1e-6:
        raise RuntimeError(f"trace drifted by {rho.trace_defect:.2e}")
    low = rho.min_eigenvalue()
    if low < -1e-6:
        raise PositivityError(f"negative population {low:.2e} in the final state")
    return rho


def fidelity_mixed(rho, system: PSpinSystem) -> float:
    """Population of the target (all-up) state, clamped to [0, 1]."""
    matrix = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    mags = _terms(system).magnetizations
    (idx,) = np.nonzero(mags == system.n_spins)
    if idx.size != 1:
        raise ValueError("target state is not unique in this basis")
    return float(min(1.0, max(0.0, matrix[idx[0], idx[0]].real)))
