"""Closed-system simulators for the ferromagnetic p-spin model.

The Hamiltonian terms are built from collective Pauli operators
S_{x,z} = sum_i sigma_{x,z}^i (Pauli normalization: S_z eigenvalues run
over {-N, -N+2, ..., N}).  The target is the diagonal

    H_t = -N (S_z / N)^p ,

whose ground state for odd p is the all-up basis state, and the driver
is the transverse field H_TF = -Gamma S_x.

Three annealing protocols share this machinery:

* ``qa_dependent``   -- H(t) = s(t) H_TF + (1 - s(t)) H_t with a single
  control running 1 -> 0 (the schedule's 0 -> 1 ramp is flipped by the
  ``one_minus`` transform).
* ``qa_independent`` -- H(t) = u1(t) H_TF + u2(t) H_t with separately
  parametrized controls, u1: 0 -> 1 and u2: 1 -> 0.
* ``ra``             -- reverse annealing over two collective sectors of
  N_c = round(c N) and N - N_c spins, H(t) = (1-s)(1-lambda) H_init +
  s H_t + (1-s) lambda H_TF with H_init = -S_z^(1) + S_z^(2); both
  controls run 0 -> 1 and lambda == 1 recovers forward annealing.

``bang_bang`` is the two-pulse protocol exp(-i theta2 H_TF)
exp(-i theta1 H_t) applied to the transverse-field ground state; each
pulse corresponds to a rectangular schedule on one half of [0, t_f].

Everything acts in the fully-symmetric subspace(s), so dimensions are
N + 1 (forward protocols) or (N_c + 1)(N - N_c + 1) (reverse annealing)
instead of 2^N.
"""

from __future__ import annotations

import enum
import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.linalg import eigh, eigvalsh

__all__ = [
    "Mode",
    "PSpinSystem",
    "StateVector",
    "sector_sz",
    "sector_sx",
    "target_hamiltonian",
    "transverse_hamiltonian",
    "ra_initial_hamiltonian",
    "qa_hamiltonian",
    "qa_hamiltonian_independent",
    "ra_hamiltonian",
    "initial_state",
    "evolve",
    "evolve_trace",
    "spectral_gap",
    "fidelity",
    "sample_energies",
    "quantile_fom",
]

DEFAULT_P = 3
DEFAULT_GAMMA = 5.0
DEFAULT_C = 0.8


class Mode(str, enum.Enum):
    QA_DEPENDENT = "qa_dependent"
    QA_INDEPENDENT = "qa_independent"
    RA = "ra"
    BANG_BANG = "bang_bang"


#: number of control functions expected by ``evolve`` per mode
_N_CONTROLS = {
    Mode.QA_DEPENDENT: 1,
    Mode.QA_INDEPENDENT: 2,
    Mode.RA: 2,
    Mode.BANG_BANG: 2,
}


@dataclass(frozen=True)
class PSpinSystem:
    """A p-spin instance restricted to its collective subspace(s)."""

    n_spins: int
    p: int = DEFAULT_P
    gamma: float = DEFAULT_GAMMA
    c: float = DEFAULT_C
    mode: Mode = Mode.QA_DEPENDENT

    def __post_init__(self):
        if self.n_spins < 1:
            raise ValueError("n_spins must be at least 1")
        if self.p < 2:
            raise ValueError("p must be at least 2")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if not 0.0 <= self.c <= 1.0:
            raise ValueError("c must lie in [0, 1]")
        if self.p % 2 == 0:
            warnings.warn(
                "even p gives a doubly degenerate ground state; "
                "fidelity is still measured against the all-up state"
            )

    @property
    def n_cold(self) -> int:
        """RA sector split N_c = round(c * N), ties to even."""
        # numpy rint implements round-half-to-even
        return int(np.rint(self.c * self.n_spins))

    @property
    def dimension(self) -> int:
        if self.mode is Mode.RA:
            nc = self.n_cold
            return (nc + 1) * (self.n_spins - nc + 1)
        return self.n_spins + 1


@dataclass
class StateVector:
    """Amplitudes over the collective basis, tagged by total magnetization."""

    amplitudes: np.ndarray
    magnetizations: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        self.magnetizations = np.asarray(self.magnetizations, dtype=int)
        if self.amplitudes.shape != self.magnetizations.shape:
            raise ValueError("amplitudes and magnetizations differ in length")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def sector_sz(n: int) -> np.ndarray:
    """Diagonal of S_z for n spins in the maximal-spin sector."""
    return np.array([n - 2 * i for i in range(n + 1)], dtype=float)


def sector_sx(n: int) -> np.ndarray:
    """Dense S_x for n spins in the maximal-spin sector.

    Twice the spin-j ladder structure (Pauli, not angular-momentum,
    normalization): the element between neighboring magnetization levels
    m and m + 2 (Pauli units) is sqrt(j(j+1) - m'(m'+1)) with m' = m/2,
    j = n/2.  For n = 1 this is exactly the Pauli X matrix.
    """
    j = n / 2.0
    m = j - np.arange(n + 1)  # angular-momentum projection per index
    off = np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1))
    out = np.zeros((n + 1, n + 1))
    idx = np.arange(n)
    out[idx, idx + 1] = off
    out[idx + 1, idx] = off
    return out


@dataclass(frozen=True)
class _Terms:
    """Cached Hamiltonian ingredients for one system."""

    magnetizations: np.ndarray
    target_diag: np.ndarray
    init_diag: np.ndarray  # RA only; zeros otherwise
    sx: sp.csr_matrix

    def __hash__(self):  # pragma: no cover - identity hash is fine for a cache value
        return id(self)


@functools.lru_cache(maxsize=64)
def _terms(system: PSpinSystem) -> _Terms:
    n = system.n_spins
    if system.mode is Mode.RA:
        n1 = system.n_cold
        n2 = n - n1
        sz1, sz2 = sector_sz(n1), sector_sz(n2)
        mags = (sz1[:, None] + sz2[None, :]).ravel()
        init = (-sz1[:, None] + sz2[None, :]).ravel()
        eye1, eye2 = sp.identity(n1 + 1), sp.identity(n2 + 1)
        sx = (
            sp.kron(sp.csr_matrix(sector_sx(n1)), eye2)
            + sp.kron(eye1, sp.csr_matrix(sector_sx(n2)))
        ).tocsr()
    else:
        mags = sector_sz(n)
        init = np.zeros_like(mags)
        sx = sp.csr_matrix(sector_sx(n))
    target = -n * (mags / n) ** system.p
    return _Terms(
        magnetizations=mags.astype(int),
        target_diag=target,
        init_diag=init,
        sx=sx,
    )


@functools.lru_cache(maxsize=64)
def _sx_eigh(system: PSpinSystem):
    terms = _terms(system)
    return eigh(terms.sx.toarray())


# ----------------------------------------------------------- Hamiltonians


def target_hamiltonian(system: PSpinSystem) -> np.ndarray:
    """Diagonal matrix -N (S_z/N)^p in the collective basis."""
    return np.diag(_terms(system).target_diag)


def transverse_hamiltonian(system: PSpinSystem) -> np.ndarray:
    """Driver -Gamma S_x."""
    return -system.gamma * _terms(system).sx.toarray()


def ra_initial_hamiltonian(system: PSpinSystem) -> np.ndarray:
    """H_init = -S_z^(1) + S_z^(2), defined for reverse annealing only."""
    if system.mode is not Mode.RA:
        raise ValueError("H_init exists only in reverse-annealing mode")
    return np.diag(_terms(system).init_diag)


def qa_hamiltonian(system: PSpinSystem, s: float) -> np.ndarray:
    """H = s H_TF + (1 - s) H_t; s runs 1 -> 0 over the protocol."""
    terms = _terms(system)
    return -system.gamma * s * terms.sx.toarray() + np.diag(
        (1.0 - s) * terms.target_diag
    )


def qa_hamiltonian_independent(system: PSpinSystem, u1: float, u2: float) -> np.ndarray:
    """H = u1 H_TF + u2 H_t with independently controlled coefficients."""
    terms = _terms(system)
    return -system.gamma * u1 * terms.sx.toarray() + np.diag(u2 * terms.target_diag)


def ra_hamiltonian(system: PSpinSystem, s: float, lam: float) -> np.ndarray:
    """H = (1-s)(1-lambda) H_init + s H_t + (1-s) lambda H_TF."""
    if system.mode is not Mode.RA:
        raise ValueError("reverse-annealing Hamiltonian needs an RA system")
    terms = _terms(system)
    diag = (1.0 - s) * (1.0 - lam) * terms.init_diag + s * terms.target_diag
    return np.diag(diag) - system.gamma * (1.0 - s) * lam * terms.sx.toarray()


# ----------------------------------------------------------------- states


def initial_state(system: PSpinSystem) -> StateVector:
    """Protocol starting state.

    Forward protocols start from the transverse-field ground state
    |+>^N, whose collective amplitudes are sqrt(C(N, k)) / 2^(N/2);
    reverse annealing starts from the H_init ground state, the basis
    product state with the first sector all up and the second all down.
    """
    terms = _terms(system)
    if system.mode is Mode.RA:
        n1 = system.n_cold
        n2 = system.n_spins - n1
        amps = np.zeros(system.dimension, dtype=complex)
        # index (i1 = 0, i2 = n2): m1 = +n1, m2 = -n2
        amps[0 * (n2 + 1) + n2] = 1.0
    else:
        n = system.n_spins
        amps = np.array(
            [math.sqrt(math.comb(n, i)) for i in range(n + 1)], dtype=complex
        )
        amps /= 2 ** (n / 2.0)
    return StateVector(amps, terms.magnetizations)


def fidelity(state: StateVector, system: PSpinSystem) -> float:
    """Overlap probability with the target ground state (all spins up)."""
    (idx,) = np.nonzero(state.magnetizations == system.n_spins)
    if idx.size != 1:
        raise ValueError("target state is not unique in this basis")
    return float(np.abs(state.amplitudes[idx[0]]) ** 2)


# ---------------------------------------------------------------- dynamics


def _coefficients(system: PSpinSystem, controls, t: float):
    """(driver, target, init) coefficients at time t for ODE modes."""
    if system.mode is Mode.QA_DEPENDENT:
        s = controls[0](t)
        return s, 1.0 - s, 0.0
    if system.mode is Mode.QA_INDEPENDENT:
        return controls[0](t), controls[1](t), 0.0
    # RA
    s, lam = controls[0](t), controls[1](t)
    return (1.0 - s) * lam, s, (1.0 - s) * (1.0 - lam)


def _as_control_tuple(system: PSpinSystem, controls):
    if callable(controls):
        controls = (controls,)
    controls = tuple(controls)
    expected = _N_CONTROLS[system.mode]
    if len(controls) != expected:
        raise ValueError(
            f"{system.mode.value} takes {expected} control(s), got {len(controls)}"
        )
    return controls


def evolve(
    system: PSpinSystem,
    controls,
    t_f: float,
    rtol: float = 1e-11,
    atol: float = 1e-13,
    initial: StateVector | None = None,
) -> StateVector:
    """Propagate the protocol state from t = 0 to t = t_f.

    ``controls`` is one callable s(t) for ``qa_dependent``, a pair
    (u1, u2) or (s, lambda) of callables for the other ODE modes, and a
    pair of pulse areas (theta1, theta2) for ``bang_bang``, which is
    applied exactly as exp(-i theta2 H_TF) exp(-i theta1 H_t).

    Schroedinger integration uses an adaptive 8th-order Runge-Kutta
    scheme; the default tolerances keep the final norm within 1e-9 of
    unity even for the longest protocols used here (t_f ~ 20, hbar = 1
    throughout).  Optimization loops may loosen them: a figure of merit
    only needs far coarser accuracy than the norm budget implies.
    """
    if t_f <= 0:
        raise ValueError("t_f must be positive")
    terms = _terms(system)
    psi0 = (initial.amplitudes if initial is not None else
            initial_state(system).amplitudes).astype(complex)
    if psi0.shape[0] != system.dimension:
        raise ValueError("initial state has the wrong dimension")

    if system.mode is Mode.BANG_BANG:
        theta1, theta2 = (float(x) for x in controls)
        after_target = np.exp(-1j * theta1 * terms.target_diag) * psi0
        vals, vecs = _sx_eigh(system)
        # exp(-i theta2 (-Gamma S_x)) = V exp(+i theta2 Gamma diag) V^T
        phases = np.exp(1j * theta2 * system.gamma * vals)
        final = vecs @ (phases * (vecs.T @ after_target))
        return StateVector(final, terms.magnetizations)

    controls = _as_control_tuple(system, controls)
    sx = terms.sx
    gamma = system.gamma
    target = terms.target_diag
    init = terms.init_diag

    def rhs(t, psi):
        a, b, d = _coefficients(system, controls, t)
        h_psi = (-gamma * a) * (sx @ psi) + (b * target + d * init) * psi
        return -1j * h_psi

    sol = solve_ivp(
        rhs, (0.0, t_f), psi0, method="DOP853", rtol=rtol, atol=atol,
        dense_output=False,
    )
    if not sol.success:  # pragma: no cover - integrator failure is exceptional
        raise RuntimeError(f"propagation failed: {sol.message}")
    return StateVector(sol.y[:, -1], terms.magnetizations)


def evolve_trace(
    system: PSpinSystem,
    controls,
    t_f: float,
    times,
    rtol: float = 1e-11,
    atol: float = 1e-13,
    initial: StateVector | None = None,
):
    """Like :func:`evolve` but returns the state at each requested time."""
    if system.mode is Mode.BANG_BANG:
        raise ValueError("bang_bang evolution is a two-pulse map, not a trajectory")
    terms = _terms(system)
    controls = _as_control_tuple(system, controls)
    psi0 = (initial.amplitudes if initial is not None else
            initial_state(system).amplitudes).astype(complex)
    gamma, sx = system.gamma, terms.sx
    target, init = terms.target_diag, terms.init_diag

    def rhs(t, psi):
        a, b, d = _coefficients(system, controls, t)
        return -1j * ((-gamma * a) * (sx @ psi) + (b * target + d * init) * psi)

    times = np.asarray(times, dtype=float)
    sol = solve_ivp(
        rhs, (0.0, t_f), psi0, method="DOP853", rtol=rtol, atol=atol,
        t_eval=times,
    )
    if not sol.success:  # pragma: no cover
        raise RuntimeError(f"propagation failed: {sol.message}")
    states = [StateVector(sol.y[:, k], terms.magnetizations)
              for k in range(sol.y.shape[1])]
    return sol.t, states


def hamiltonian_at(system: PSpinSystem, s: float, lam: float | None = None) -> np.ndarray:
    """Instantaneous Hamiltonian at the given control value(s)."""
    if system.mode is Mode.RA:
        if lam is None:
            raise ValueError("reverse annealing needs both s and lambda")
        return ra_hamiltonian(system, s, lam)
    if system.mode is Mode.QA_INDEPENDENT:
        if lam is None:
            raise ValueError("independent controls need both u1 and u2")
        return qa_hamiltonian_independent(system, s, lam)
    return qa_hamiltonian(system, s)


def spectral_gap(system: PSpinSystem, s: float, lam: float | None = None) -> float:
    """Gap E_1 - E_0 of the instantaneous Hamiltonian."""
    h = hamiltonian_at(system, s, lam)
    if h.shape[0] == 1:
        raise ValueError("one-dimensional Hamiltonian has no gap")
    vals = eigvalsh(h, subset_by_index=(0, 1))
    return float(vals[1] - vals[0])


# ----------------------------------------------------------------- scoring


def sample_energies(
    state: StateVector, system: PSpinSystem, n_shots: int, seed: int
) -> np.ndarray:
    """Draw n_shots magnetization measurements and map them to energies.

    The returned energies are diagonal entries of H_t, so their mean
    estimates <H_t> in the final state.
    """
    if n_shots < 1:
        raise ValueError("n_shots must be positive")
    probs = state.probabilities()
    total = probs.sum()
    if not math.isclose(total, 1.0, rel_tol=0, abs_tol=1e-6):
        raise ValueError(f"state norm deviates from 1 by {abs(total - 1)}")
    probs = probs / total
    counts = np.random.default_rng(seed).multinomial(n_shots, probs)
    energies = _terms(system).target_diag
    return np.repeat(energies, counts)


def quantile_fom(energies, x: float) -> float:
    """Negated mean of the lowest ceil(x * len) energies (to be maximized)."""
    e = np.asarray(energies, dtype=float)
    if e.size == 0:
        raise ValueError("no energies supplied")
    if not 0.0 < x <= 1.0:
        raise ValueError("quantile fraction must lie in (0, 1]")
    k = math.ceil(x * e.size)
    lowest = np.sort(e)[:k]
    return float(-lowest.mean())
