"""Annealing-schedule parametrizations.

A schedule is a control function u(t) on [0, t_final] built from a small
parameter vector theta.  Six families are supported:

* ``linear``    -- u(t) = t/t_f, no parameters.
* ``real``      -- piecewise-linear interpolation through n interior knots
  (j*t_f/(n+1), theta_j) with fixed endpoints (0, 0) and (t_f, 1).
* ``cubic``     -- natural cubic spline through the same knots.
* ``low_pass``  -- the ``real`` interpolant convolved with a zero-phase
  Gaussian window and renormalized so the endpoints are exact.
* ``fourier``   -- u(t) = t/t_f + sum_j theta_j * sin(j*pi*t/t_f).
* ``bang_bang`` -- a single rectangular pulse of area theta occupying one
  half of [0, t_f] (two such schedules make the usual two-pulse protocol).

Interior knot amplitudes default to a corridor of half-width ``zeta``
around the linear schedule; Fourier coefficients are bounded by 1/j so
high harmonics stay small.  An optional ``one_minus`` transform turns a
0 -> 1 ramp into the 1 -> 0 ramp used when the same family must switch a
term off instead of on.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.ndimage import gaussian_filter1d

__all__ = [
    "Family",
    "Transform",
    "ScheduleSpec",
    "ParameterVector",
    "UnsupportedFamilyError",
    "bounds",
    "evaluate",
    "as_callable",
    "linear_equivalent_params",
    "knot_times",
]

#: number of grid points used to tabulate the low-pass-filtered schedule
LOW_PASS_GRID = 1024

#: default corridor half-width for real/cubic/low-pass interior knots
DEFAULT_ZETA = 2.0


class Family(str, enum.Enum):
    LINEAR = "linear"
    REAL = "real"
    CUBIC = "cubic"
    LOW_PASS = "low_pass"
    FOURIER = "fourier"
    BANG_BANG = "bang_bang"


class Transform(str, enum.Enum):
    IDENTITY = "identity"
    ONE_MINUS = "one_minus"


class UnsupportedFamilyError(ValueError):
    """Raised when an operation does not apply to a schedule family."""


#: families whose parameters are interior knot values on the linear corridor
_KNOT_FAMILIES = (Family.REAL, Family.CUBIC, Family.LOW_PASS)


@dataclass(frozen=True)
class ScheduleSpec:
    """Immutable description of one parametrized control function.

    Parameters
    ----------
    family : Family
        Which functional family u(t) belongs to.
    n_params : int
        Length of the parameter vector.  Zero for ``linear``, exactly one
        for ``bang_bang`` (one pulse per spec), at least one otherwise.
    t_final : float
        Duration of the protocol; u is defined on [0, t_final].
    zeta : float
        Corridor half-width for the knot families (ignored elsewhere).
    transform : Transform
        Applied after the base interpolant: ``one_minus`` maps u to 1-u.
    pulse_half : int
        For ``bang_bang`` only: 0 places the pulse on [0, t_f/2),
        1 on [t_f/2, t_f].
    """

    family: Family
    n_params: int
    t_final: float
    zeta: float = DEFAULT_ZETA
    transform: Transform = Transform.IDENTITY
    pulse_half: int = 0

    def __post_init__(self):
        if self.t_final <= 0:
            raise ValueError(f"t_final must be positive, got {self.t_final}")
        if self.zeta <= 0:
            raise ValueError(f"zeta must be positive, got {self.zeta}")
        if self.family is Family.LINEAR:
            if self.n_params != 0:
                raise ValueError("linear schedule takes no parameters")
        elif self.family is Family.BANG_BANG:
            if self.n_params != 1:
                raise ValueError("bang_bang uses one parameter per pulse")
            if self.pulse_half not in (0, 1):
                raise ValueError("pulse_half must be 0 or 1")
        elif self.n_params < 1:
            raise ValueError(f"{self.family.value} needs at least one parameter")


@dataclass(frozen=True)
class ParameterVector:
    """A parameter vector together with its box bounds.

    Every value must lie inside its bound interval; construction fails
    otherwise so that out-of-corridor points can never sneak into a
    schedule or an optimizer trace unnoticed.
    """

    values: tuple
    bounds: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        bnds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "bounds", bnds)
        if len(values) != len(bnds):
            raise ValueError(
                f"{len(values)} values but {len(bnds)} bound intervals"
            )
        for k, (v, (lo, hi)) in enumerate(zip(values, bnds)):
            if lo > hi:
                raise ValueError(f"bound {k} is empty: ({lo}, {hi})")
            if not (lo <= v <= hi):
                raise ValueError(
                    f"value {k} = {v} outside its bounds [{lo}, {hi}]"
                )

    @classmethod
    def for_spec(cls, spec: ScheduleSpec, values: Iterable[float]) -> "ParameterVector":
        return cls(tuple(values), tuple(bounds(spec)))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


def bounds(spec: ScheduleSpec) -> list[tuple[float, float]]:
    """Box bounds for each parameter of ``spec``.

    Knot families get the corridor [(j - zeta)/(n+1), (j + zeta)/(n+1)]
    around the linear value j/(n+1); Fourier coefficients are bounded by
    1/j; a bang-bang pulse area lies in [0, 2*pi].
    """
    n = spec.n_params
    if spec.family is Family.LINEAR:
        return []
    if spec.family in _KNOT_FAMILIES:
        z = spec.zeta
        return [((j - z) / (n + 1), (j + z) / (n + 1)) for j in range(1, n + 1)]
    if spec.family is Family.FOURIER:
        return [(-1.0 / j, 1.0 / j) for j in range(1, n + 1)]
    if spec.family is Family.BANG_BANG:
        return [(0.0, 2.0 * math.pi)]
    raise UnsupportedFamilyError(f"unknown family {spec.family!r}")


def knot_times(spec: ScheduleSpec) -> np.ndarray:
    """Interior knot times j*t_f/(n+1), j = 1..n (knot families only)."""
    if spec.family not in _KNOT_FAMILIES:
        raise UnsupportedFamilyError(
            f"{spec.family.value} has no interior knots"
        )
    n = spec.n_params
    return spec.t_final * np.arange(1, n + 1) / (n + 1)


def linear_equivalent_params(spec: ScheduleSpec) -> np.ndarray:
    """Parameters that make u(t) coincide with the linear ramp t/t_f.

    Knot families reduce to the linear ramp at theta_j = j/(n+1); the
    Fourier family at theta = 0.  The linear family has no parameters to
    choose and a bang-bang pulse can never equal a ramp, so both raise.
    """
    if spec.family in _KNOT_FAMILIES:
        n = spec.n_params
        return np.arange(1, n + 1) / (n + 1)
    if spec.family is Family.FOURIER:
        return np.zeros(spec.n_params)
    raise UnsupportedFamilyError(
        f"{spec.family.value} has no linear-equivalent parameters"
    )


def _theta_array(spec: ScheduleSpec, theta) -> np.ndarray:
    values = getattr(theta, "values", theta)
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1 or arr.size != spec.n_params:
        raise ValueError(
            f"expected {spec.n_params} parameters for {spec.family.value}, "
            f"got shape {arr.shape}"
        )
    return arr


def _knots(spec: ScheduleSpec, theta: np.ndarray):
    tf = spec.t_final
    times = np.concatenate(([0.0], knot_times(spec), [tf]))
    values = np.concatenate(([0.0], theta, [1.0]))
    return times, values


@functools.lru_cache(maxsize=256)
def _cubic_interpolant(spec: ScheduleSpec, theta_key: tuple):
    times, values = _knots(spec, np.asarray(theta_key))
    return CubicSpline(times, values, bc_type="natural")


@functools.lru_cache(maxsize=256)
def _low_pass_table(spec: ScheduleSpec, theta_key: tuple):
    """Tabulate the Gaussian-smoothed real-space interpolant.

    The window standard deviation is t_f/(4*(n+1)) -- a quarter of the
    knot spacing -- and the convolution is zero-phase (symmetric), so
    features are smoothed without being delayed.  Edge values are held
    constant during filtering and an affine renormalization afterwards
    restores u(0) = 0 and u(t_f) = 1 exactly.
    """
    times, values = _knots(spec, np.asarray(theta_key))
    grid = np.linspace(0.0, spec.t_final, LOW_PASS_GRID)
    raw = np.interp(grid, times, values)
    sigma_t = spec.t_final / (4.0 * (spec.n_params + 1))
    sigma_pts = sigma_t / (grid[1] - grid[0])
    smooth = gaussian_filter1d(raw, sigma_pts, mode="nearest")
    lo, hi = smooth[0], smooth[-1]
    if hi == lo:
        raise ValueError("degenerate low-pass schedule: flat after smoothing")
    return grid, (smooth - lo) / (hi - lo)


def evaluate(spec: ScheduleSpec, theta, t):
    """Evaluate u(t) for scalar or array ``t`` in [0, t_final].

    ``theta`` may be a ParameterVector or any sequence of length
    ``spec.n_params``.  Values are *not* clipped to [0, 1]: overshoot is
    a legitimate feature of interpolated and Fourier schedules.
    """
    arr = _theta_array(spec, theta)
    t_in = np.asarray(t, dtype=float)
    scalar = t_in.ndim == 0
    tq = np.atleast_1d(t_in)
    tf = spec.t_final
    eps = 1e-12 * tf
    if np.any(tq < -eps) or np.any(tq > tf + eps):
        raise ValueError(f"t outside [0, {tf}]")
    tq = np.clip(tq, 0.0, tf)

    fam = spec.family
    if fam is Family.LINEAR:
        u = tq / tf
    elif fam is Family.REAL:
        times, values = _knots(spec, arr)
        u = np.interp(tq, times, values)
    elif fam is Family.CUBIC:
        u = _cubic_interpolant(spec, tuple(arr))(tq)
    elif fam is Family.LOW_PASS:
        grid, table = _low_pass_table(spec, tuple(arr))
        u = np.interp(tq, grid, table)
    elif fam is Family.FOURIER:
        j = np.arange(1, spec.n_params + 1)
        u = tq / tf + np.sin(np.pi * np.outer(tq, j) / tf) @ arr
    elif fam is Family.BANG_BANG:
        # Rectangular pulse of area theta: amplitude 2*theta/t_f over one
        # half-interval, zero elsewhere.
        amplitude = 2.0 * arr[0] / tf
        if spec.pulse_half == 0:
            mask = tq < tf / 2.0
        else:
            mask = tq >= tf / 2.0
        u = np.where(mask, amplitude, 0.0)
    else:  # pragma: no cover - enum is closed
        raise UnsupportedFamilyError(f"unknown family {fam!r}")

    if spec.transform is Transform.ONE_MINUS:
        u = 1.0 - u
    return float(u[0]) if scalar else u


def as_callable(spec: ScheduleSpec, theta):
    """Bind (spec, theta) into a plain function of time."""
    arr = tuple(_theta_array(spec, theta))

    def u(t):
        return evaluate(spec, arr, t)

    return u
