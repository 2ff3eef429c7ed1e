"""Schedule optimizers: Bayesian optimization, SPSA and random search.

All three maximize a figure of merit over a box domain and share one
currency, the :class:`OptimizationTrace`: an ordered record of every
objective call with its phase, so budget accounting and convergence
plots fall out of the data structure instead of ad-hoc counters.

The Bayesian optimizer follows a three-phase protocol:

1. probe the parameters equivalent to the plain linear ramp (when the
   parametrization can express one) so the baseline is always in the
   training set,
2. a handful of uniform random evaluations,
3. acquisition-driven evaluations maximizing an upper confidence bound
   whose exploration weight kappa is held constant for the first part of
   the run and then decayed geometrically, ending in near-pure
   exploitation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .surrogate import (
    GaussianProcessModel,
    Observation,
    fit_hyperparameters,
    suggest_next,
)

__all__ = [
    "Phase",
    "TraceEntry",
    "OptimizationTrace",
    "Objective",
    "ObjectiveEvaluationError",
    "BOConfig",
    "SPSAConfig",
    "kappa_schedule",
    "spsa_gains",
    "run_bo",
    "run_spsa",
    "run_random",
]


class Phase(str, enum.Enum):
    LINEAR_PROBE = "linear_probe"
    RANDOM_INIT = "random_init"
    ACQUISITION = "acquisition"


class ObjectiveEvaluationError(RuntimeError):
    """An objective call failed; carries the offending parameter vector."""

    def __init__(self, theta, cause):
        super().__init__(f"objective evaluation failed at theta={tuple(theta)}: {cause}")
        self.theta = tuple(float(x) for x in theta)
        self.__cause__ = cause


@dataclass(frozen=True)
class TraceEntry:
    theta: tuple
    value: float
    sigma_obs: float
    index: int
    phase: Phase

    def to_dict(self) -> dict:
        return {
            "theta": list(self.theta),
            "value": self.value,
            "sigma_obs": self.sigma_obs,
            "index": self.index,
            "phase": self.phase.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TraceEntry":
        return cls(
            theta=tuple(d["theta"]),
            value=float(d["value"]),
            sigma_obs=float(d["sigma_obs"]),
            index=int(d["index"]),
            phase=Phase(d["phase"]),
        )


@dataclass
class OptimizationTrace:
    """Every objective call of one optimization run, in evaluation order."""

    entries: list = field(default_factory=list)

    def record(self, theta, value, sigma_obs, phase: Phase) -> TraceEntry:
        entry = TraceEntry(
            theta=tuple(float(x) for x in theta),
            value=float(value),
            sigma_obs=float(sigma_obs),
            index=len(self.entries),
            phase=phase,
        )
        self.entries.append(entry)
        return entry

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def best(self) -> TraceEntry:
        if not self.entries:
            raise ValueError("empty trace has no best entry")
        return max(self.entries, key=lambda e: e.value)

    @property
    def best_value(self) -> float:
        return self.best.value

    @property
    def best_theta(self) -> tuple:
        return self.best.theta

    def running_best(self) -> np.ndarray:
        """Best value seen up to and including each evaluation."""
        return np.maximum.accumulate([e.value for e in self.entries])

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries]}

    @classmethod
    def from_dict(cls, d: dict) -> "OptimizationTrace":
        return cls(entries=[TraceEntry.from_dict(e) for e in d["entries"]])


@dataclass(frozen=True)
class Objective:
    """A maximization target over a box domain.

    ``fn(theta) -> (value, sigma_obs)`` must be deterministic for a given
    parameter vector (stochastic figures of merit hash theta together
    with an evaluation seed internally).  ``initial_probe`` is the
    parameter vector equivalent to the un-optimized baseline protocol,
    when the parametrization admits one.
    """

    fn: Callable
    bounds: tuple
    initial_probe: Optional[tuple] = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(
            self, "bounds", tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        )
        if self.initial_probe is not None:
            probe = tuple(float(x) for x in self.initial_probe)
            if len(probe) != len(self.bounds):
                raise ValueError("initial_probe length does not match bounds")
            object.__setattr__(self, "initial_probe", probe)

    def __call__(self, theta):
        try:
            value, sigma = self.fn(np.asarray(theta, dtype=float))
        except Exception as exc:  # noqa: BLE001 - re-raised with context
            raise ObjectiveEvaluationError(theta, exc) from exc
        return float(value), float(sigma)

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def lower(self) -> np.ndarray:
        return np.array([b[0] for b in self.bounds])

    def upper(self) -> np.ndarray:
        return np.array([b[1] for b in self.bounds])


@dataclass(frozen=True)
class BOConfig:
    """Bayesian-optimizer settings.

    The defaults reproduce the standard small-budget protocol: one linear
    probe, 9 random evaluations, 50 acquisition iterations with kappa
    fixed at 2 for the first 25 and decayed geometrically to 0.01 by the
    last.
    """

    n_random_init: int = 9
    probe_linear_first: bool = True
    n_acquisition_iters: int = 50
    kappa_start: float = 2.0
    kappa_end: float = 0.01
    kappa_decay_start: int = 25
    seed: int = 0

    def __post_init__(self):
        if self.n_random_init < 0 or self.n_acquisition_iters < 0:
            raise ValueError("negative evaluation counts")
        if self.kappa_decay_start < 0:
            raise ValueError("kappa_decay_start must be non-negative")
        if self.kappa_end > self.kappa_start:
            raise ValueError("kappa_end must not exceed kappa_start")
        if self.kappa_end <= 0 or self.kappa_start <= 0:
            raise ValueError("kappa values must be positive")


def kappa_schedule(cfg: BOConfig, iteration: int) -> float:
    """Exploration weight for 1-based acquisition ``iteration``.

    Constant at ``kappa_start`` through ``kappa_decay_start``, then a
    geometric interpolation reaching exactly ``kappa_end`` at the final
    iteration.  Runs too short to ever start decaying keep ``kappa_start``
    throughout.
    """
    if not 1 <= iteration <= cfg.n_acquisition_iters:
        raise ValueError(
            f"iteration {iteration} outside [1, {cfg.n_acquisition_iters}]"
        )
    span = cfg.n_acquisition_iters - cfg.kappa_decay_start
    if iteration <= cfg.kappa_decay_start or span <= 0:
        return cfg.kappa_start
    ratio = (cfg.kappa_end / cfg.kappa_start) ** (1.0 / span)
    return cfg.kappa_start * ratio ** (iteration - cfg.kappa_decay_start)


def run_bo(objective: Objective, cfg: BOConfig) -> OptimizationTrace:
    """Bayesian optimization of ``objective`` under ``cfg``.

    Total objective calls: (1 if a linear probe happens) +
    ``n_random_init`` + ``n_acquisition_iters``.  Hyperparameters are
    refitted from scratch before every acquisition step, so each
    suggestion uses a surrogate conditioned on everything seen so far.
    """
    rng = np.random.default_rng(cfg.seed)
    trace = OptimizationTrace()
    model = GaussianProcessModel(domain=objective.bounds)

    def evaluate(theta, phase):
        nonlocal model
        value, sigma = objective(theta)
        trace.record(theta, value, sigma, phase)
        model = model.add_observation(
            Observation(tuple(theta), value, sigma_obs=sigma)
        )

    if cfg.probe_linear_first and objective.initial_probe is not None:
        evaluate(np.asarray(objective.initial_probe), Phase.LINEAR_PROBE)

    lo, hi = objective.lower(), objective.upper()
    for _ in range(cfg.n_random_init):
        evaluate(rng.uniform(lo, hi), Phase.RANDOM_INIT)

    for i in range(1, cfg.n_acquisition_iters + 1):
        if len(model.observations) >= 2:
            model = fit_hyperparameters(model)
        kappa = kappa_schedule(cfg, i)
        theta = suggest_next(model, kappa, rng)
        evaluate(theta, Phase.ACQUISITION)

    return trace


@dataclass(frozen=True)
class SPSAConfig:
    """Simultaneous-perturbation settings.

    ``a`` and ``c`` default to 20% and 10% of each coordinate's bound
    width; the stability offset ``big_A`` defaults to 10% of the step
    budget.  Exponents are the classic (0.602, 0.101) pair.
    """

    a: Optional[float] = None
    c: Optional[float] = None
    big_A: Optional[float] = None
    alpha: float = 0.602
    gamma: float = 0.101
    seed: int = 0


def spsa_gains(a, c, big_A, k: int, alpha: float = 0.602, gamma: float = 0.101):
    """Gain pair (a_k, c_k) for 0-based step ``k``."""
    a_k = a / (k + 1 + big_A) ** alpha
    c_k = c / (k + 1) ** gamma
    return a_k, c_k


def run_spsa(objective: Objective, cfg: SPSAConfig, n_evals: int) -> OptimizationTrace:
    """SPSA ascent on ``objective`` within a budget of ``n_evals`` calls.

    The starting point (the linear-equivalent probe when available,
    otherwise a uniform draw) is evaluated once so the trace brackets the
    baseline; each of the following steps spends two evaluations on a
    symmetric Bernoulli perturbation.  Iterates are clamped to the box.
    """
    if n_evals < 2:
        raise ValueError("SPSA needs at least two objective calls")
    rng = np.random.default_rng(cfg.seed)
    lo, hi = objective.lower(), objective.upper()
    width = hi - lo
    steps = (n_evals - 1) // 2
    a = width * 0.2 if cfg.a is None else np.full_like(width, float(cfg.a))
    c = width * 0.1 if cfg.c is None else np.full_like(width, float(cfg.c))
    big_A = 0.1 * steps if cfg.big_A is None else cfg.big_A

    trace = OptimizationTrace()
    if objective.initial_probe is not None:
        x = np.asarray(objective.initial_probe, dtype=float)
        start_phase = Phase.LINEAR_PROBE
    else:
        x = rng.uniform(lo, hi)
        start_phase = Phase.RANDOM_INIT
    value, sigma = objective(x)
    trace.record(x, value, sigma, start_phase)

    for k in range(steps):
        a_k, c_k = spsa_gains(a, c, big_A, k, cfg.alpha, cfg.gamma)
        delta = rng.choice([-1.0, 1.0], size=objective.dim)
        x_plus = np.clip(x + c_k * delta, lo, hi)
        x_minus = np.clip(x - c_k * delta, lo, hi)
        y_plus, s_plus = objective(x_plus)
        y_minus, s_minus = objective(x_minus)
        trace.record(x_plus, y_plus, s_plus, Phase.ACQUISITION)
        trace.record(x_minus, y_minus, s_minus, Phase.ACQUISITION)
        grad = (y_plus - y_minus) / (2.0 * c_k * delta)
        x = np.clip(x + a_k * grad, lo, hi)

    return trace


def run_random(objective: Objective, n_evals: int, seed: int = 0) -> OptimizationTrace:
    """Uniform random search: exactly ``n_evals`` objective calls."""
    if n_evals < 1:
        raise ValueError("n_evals must be positive")
    rng = np.random.default_rng(seed)
    lo, hi = objective.lower(), objective.upper()
    trace = OptimizationTrace()
    for _ in range(n_evals):
        theta = rng.uniform(lo, hi)
        value, sigma = objective(theta)
        trace.record(theta, value, sigma, Phase.RANDOM_INIT)
    return trace
