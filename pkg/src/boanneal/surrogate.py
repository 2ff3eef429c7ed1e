"""Gaussian-process surrogate used by the Bayesian optimizer.

The model is deliberately small and explicit rather than delegated to a
regression framework: a Matern-5/2 kernel with a single isotropic length
scale, per-observation Gaussian noise on the Gram diagonal, and a prior
mean equal to the running mean of the observed values.  All distances
are computed after mapping the search domain onto the unit hypercube so
one length scale is meaningful across parameters with very different
physical ranges (knot amplitudes vs. pulse areas, say).

Models are value-like: ``add_observation`` and ``fit_hyperparameters``
return new instances, which keeps optimizer traces trivially
reproducible.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.spatial.distance import cdist

__all__ = [
    "Observation",
    "GaussianProcessModel",
    "IllConditionedModelError",
    "matern52",
    "posterior",
    "log_marginal_likelihood",
    "fit_hyperparameters",
    "ucb",
    "suggest_next",
]

#: initial diagonal jitter; escalated tenfold on factorization failure
BASE_JITTER = 1e-10

#: largest jitter tried before the model is declared ill-conditioned
MAX_JITTER = 1e-6

_SQRT5 = math.sqrt(5.0)


class IllConditionedModelError(RuntimeError):
    """Gram matrix could not be factorized even at the maximum jitter."""


def matern52(d, length_scale):
    """Matern-5/2 correlation at distance ``d`` (vectorized, in (0, 1])."""
    if length_scale <= 0:
        raise ValueError(f"length_scale must be positive, got {length_scale}")
    r = np.abs(np.asarray(d, dtype=float)) * (_SQRT5 / length_scale)
    return (1.0 + r + r * r / 3.0) * np.exp(-r)


@dataclass(frozen=True)
class Observation:
    """One evaluated parameter vector with its noise level."""

    theta: tuple
    value: float
    sigma_obs: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(float(x) for x in self.theta))
        if self.sigma_obs < 0:
            raise ValueError("sigma_obs must be non-negative")


@dataclass(frozen=True)
class GaussianProcessModel:
    """Immutable GP state over a box domain.

    ``domain`` is a tuple of (lo, hi) pairs; observations and queries are
    expressed in these physical coordinates and normalized internally.
    """

    domain: tuple
    observations: tuple = ()
    length_scale: float = 0.5
    signal_variance: float = 1.0
    prior_mean: float = 0.0
    jitter: float = BASE_JITTER

    def __post_init__(self):
        object.__setattr__(
            self, "domain", tuple((float(lo), float(hi)) for lo, hi in self.domain)
        )
        object.__setattr__(self, "observations", tuple(self.observations))
        if self.length_scale <= 0:
            raise ValueError("length_scale must be positive")
        if self.signal_variance <= 0:
            raise ValueError("signal_variance must be positive")
        for lo, hi in self.domain:
            if not lo < hi:
                raise ValueError(f"empty domain interval ({lo}, {hi})")

    # -- construction -------------------------------------------------

    def add_observation(self, obs: Observation) -> "GaussianProcessModel":
        """Return a new model including ``obs``.

        The prior mean tracks the running mean of observed values so the
        acquisition surface stays centered as data accumulates.
        """
        if len(obs.theta) != len(self.domain):
            raise ValueError(
                f"observation has {len(obs.theta)} coordinates, "
                f"domain has {len(self.domain)}"
            )
        observations = self.observations + (obs,)
        mean = float(np.mean([o.value for o in observations]))
        return replace(self, observations=observations, prior_mean=mean)

    # -- internals ----------------------------------------------------

    def _normalize(self, points: np.ndarray) -> np.ndarray:
        lo = np.array([b[0] for b in self.domain])
        hi = np.array([b[1] for b in self.domain])
        return (np.atleast_2d(points) - lo) / (hi - lo)

    def _training_arrays(self):
        thetas = np.array([o.theta for o in self.observations], dtype=float)
        y = np.array([o.value for o in self.observations], dtype=float)
        noise = np.array([o.sigma_obs for o in self.observations], dtype=float)
        return self._normalize(thetas), y, noise

    def _factorization(self):
        """Cholesky of the noisy Gram matrix, with jitter escalation."""
        cached = self.__dict__.get("_chol")
        if cached is not None:
            return cached
        z, y, noise = self._training_arrays()
        gram = self.signal_variance * matern52(cdist(z, z), self.length_scale)
        gram[np.diag_indices_from(gram)] += noise**2
        result = _factor_with_jitter(gram, self.jitter)
        resid = y - self.prior_mean
        alpha = cho_solve(result[:2], resid)
        cached = (result, resid, alpha, z)
        object.__setattr__(self, "_chol", cached)
        return cached


def _factor_with_jitter(gram: np.ndarray, jitter: float):
    while jitter <= MAX_JITTER:
        try:
            stabilized = gram.copy()
            stabilized[np.diag_indices_from(stabilized)] += jitter
            c, lower = cho_factor(stabilized, lower=True)
            return c, lower, jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise IllConditionedModelError(
        f"Gram matrix not positive definite even with jitter {MAX_JITTER}"
    )


def posterior(model: GaussianProcessModel, queries):
    """Posterior mean and standard deviation at one or many query points.

    With no observations this returns the prior: mean ``prior_mean`` and
    standard deviation ``sqrt(signal_variance)``.
    """
    q = np.asarray(queries, dtype=float)
    single = q.ndim == 1
    q2 = np.atleast_2d(q)
    if q2.shape[1] != len(model.domain):
        raise ValueError(
            f"queries have {q2.shape[1]} coordinates, domain has {len(model.domain)}"
        )
    if not model.observations:
        mu = np.full(q2.shape[0], model.prior_mean)
        sd = np.full(q2.shape[0], math.sqrt(model.signal_variance))
        return (mu[0], sd[0]) if single else (mu, sd)

    (c, lower, _), _, alpha, z = model._factorization()
    kq = model.signal_variance * matern52(
        cdist(z, model._normalize(q2)), model.length_scale
    )
    mu = model.prior_mean + kq.T @ alpha
    v = solve_triangular(c, kq, lower=lower)
    var = model.signal_variance - np.sum(v * v, axis=0)
    sd = np.sqrt(np.clip(var, 0.0, None))
    return (float(mu[0]), float(sd[0])) if single else (mu, sd)


def log_marginal_likelihood(model: GaussianProcessModel) -> float:
    """Log marginal likelihood of the observations under the model."""
    if len(model.observations) < 1:
        raise ValueError("log marginal likelihood needs observations")
    (c, _, _), resid, alpha, _ = model._factorization()
    n = len(resid)
    return float(
        -0.5 * resid @ alpha
        - np.sum(np.log(np.diag(c)))
        - 0.5 * n * math.log(2.0 * math.pi)
    )


def fit_hyperparameters(model: GaussianProcessModel) -> GaussianProcessModel:
    """Maximize the log marginal likelihood over (length_scale, signal_variance).

    A coarse log-spaced grid is scanned first and the best cell is then
    refined by shrinking multiplicative coordinate steps.  The incoming
    hyperparameters are always part of the candidate set, so the fitted
    model never has a lower marginal likelihood than the input.
    """
    if len(model.observations) < 2:
        raise ValueError("hyperparameter fitting needs at least two observations")
    y = np.array([o.value for o in model.observations])
    prior_mean = float(y.mean())
    var_y = max(float(y.var()), 1e-12)

    def score(ell, sv):
        trial = replace(
            model, length_scale=ell, signal_variance=sv, prior_mean=prior_mean
        )
        try:
            return log_marginal_likelihood(trial), trial
        except IllConditionedModelError:
            return -np.inf, None

    best_lml, best = score(model.length_scale, model.signal_variance)
    for ell in np.geomspace(0.03, 3.0, 13):
        for sv in var_y * np.geomspace(0.1, 10.0, 9):
            lml, trial = score(ell, sv)
            if lml > best_lml:
                best_lml, best = lml, trial

    if best is None:
        warnings.warn("all hyperparameter candidates ill-conditioned; keeping input")
        return model

    # local refinement: multiplicative coordinate steps, shrunk geometrically
    step = 1.6
    while step > 1.02:
        improved = True
        while improved:
            improved = False
            for ell, sv in (
                (best.length_scale * step, best.signal_variance),
                (best.length_scale / step, best.signal_variance),
                (best.length_scale, best.signal_variance * step),
                (best.length_scale, best.signal_variance / step),
            ):
                lml, trial = score(ell, sv)
                if lml > best_lml + 1e-12:
                    best_lml, best, improved = lml, trial, True
        step = math.sqrt(step)
    return best


def ucb(model: GaussianProcessModel, theta, kappa: float) -> float:
    """Upper confidence bound mu(theta) + kappa * sigma(theta)."""
    mu, sd = posterior(model, np.asarray(theta, dtype=float))
    return float(mu + kappa * sd)


def suggest_next(
    model: GaussianProcessModel,
    kappa: float,
    rng: np.random.Generator,
    n_candidates: int = 1024,
    top_k: int = 8,
) -> np.ndarray:
    """Propose the next parameter vector by maximizing the UCB acquisition.

    ``n_candidates`` uniform draws over the domain are scored in a batch;
    the ``top_k`` best seed a coordinate-wise pattern search with a
    shrinking step.  Everything is driven by ``rng``, so a given generator
    state yields exactly one reproducible suggestion.
    """
    lo = np.array([b[0] for b in model.domain])
    hi = np.array([b[1] for b in model.domain])
    cands = rng.uniform(lo, hi, size=(n_candidates, len(model.domain)))
    if not model.observations:
        return cands[0]

    mu, sd = posterior(model, cands)
    scores = mu + kappa * sd
    order = np.argsort(scores)[::-1][:top_k]

    best_x = cands[order[0]]
    best_s = scores[order[0]]
    for idx in order:
        x = cands[idx].copy()
        s = scores[idx]
        step = 0.1 * (hi - lo)
        for _ in range(6):
            for dim in range(len(lo)):
                trials = np.repeat(x[None, :], 2, axis=0)
                trials[0, dim] = min(x[dim] + step[dim], hi[dim])
                trials[1, dim] = max(x[dim] - step[dim], lo[dim])
                tmu, tsd = posterior(model, trials)
                tscores = tmu + kappa * tsd
                k = int(np.argmax(tscores))
                if tscores[k] > s:
                    x, s = trials[k], tscores[k]
            step *= 0.5
        if s > best_s:
            best_x, best_s = x, s
    return np.asarray(best_x, dtype=float)
