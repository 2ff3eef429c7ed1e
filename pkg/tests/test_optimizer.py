"""Tests for the optimizers and their traces."""

import math

import numpy as np
import pytest

from boanneal import optimizer as opt
from boanneal.optimizer import (
    BOConfig,
    Objective,
    Phase,
    SPSAConfig,
    kappa_schedule,
)


def quadratic(center, dim=2, bounds=None, probe=None):
    center = np.asarray(center, dtype=float)

    def fn(theta):
        return -float(np.sum((theta - center) ** 2)), 0.0

    return Objective(
        fn=fn,
        bounds=bounds or tuple((0.0, 1.0) for _ in range(dim)),
        initial_probe=probe,
        name="quadratic",
    )


# ------------------------------------------------------------ kappa schedule


def test_kappa_constant_then_geometric():
    cfg = BOConfig()
    assert kappa_schedule(cfg, 1) == 2.0
    assert kappa_schedule(cfg, 25) == 2.0
    assert kappa_schedule(cfg, 50) == pytest.approx(0.01, rel=1e-12)
    assert kappa_schedule(cfg, 30) == pytest.approx(
        2.0 * (0.01 / 2.0) ** (5 / 25), rel=1e-12
    )
    assert kappa_schedule(cfg, 30) == pytest.approx(0.6931, abs=1e-4)


def test_kappa_is_monotone_nonincreasing():
    cfg = BOConfig()
    ks = [kappa_schedule(cfg, i) for i in range(1, 51)]
    assert all(b <= a for a, b in zip(ks, ks[1:]))


def test_kappa_iteration_out_of_range():
    cfg = BOConfig()
    with pytest.raises(ValueError):
        kappa_schedule(cfg, 0)
    with pytest.raises(ValueError):
        kappa_schedule(cfg, 51)


def test_config_validation():
    with pytest.raises(ValueError):
        BOConfig(kappa_end=3.0)  # above kappa_start
    with pytest.raises(ValueError):
        BOConfig(kappa_decay_start=-1)
    with pytest.raises(ValueError):
        BOConfig(n_random_init=-1)
    # decay never starting within the budget is allowed: kappa stays flat
    flat = BOConfig(n_acquisition_iters=10, kappa_decay_start=25)
    assert kappa_schedule(flat, 10) == flat.kappa_start


def test_extended_budget_config():
    # large-budget variant: 80 random + 420 acquisitions = 500 evaluations
    cfg = BOConfig(n_random_init=80, n_acquisition_iters=420,
                   probe_linear_first=False, kappa_decay_start=210)
    assert cfg.n_random_init + cfg.n_acquisition_iters == 500
    assert kappa_schedule(cfg, 420) == pytest.approx(0.01, rel=1e-12)


# -------------------------------------------------------------------- run_bo


def test_bo_budget_with_probe():
    cfg = BOConfig(n_random_init=3, n_acquisition_iters=4, seed=1)
    trace = opt.run_bo(quadratic([0.3, 0.7], probe=(0.5, 0.5)), cfg)
    assert len(trace) == 1 + 3 + 4
    phases = [e.phase for e in trace.entries]
    assert phases[0] is Phase.LINEAR_PROBE
    assert phases[1:4] == [Phase.RANDOM_INIT] * 3
    assert phases[4:] == [Phase.ACQUISITION] * 4


def test_bo_budget_without_probe():
    cfg = BOConfig(n_random_init=3, n_acquisition_iters=4, seed=1)
    trace = opt.run_bo(quadratic([0.3, 0.7]), cfg)
    assert len(trace) == 3 + 4
    assert trace.entries[0].phase is Phase.RANDOM_INIT


def test_bo_probe_can_be_disabled():
    cfg = BOConfig(n_random_init=2, n_acquisition_iters=2,
                   probe_linear_first=False, seed=0)
    trace = opt.run_bo(quadratic([0.5, 0.5], probe=(0.1, 0.1)), cfg)
    assert len(trace) == 4
    assert all(e.phase is not Phase.LINEAR_PROBE for e in trace.entries)


def test_bo_trace_indices_and_best():
    cfg = BOConfig(n_random_init=4, n_acquisition_iters=6, seed=3)
    trace = opt.run_bo(quadratic([0.4, 0.6], probe=(0.5, 0.5)), cfg)
    assert [e.index for e in trace.entries] == list(range(len(trace)))
    assert trace.best_value == max(e.value for e in trace.entries)
    rb = trace.running_best()
    assert np.all(np.diff(rb) >= 0)
    assert rb[-1] == trace.best_value


def test_bo_is_deterministic_per_seed():
    cfg = BOConfig(n_random_init=3, n_acquisition_iters=5, seed=11)
    obj = quadratic([0.2, 0.9], probe=(0.5, 0.5))
    t1 = opt.run_bo(obj, cfg)
    t2 = opt.run_bo(obj, cfg)
    assert t1.to_dict() == t2.to_dict()
    t3 = opt.run_bo(obj, BOConfig(n_random_init=3, n_acquisition_iters=5, seed=12))
    assert t3.to_dict() != t1.to_dict()


def test_bo_respects_bounds():
    cfg = BOConfig(n_random_init=4, n_acquisition_iters=8, seed=5)
    bounds = ((-0.2, 0.6), (0.4, 1.2))
    trace = opt.run_bo(quadratic([0.0, 1.0], bounds=bounds), cfg)
    for e in trace.entries:
        for v, (lo, hi) in zip(e.theta, bounds):
            assert lo <= v <= hi


def test_bo_finds_smooth_optimum():
    cfg = BOConfig(n_random_init=5, n_acquisition_iters=20, seed=7)
    trace = opt.run_bo(quadratic([0.3], dim=1, bounds=((0.0, 1.0),)), cfg)
    assert trace.best_value > -1e-3  # within 0.03 of the optimum location


def test_objective_error_carries_theta():
    def broken(theta):
        raise FloatingPointError("boom")

    obj = Objective(fn=broken, bounds=((0.0, 1.0),))
    with pytest.raises(opt.ObjectiveEvaluationError) as err:
        opt.run_bo(obj, BOConfig(n_random_init=1, n_acquisition_iters=0, seed=0))
    assert len(err.value.theta) == 1


def test_trace_round_trip():
    cfg = BOConfig(n_random_init=2, n_acquisition_iters=2, seed=2)
    trace = opt.run_bo(quadratic([0.5, 0.5], probe=(0.4, 0.4)), cfg)
    clone = opt.OptimizationTrace.from_dict(trace.to_dict())
    assert clone.to_dict() == trace.to_dict()
    assert clone.best_theta == trace.best_theta


# ------------------------------------------------------------------ run_spsa


def test_spsa_gain_formula():
    a_k, c_k = opt.spsa_gains(0.5, 0.2, 10.0, k=0)
    assert a_k == pytest.approx(0.5 / 11**0.602, rel=1e-12)
    assert c_k == pytest.approx(0.2, rel=1e-12)
    a_k5, c_k5 = opt.spsa_gains(0.5, 0.2, 10.0, k=5)
    assert a_k5 == pytest.approx(0.5 / 16**0.602, rel=1e-12)
    assert c_k5 == pytest.approx(0.2 / 6**0.101, rel=1e-12)


def test_spsa_budget_and_phases():
    obj = quadratic([0.5, 0.5], probe=(0.2, 0.2))
    trace = opt.run_spsa(obj, SPSAConfig(seed=0), n_evals=21)
    assert len(trace) == 21  # 1 start + 2 * 10 steps
    assert trace.entries[0].phase is Phase.LINEAR_PROBE
    assert all(e.phase is Phase.ACQUISITION for e in trace.entries[1:])
    even_budget = opt.run_spsa(obj, SPSAConfig(seed=0), n_evals=20)
    assert len(even_budget) == 19  # an odd call cannot make half a step


def test_spsa_zero_gain_freezes_iterate():
    # with a = 0 the iterate never moves; the best evaluation is the
    # starting point itself when the objective peaks there
    obj = quadratic([0.2, 0.2], probe=(0.2, 0.2))
    trace = opt.run_spsa(obj, SPSAConfig(a=0.0, seed=4), n_evals=11)
    assert trace.best_theta == (0.2, 0.2)
    assert trace.best_value == 0.0
    # every later evaluation is a symmetric perturbation around the start
    pairs = trace.entries[1:]
    for plus, minus in zip(pairs[::2], pairs[1::2]):
        mid = (np.array(plus.theta) + np.array(minus.theta)) / 2
        assert np.allclose(mid, [0.2, 0.2], atol=1e-12)


def test_spsa_descends_quadratic():
    obj = quadratic([0.6, 0.4], probe=(0.05, 0.95))
    trace = opt.run_spsa(obj, SPSAConfig(seed=3), n_evals=201)
    assert trace.best_value > -5e-3


def test_spsa_respects_bounds():
    bounds = ((0.0, 0.3), (0.0, 0.3))
    obj = quadratic([1.0, 1.0], bounds=bounds)  # optimum outside the box
    trace = opt.run_spsa(obj, SPSAConfig(seed=8), n_evals=41)
    for e in trace.entries:
        for v, (lo, hi) in zip(e.theta, bounds):
            assert lo <= v <= hi


def test_spsa_deterministic_per_seed():
    obj = quadratic([0.5, 0.5])
    t1 = opt.run_spsa(obj, SPSAConfig(seed=6), n_evals=15)
    t2 = opt.run_spsa(obj, SPSAConfig(seed=6), n_evals=15)
    assert t1.to_dict() == t2.to_dict()


# ---------------------------------------------------------------- run_random


def test_random_search_budget_and_determinism():
    obj = quadratic([0.3, 0.3])
    t1 = opt.run_random(obj, 25, seed=9)
    t2 = opt.run_random(obj, 25, seed=9)
    assert len(t1) == 25
    assert t1.to_dict() == t2.to_dict()
    assert all(e.phase is Phase.RANDOM_INIT for e in t1.entries)


def test_random_search_uniform_coverage():
    obj = quadratic([0.5], dim=1)
    trace = opt.run_random(obj, 400, seed=1)
    xs = np.array([e.theta[0] for e in trace.entries])
    assert xs.min() < 0.1 and xs.max() > 0.9
    assert abs(xs.mean() - 0.5) < 0.05
