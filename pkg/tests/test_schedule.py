"""Tests for the schedule families: boundary conditions, bounds, shapes."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from boanneal import schedule as sch
from boanneal.schedule import Family, ParameterVector, ScheduleSpec, Transform


def spec(family, n, tf=1.0, **kw):
    return ScheduleSpec(family, n, t_final=tf, **kw)


def random_theta(rng, s):
    lo, hi = np.array(sch.bounds(s)).T
    return rng.uniform(lo, hi)


# ---------------------------------------------------------------- families


def test_linear_is_the_ramp():
    s = spec(Family.LINEAR, 0, tf=3.0)
    t = np.linspace(0, 3.0, 7)
    assert np.allclose(sch.evaluate(s, [], t), t / 3.0)


def test_real_hits_knots_exactly():
    s = spec(Family.REAL, 3, tf=2.0)
    theta = [0.1, 0.7, 0.6]
    for j, th in enumerate(theta, start=1):
        assert sch.evaluate(s, theta, j * 2.0 / 4) == pytest.approx(th, abs=1e-15)


def test_real_single_midpoint():
    s = spec(Family.REAL, 1, tf=2.0)
    assert sch.evaluate(s, [0.5], 1.0) == pytest.approx(0.5)


def test_cubic_agrees_with_real_at_knots():
    rng = np.random.default_rng(7)
    s_real = spec(Family.REAL, 4)
    s_cub = spec(Family.CUBIC, 4)
    theta = random_theta(rng, s_real)
    for t in np.concatenate(([0.0], sch.knot_times(s_real), [1.0])):
        assert sch.evaluate(s_cub, theta, t) == pytest.approx(
            sch.evaluate(s_real, theta, t), abs=1e-12
        )


def test_cubic_natural_second_derivative_vanishes_at_ends():
    s = spec(Family.CUBIC, 3)
    theta = [0.3, 0.5, 0.9]
    h = 1e-5
    for t0 in (0.0, 1.0):
        pts = np.clip([t0, t0 + h, t0 + 2 * h] if t0 == 0 else [t0 - 2 * h, t0 - h, t0], 0, 1)
        u = [sch.evaluate(s, theta, t) for t in pts]
        second = (u[0] - 2 * u[1] + u[2]) / h**2
        assert abs(second) < 1e-3


def test_fourier_is_ramp_plus_sines():
    s = spec(Family.FOURIER, 2, tf=2.0)
    theta = [0.25, -0.1]
    t = 0.37
    expected = t / 2.0 + 0.25 * math.sin(math.pi * t / 2.0) + (
        -0.1
    ) * math.sin(2 * math.pi * t / 2.0)
    assert sch.evaluate(s, theta, t) == pytest.approx(expected, abs=1e-14)


def test_fourier_basis_zero_crossings():
    # the j-th basis term sin(j*pi*t/tf) vanishes at t = k*tf/j
    tf = 3.0
    for j in (1, 2, 3):
        s = spec(Family.FOURIER, j, tf=tf)
        theta = np.zeros(j)
        theta[-1] = 0.5 / j
        for k in range(j + 1):
            t = k * tf / j
            assert sch.evaluate(s, theta, t) == pytest.approx(t / tf, abs=1e-12)


def test_bang_bang_amplitude_and_support():
    tf = 2.0
    first = spec(Family.BANG_BANG, 1, tf=tf, pulse_half=0)
    second = spec(Family.BANG_BANG, 1, tf=tf, pulse_half=1)
    th = [math.pi]
    assert sch.evaluate(first, th, 0.5) == pytest.approx(math.pi)  # 2*theta/tf
    assert sch.evaluate(first, th, 1.5) == 0.0
    assert sch.evaluate(second, th, 0.5) == 0.0
    assert sch.evaluate(second, th, 1.5) == pytest.approx(math.pi)


def test_bang_bang_pulse_area_equals_theta():
    # quadrature oracle: the area under the pulse is exactly theta
    tf, theta = 1.7, 2.3
    for half in (0, 1):
        s = spec(Family.BANG_BANG, 1, tf=tf, pulse_half=half)
        area, _ = quad(lambda t: sch.evaluate(s, [theta], t), 0.0, tf, limit=200)
        assert area == pytest.approx(theta, rel=1e-9)


# ------------------------------------------------------------- boundaries


@pytest.mark.parametrize(
    "family,n",
    [
        (Family.LINEAR, 0),
        (Family.REAL, 4),
        (Family.CUBIC, 4),
        (Family.LOW_PASS, 4),
        (Family.FOURIER, 4),
    ],
)
def test_boundary_conditions(family, n):
    rng = np.random.default_rng(11)
    s = spec(family, n, tf=2.5)
    for _ in range(5):
        theta = random_theta(rng, s) if n else []
        assert abs(sch.evaluate(s, theta, 0.0)) <= 1e-12
        assert abs(sch.evaluate(s, theta, 2.5) - 1.0) <= 1e-12


def test_one_minus_transform():
    s = spec(Family.REAL, 2, transform=Transform.ONE_MINUS)
    theta = [0.2, 0.9]
    assert sch.evaluate(s, theta, 0.0) == pytest.approx(1.0)
    assert sch.evaluate(s, theta, 1.0) == pytest.approx(0.0, abs=1e-12)
    base = spec(Family.REAL, 2)
    t = np.linspace(0, 1, 9)
    assert np.allclose(
        sch.evaluate(s, theta, t), 1.0 - sch.evaluate(base, theta, t)
    )


def test_overshoot_is_not_clipped():
    # corridor bounds permit values outside [0, 1]; evaluate must keep them
    s = spec(Family.REAL, 1)
    assert sch.evaluate(s, [1.4], 0.5) == pytest.approx(1.4)
    assert sch.evaluate(s, [-0.4], 0.5) == pytest.approx(-0.4)


# ------------------------------------------------------------------ bounds


def test_bounds_real_n4_zeta2():
    s = spec(Family.REAL, 4)
    b = sch.bounds(s)
    assert b[0] == pytest.approx((-1 / 5, 3 / 5))
    assert b[3] == pytest.approx((2 / 5, 6 / 5))


def test_bounds_fourier():
    s = spec(Family.FOURIER, 3)
    assert sch.bounds(s) == [(-1.0, 1.0), (-0.5, 0.5), (-1 / 3, 1 / 3)]


def test_bounds_bang_bang():
    s = spec(Family.BANG_BANG, 1)
    assert sch.bounds(s) == [(0.0, 2 * math.pi)]


def test_bounds_custom_zeta():
    s = spec(Family.CUBIC, 4, zeta=10.0)  # wide-corridor variant
    lo, hi = sch.bounds(s)[0]
    assert lo == pytest.approx((1 - 10) / 5)
    assert hi == pytest.approx((1 + 10) / 5)


def test_linear_equivalent_params():
    assert np.allclose(
        sch.linear_equivalent_params(spec(Family.REAL, 4)), [0.2, 0.4, 0.6, 0.8]
    )
    assert np.allclose(
        sch.linear_equivalent_params(spec(Family.FOURIER, 3)), np.zeros(3)
    )
    for family, n in [(Family.LINEAR, 0), (Family.BANG_BANG, 1)]:
        with pytest.raises(sch.UnsupportedFamilyError):
            sch.linear_equivalent_params(spec(family, n))


def test_linear_equivalent_reproduces_ramp():
    rng = np.random.default_rng(0)
    t = np.sort(rng.uniform(0, 1, 40))
    for family in (Family.REAL, Family.CUBIC, Family.FOURIER):
        s = spec(family, 4)
        u = sch.evaluate(s, sch.linear_equivalent_params(s), t)
        assert np.allclose(u, t, atol=1e-12)


def test_low_pass_linear_equivalent_is_near_ramp():
    # smoothing a straight line only bends it near the ends; after endpoint
    # renormalization the interior stays close to the ramp
    s = spec(Family.LOW_PASS, 4)
    t = np.linspace(0, 1, 101)
    u = sch.evaluate(s, sch.linear_equivalent_params(s), t)
    assert np.max(np.abs(u - t)) < 0.05


def test_low_pass_smooths_kinks():
    # the filtered curve must deviate from the piecewise-linear one near a
    # sharp knot but agree with it in slowly-varying regions
    theta = [0.05, 0.9, 0.6]
    s_r = spec(Family.REAL, 3)
    s_lp = spec(Family.LOW_PASS, 3)
    t = np.linspace(0, 1, 301)
    d = np.abs(sch.evaluate(s_lp, theta, t) - sch.evaluate(s_r, theta, t))
    assert d.max() > 1e-3  # genuinely different
    assert d.max() < 0.5  # but still tracking the same shape


def test_low_pass_peak_curvature_is_reduced():
    # piecewise-linear curves concentrate all curvature at the knots; the
    # filter spreads it out, so the peak second difference drops sharply
    theta = [0.05, 0.9, 0.6]
    t = np.linspace(0, 1, 512)

    def peak_curvature(fam):
        u = sch.evaluate(spec(fam, 3), theta, t)
        return np.abs(np.diff(u, 2)).max()

    assert peak_curvature(Family.LOW_PASS) < 0.5 * peak_curvature(Family.REAL)


# ------------------------------------------------------------------ errors


def test_time_outside_domain_raises():
    s = spec(Family.REAL, 1)
    with pytest.raises(ValueError):
        sch.evaluate(s, [0.5], 1.2)
    with pytest.raises(ValueError):
        sch.evaluate(s, [0.5], -0.1)


def test_wrong_parameter_count_raises():
    with pytest.raises(ValueError):
        sch.evaluate(spec(Family.REAL, 2), [0.5], 0.3)
    with pytest.raises(ValueError):
        ScheduleSpec(Family.LINEAR, 1, t_final=1.0)
    with pytest.raises(ValueError):
        ScheduleSpec(Family.BANG_BANG, 2, t_final=1.0)
    with pytest.raises(ValueError):
        ScheduleSpec(Family.REAL, 0, t_final=1.0)
    with pytest.raises(ValueError):
        ScheduleSpec(Family.REAL, 2, t_final=-1.0)


def test_parameter_vector_validation():
    s = spec(Family.REAL, 2)
    pv = ParameterVector.for_spec(s, [0.3, 0.7])
    assert len(pv) == 2
    assert np.allclose(pv.as_array(), [0.3, 0.7])
    with pytest.raises(ValueError):
        ParameterVector.for_spec(s, [2.5, 0.7])  # outside corridor
    with pytest.raises(ValueError):
        ParameterVector(values=(0.1,), bounds=((0, 1), (0, 1)))


def test_vectorized_matches_scalar():
    rng = np.random.default_rng(3)
    for family, n in [
        (Family.REAL, 3),
        (Family.CUBIC, 3),
        (Family.LOW_PASS, 3),
        (Family.FOURIER, 3),
        (Family.BANG_BANG, 1),
    ]:
        s = spec(family, n, tf=2.0)
        theta = random_theta(rng, s)
        t = np.linspace(0, 2.0, 17)
        batch = sch.evaluate(s, theta, t)
        single = [sch.evaluate(s, theta, ti) for ti in t]
        assert np.allclose(batch, single, atol=0)


def test_as_callable_binds_parameters():
    s = spec(Family.FOURIER, 2, tf=2.0)
    u = sch.as_callable(s, [0.2, -0.1])
    assert u(0.7) == pytest.approx(sch.evaluate(s, [0.2, -0.1], 0.7))
