import math

import numpy as np
import pytest
from scipy.integrate import quad

from qhb import geometry, mobius
from qhb import quaternions as q
from qhb.errors import DegenerateGeodesic, InvalidProfile, NotInBall
from qhb.verify import random_ball_point, random_ball_points, random_sp, random_unit_vector


def pt(*vals):
    return np.array([[v, 0.0, 0.0, 0.0] for v in vals])


# ---------------------------------------------------------------------------
# distance


def test_distance_examples():
    assert float(geometry.distance(pt(0.0), pt(0.5))) == pytest.approx(math.log(3), abs=1e-15)
    p = pt(0.3)
    assert float(geometry.distance(p, p)) == 0.0


def test_distance_arc_length(rng):
    v = random_unit_vector(rng, 2)
    t = 1.7
    z = math.tanh(t / 2) * v
    assert float(geometry.distance(np.zeros((2, 4)), z)) == pytest.approx(t, abs=1e-12)


def test_distance_symmetry_and_positivity(rng):
    for n in (1, 2):
        p = random_ball_point(rng, n)
        y = random_ball_point(rng, n)
        dpq = float(geometry.distance(p, y))
        dqp = float(geometry.distance(y, p))
        assert dpq == pytest.approx(dqp, abs=1e-12)
        assert dpq > 0


def test_distance_rejects_outside_points():
    with pytest.raises(NotInBall):
        geometry.distance(pt(1.0), pt(0.0))
    with pytest.raises(NotInBall):
        geometry.distance(pt(0.0), pt(1.0))


def test_triangle_inequality(rng):
    for n in (1, 2):
        p = random_ball_points(rng, n, 50)
        mid = random_ball_point(rng, n)
        r = random_ball_point(rng, n)
        excess = geometry.distance(p, r) - geometry.distance(p, mid) - float(geometry.distance(mid, r))
        assert np.max(excess) <= 1e-10


def test_distance_isometry_invariance(rng):
    g = random_sp(rng, 2)
    p = random_ball_points(rng, 2, 20)
    y = random_ball_point(rng, 2)
    lhs = geometry.distance(mobius.sp_apply(g, p), mobius.sp_apply(g, y))
    assert np.allclose(lhs, geometry.distance(p, y), atol=1e-10)


# ---------------------------------------------------------------------------
# Poisson kernel form


def test_cosh2_half_distance_examples():
    x = pt(0.3)
    assert float(geometry.cosh2_half_distance(x, x)) == pytest.approx(1.0, abs=1e-15)
    got = float(geometry.cosh2_half_distance(pt(0.0), pt(0.5)))
    # cosh^2(log(3)/2) = ((sqrt3 + 1/sqrt3)/2)^2 = 4/3
    assert got == pytest.approx(4 / 3, abs=1e-15)


def test_cosh2_half_distance_consistency():
    x = np.array([[0.0, 0.0, 0.3, 0.0]])
    y = np.array([[0.0, 0.0, 0.0, 0.4]])
    lhs = float(geometry.cosh2_half_distance(x, y))
    d = float(geometry.distance(x, y))
    assert lhs == pytest.approx(math.cosh(d / 2) ** 2, rel=1e-12)


def test_poisson_distance_consistency_random(rng):
    for n in (1, 2):
        x = random_ball_points(rng, n, 30)
        y = random_ball_point(rng, n)
        lhs = np.log(geometry.cosh2_half_distance(x, y))
        rhs = 2.0 * geometry.log_cosh(geometry.distance(x, y) / 2.0)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_coercivity_bound_on_grid():
    t = np.linspace(0.0, 50.0, 5001)
    value = 2.0 * geometry.log_cosh(t / 2.0)
    assert np.all(value >= t - 2 * math.log(2.0))


# ---------------------------------------------------------------------------
# geodesics


def test_geodesic_point_at_zero_is_base(rng):
    base = random_ball_point(rng, 2)
    chart = geometry.geodesic_chart(base, random_unit_vector(rng, 2))
    assert np.allclose(geometry.geodesic_point(chart, 0.0), base, atol=1e-15)


def test_geodesic_from_origin():
    e1 = pt(1.0)
    chart = geometry.geodesic_chart(pt(0.0), e1)
    got = geometry.geodesic_point(chart, math.log(3))
    assert np.allclose(got, 0.5 * e1, atol=1e-15)
    # norms increase monotonically toward the boundary
    ts = np.linspace(0.0, 8.0, 50)
    norms = q.vnorm(geometry.geodesic_point(chart, ts))
    assert np.all(np.diff(norms) > 0)
    assert float(q.vnorm(geometry.geodesic_point(chart, 40.0))) > 1 - 1e-8


def test_geodesic_unit_speed(rng):
    base = random_ball_point(rng, 2)
    chart = geometry.geodesic_chart(base, random_unit_vector(rng, 2))
    for t in (0.3, 1.0, 2.5, -0.7, -1.9):
        d = float(geometry.distance(geometry.geodesic_point(chart, t), geometry.geodesic_point(chart, 0.0)))
        assert d == pytest.approx(abs(t), abs=1e-10)


def test_midpoint_examples():
    chart = geometry.geodesic_between(pt(0.0), pt(0.5))
    d = float(geometry.distance(pt(0.0), pt(0.5)))
    mid = geometry.geodesic_point(chart, d / 2)
    assert mid[0, 0] == pytest.approx(2 - math.sqrt(3), abs=1e-12)

    chart = geometry.geodesic_between(pt(1 / 3), pt(5 / 7))
    d = float(geometry.distance(pt(1 / 3), pt(5 / 7)))
    mid = geometry.geodesic_point(chart, d / 2)
    assert mid[0, 0] == pytest.approx((13 - 4 * math.sqrt(3)) / 11, abs=1e-12)
    assert abs(mid[0, 0] - 0.551) < 1e-3


def test_geodesic_endpoint_recovery(rng):
    for n in (1, 2):
        p = random_ball_point(rng, n)
        y = random_ball_point(rng, n)
        chart = geometry.geodesic_between(p, y)
        d = float(geometry.distance(p, y))
        assert np.max(np.abs(geometry.geodesic_point(chart, d) - y)) <= 1e-10


def test_degenerate_geodesic():
    with pytest.raises(DegenerateGeodesic):
        geometry.geodesic_between(pt(0.3), pt(0.3))


# ---------------------------------------------------------------------------
# measure and volume


def test_measure_density_at_origin():
    assert float(geometry.measure_density(np.zeros((1, 4)))) == 16.0
    assert float(geometry.measure_density(np.zeros((2, 4)))) == 256.0


def test_measure_density_rejects_boundary():
    with pytest.raises(NotInBall):
        geometry.measure_density(pt(1.0))


def sphere_area(m: int) -> float:
    return 2.0 * math.pi ** (m / 2) / math.gamma(m / 2)


def volume_by_quadrature(rho: float, n: int) -> float:
    # radial integral of the volume element, an independent oracle
    def shell(r):
        return 4.0 ** (2 * n) * sphere_area(4 * n) * r ** (4 * n - 1) / (1 - r * r) ** (2 * n + 2)

    val, err = quad(shell, 0.0, math.tanh(rho / 2), epsabs=1e-13, epsrel=1e-12)
    return val


def test_ball_volume_zero_and_monotone():
    assert float(geometry.ball_volume(0.0, 1)) == 0.0
    rho = np.linspace(0.0, 3.0, 40)
    for n in (1, 2):
        vols = geometry.ball_volume(rho, n)
        assert np.all(np.diff(vols) > 0)


def test_ball_volume_closed_value():
    got = float(geometry.ball_volume(math.log(3), 1))
    assert got == pytest.approx(88 * math.pi ** 2 / 81, rel=1e-14)


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("rho", [0.5, math.log(3), 2.0])
def test_ball_volume_vs_quadrature(n, rho):
    closed = float(geometry.ball_volume(rho, n))
    assert closed == pytest.approx(volume_by_quadrature(rho, n), rel=1e-8)


@pytest.mark.parametrize("n", [1, 2])
def test_ball_volume_euclidean_limit(n):
    rho = 1e-3
    got = float(geometry.ball_volume(rho, n)) / rho ** (4 * n)
    expect = math.pi ** (2 * n) / math.factorial(2 * n)
    assert got == pytest.approx(expect, rel=1e-4)


# ---------------------------------------------------------------------------
# convexity certificate


def test_convexity_flat_profile():
    prof = geometry.ConvexityProfile(a=0.0, r=0.0)
    assert float(geometry.convexity_second_derivative(prof, 0.0)) == pytest.approx(0.5, abs=1e-15)
    # f(t) = 2 log cosh(t/2) has f''(t) = (1 - tanh^2(t/2))/2
    for t in (0.5, 2.0, -3.0):
        got = float(geometry.convexity_second_derivative(prof, t))
        assert got == pytest.approx((1 - math.tanh(t / 2) ** 2) / 2, rel=1e-14)


def test_convexity_profile_validation():
    with pytest.raises(InvalidProfile):
        geometry.ConvexityProfile(a=0.5, r=0.4)
    with pytest.raises(InvalidProfile):
        geometry.ConvexityProfile(a=0.0, r=1.0)
    with pytest.raises(InvalidProfile):
        geometry.convexity_profile(pt(0.5), pt(0.1))  # direction not unit


def test_quadratic_endpoint_value_via_fit():
    # fit the quadratic numerator through implementation values and
    # compare its value at u=1 with (1-r^2)(1+r^2-2a) = 0.4875
    a, r = 0.3, 0.5
    prof = geometry.ConvexityProfile(a=a, r=r)
    ts = np.array([0.5, 1.0, 1.5])
    us = np.tanh(ts / 2)
    p = 1 - 2 * a * us + r * r * us * us
    nvals = np.asarray(geometry.convexity_second_derivative(prof, ts)) * 2 * p * p / (1 - us * us)
    coeffs = np.linalg.solve(np.vander(us, 3, increasing=True), nvals)
    n_at_one = float(coeffs.sum())
    assert n_at_one == pytest.approx((1 - r * r) * (1 + r * r - 2 * a), abs=1e-10)
    assert n_at_one == pytest.approx(0.4875, abs=1e-10)


def test_convexity_positive_for_many_profiles(rng):
    ts = np.linspace(-10.0, 10.0, 41)
    for _ in range(1000):
        r = rng.uniform(0.0, 0.999)
        a = rng.uniform(-r, r)
        vals = geometry.convexity_second_derivative(geometry.ConvexityProfile(a=a, r=r), ts)
        assert np.min(vals) > 0.0


def test_convexity_matches_finite_differences(rng):
    h = 1e-3
    for n in (1, 2):
        v = random_unit_vector(rng, n)
        y = random_ball_point(rng, n)
        prof = geometry.convexity_profile(v, y)
        for t in (-2.0, -0.5, 0.0, 0.7, 1.9):
            ts = t + h * np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
            xs = np.multiply.outer(np.tanh(ts / 2.0), v)
            f = np.log(geometry.cosh2_half_distance(xs, y))
            fd = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
            closed = float(geometry.convexity_second_derivative(prof, t))
            assert closed == pytest.approx(fd, abs=1e-5)
