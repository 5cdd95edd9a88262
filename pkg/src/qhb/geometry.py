"""Bergman distance, geodesics, invariant measure, ball volumes, convexity.

All quantities refer to the metric whose distance from the origin is
d(0, z) = log((1+|z|)/(1-|z|)) and whose isometry group is Sp(n,1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import mobius
from . import quaternions as q
from .errors import DegenerateGeodesic, InvalidProfile, NotInBall

# below this separation two points are considered coincident for geodesics
_COINCIDENT = 1e-15


def _check_interior(z: np.ndarray, what: str = "point") -> np.ndarray:
    if z.ndim == 1:
        z = z[None, :]
    if np.any(q.vnorm2(z) >= 1.0):
        raise NotInBall(f"{what} outside the open unit ball")
    return z


def distance(p, q_point) -> np.ndarray:
    """Bergman distance d(p,q) = log((1+m)/(1-m)), m = |Phi_q(p)|.

    p may carry leading batch axes; q_point is a single point.
    """
    p = _check_interior(np.asarray(p, dtype=float))
    phi = mobius.hua_new(q_point)
    m = q.vnorm(mobius.hua_apply(phi, p))
    return 2.0 * np.arctanh(m)


def cosh2_half_distance(x, y) -> np.ndarray:
    """Poisson-kernel form |1 - <x,y>|^2 / ((1-|x|^2)(1-|y|^2)) = cosh^2(d/2)."""
    x = _check_interior(np.asarray(x, dtype=float))
    y = _check_interior(np.asarray(y, dtype=float))
    num = q.qnorm2(q.ONE - q.inner(x, y))
    return num / ((1.0 - q.vnorm2(x)) * (1.0 - q.vnorm2(y)))


def log_cosh(x) -> np.ndarray:
    """log cosh x, stable for large |x|."""
    ax = np.abs(np.asarray(x, dtype=float))
    return ax + np.log1p(np.exp(-2.0 * ax)) - math.log(2.0)


# ---------------------------------------------------------------------------
# geodesics


@dataclass(frozen=True, eq=False)
class GeodesicChart:
    """Unit-speed geodesic t -> Phi_base(-tanh(t/2) direction).

    The sign makes the curve leave base toward +direction; for base = 0 it
    is exactly t -> tanh(t/2) direction.  t is arc length and t=0 maps to
    base.
    """

    base: np.ndarray       # (n, 4), |base| < 1
    direction: np.ndarray  # (n, 4), |direction| = 1
    _phi: mobius.HuaInvolution = field(repr=False, default=None)


def geodesic_chart(base, direction) -> GeodesicChart:
    base = q.hvector(base)
    direction = q.hvector(direction)
    dn = float(q.vnorm(direction))
    if dn < _COINCIDENT:
        raise DegenerateGeodesic("zero direction")
    return GeodesicChart(base=base, direction=direction / dn, _phi=mobius.hua_new(base))


def geodesic_point(chart: GeodesicChart, t) -> np.ndarray:
    """Point at arc length t; t may be an array (batch of points)."""
    t = np.asarray(t, dtype=float)
    w = np.multiply.outer(-np.tanh(t / 2.0), chart.direction)
    phi = chart._phi if chart._phi is not None else mobius.hua_new(chart.base)
    return mobius.hua_apply(phi, w)


def geodesic_between(p, q_point) -> GeodesicChart:
    """Chart based at p through q: point(d(p,q)) = q.  Midpoint = point(d/2)."""
    p = q.hvector(p)
    phi = mobius.hua_new(p)
    m = mobius.hua_apply(phi, q.hvector(q_point))
    mn = float(q.vnorm(m))
    if mn < _COINCIDENT:
        raise DegenerateGeodesic("endpoints coincide")
    return GeodesicChart(base=p, direction=-m / mn, _phi=phi)


# ---------------------------------------------------------------------------
# invariant measure and volumes


def measure_density(z) -> np.ndarray:
    """Density 4^(2n) / (1-|z|^2)^(2n+2) of the invariant volume w.r.t.
    Lebesgue measure on R^(4n).  Batched over z."""
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[None, :]
    n = z.shape[-2]
    z2 = q.vnorm2(z)
    if np.any(z2 >= 1.0):
        raise NotInBall("point outside the open unit ball")
    return 4.0 ** (2 * n) / (1.0 - z2) ** (2 * n + 2)


def ball_volume(rho, n: int) -> np.ndarray:
    """Volume of a metric ball of radius rho in the n-dimensional ball model:

        (4 pi)^(2n)/(2n+1)! * sinh^(4n)(rho/2) * (1 + 2n cosh^2(rho/2)).
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0.0):
        raise ValueError("radius must be >= 0")
    half = rho / 2.0
    lead = (4.0 * math.pi) ** (2 * n) / math.factorial(2 * n + 1)
    return lead * np.sinh(half) ** (4 * n) * (1.0 + 2 * n * np.cosh(half) ** 2)


# ---------------------------------------------------------------------------
# convexity certificate


@dataclass(frozen=True)
class ConvexityProfile:
    """Data (a, r) = (Re w, |w|), w = <v, y>, for the energy kernel restricted
    to the origin geodesic with unit direction v and fixed target y."""

    a: float
    r: float

    def __post_init__(self):
        if not (abs(self.a) <= self.r < 1.0):
            raise InvalidProfile(f"need |a| <= r < 1, got a={self.a}, r={self.r}")


def convexity_profile(v, y) -> ConvexityProfile:
    """Profile of t -> log cosh^2(d(tanh(t/2) v, y)/2) for unit v, |y| < 1."""
    v = q.hvector(v)
    if abs(float(q.vnorm(v)) - 1.0) > 1e-9:
        raise InvalidProfile("direction must be a unit vector")
    y = _check_interior(q.hvector(y), "target")
    w = q.inner(v, y)
    r = float(q.qnorm(w))
    if r >= 1.0:
        raise InvalidProfile("|<v,y>| must be < 1")
    a = min(max(float(w[0]), -r), r)  # guard one-ulp |Re w| > |w| roundoff
    return ConvexityProfile(a=a, r=r)


def convexity_second_derivative(profile: ConvexityProfile, t) -> np.ndarray:
    """Closed form f''(t) = (1-u^2)/2 * N(u)/P(u)^2, u = tanh(t/2), with

        P(u) = 1 - 2 a u + r^2 u^2,
        N(u) = (1 + r^2 - 2 a^2) - 2 a (1 - r^2) u + (2 a^2 - r^4 - r^2) u^2,

    strictly positive for every t (the energy kernel is strictly convex
    along geodesics)."""
    a, r = profile.a, profile.r
    u = np.tanh(np.asarray(t, dtype=float) / 2.0)
    p = 1.0 - 2.0 * a * u + r * r * u * u
    nq = (1.0 + r * r - 2.0 * a * a) - 2.0 * a * (1.0 - r * r) * u \
        + (2.0 * a * a - r ** 4 - r * r) * u * u
    return 0.5 * (1.0 - u * u) * nq / (p * p)
