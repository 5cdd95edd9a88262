"""Energy, residual, and the geodesically convex barycenter solver.

For a weighted point set {(q_i, w_i)} in the open unit ball the energy

    G(x) = sum_i w_i log( |1 - <x,q_i>|^2 / ((1-|x|^2)(1-|q_i|^2)) )
         = sum_i w_i log cosh^2( d(x,q_i)/2 )

is strictly convex along geodesics and coercive, so it has a unique
minimizer c, characterized by the residual equation

    R(c) = sum_i w_i Phi_c(q_i) = 0        (R(c) = -grad G_c(0) / 2,
                                            G_c(x) = G(Phi_c(x))).

The solver iterates the chart-recentered step c <- Phi_c(eta R(c)/W):
the new center is the point at chart coordinate eta * (weighted mean of
the mapped points).  With eta = 1 a single point is reached in one step;
backtracking on eta keeps the energy strictly decreasing in general.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import geometry, mobius
from . import quaternions as q
from .errors import EmptyData, NotInBall, QhbError

# line search gives up once eta underflows; the iterate cannot improve
_ETA_FLOOR = 1e-18
_EPS = float(np.finfo(float).eps)
# points this close to the boundary make the energy ill-conditioned
BOUNDARY_MARGIN = 1e-12


@dataclass(frozen=True, eq=False)
class WeightedPoints:
    """Finite weighted point set in the open unit ball of H^n."""

    points: np.ndarray   # (N, n, 4)
    weights: np.ndarray  # (N,), all > 0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 3 or pts.shape[-1] != 4 or pts.shape[0] == 0:
            raise EmptyData(f"expected a nonempty (N, n, 4) point array, got {pts.shape}")
        wts = np.asarray(self.weights, dtype=float)
        if wts.shape != (pts.shape[0],):
            raise QhbError(f"{pts.shape[0]} points but {wts.shape} weights")
        if np.any(wts <= 0.0):
            raise QhbError("weights must be positive")
        if np.any(q.vnorm2(pts) >= 1.0):
            raise NotInBall("every point must lie inside the open unit ball")
        pts, wts = pts.copy(), wts.copy()
        pts.flags.writeable = False
        wts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @cached_property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))

    @cached_property
    def _log_const(self) -> float:
        # sum_i w_i log(1 - |q_i|^2), the x-independent part of the energy
        return float(np.sum(self.weights * np.log1p(-q.vnorm2(self.points))))


def weighted_points(points, weights=None) -> WeightedPoints:
    """Build a WeightedPoints from array-likes; unit weights by default."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 2:
        pts = pts[:, None, :] if pts.shape[-1] == 4 else pts
    if pts.size == 0:
        raise EmptyData("no points given")
    if weights is None:
        weights = np.ones(pts.shape[0])
    return WeightedPoints(points=pts, weights=np.asarray(weights, dtype=float))


@dataclass(frozen=True)
class SolverConfig:
    step: float = 1.0        # chart step eta in (0, 1]
    max_iters: int = 500
    tol: float = 1e-12       # residual norm per unit weight
    line_search: bool = True

    def __post_init__(self):
        if not (0.0 < self.step <= 1.0):
            raise QhbError(f"step must be in (0, 1], got {self.step}")
        if self.max_iters < 1:
            raise QhbError("max_iters must be >= 1")
        if self.tol <= 0.0:
            raise QhbError("tol must be positive")


@dataclass(frozen=True, eq=False)
class SolverResult:
    barycenter: np.ndarray  # (n, 4)
    residual_norm: float
    energy: float
    iterations: int
    converged: bool
    energy_trace: tuple = ()  # energy after the initial point and each accepted step


def _energy_batch(data: WeightedPoints, xs: np.ndarray) -> np.ndarray:
    """Energies at a batch of probe points xs of shape (..., n, 4)."""
    x2 = q.vnorm2(xs)
    if np.any(x2 >= 1.0):
        raise NotInBall("probe point outside the open unit ball")
    num2 = q.qnorm2(q.ONE - q.inner(xs[..., None, :, :], data.points))
    w_log = np.log(num2) @ data.weights
    return w_log - data.total_weight * np.log1p(-x2) - data._log_const


def energy(data: WeightedPoints, x) -> float:
    """G(x) = sum_i w_i log cosh^2(d(x, q_i)/2) >= 0."""
    x = q.hvector(x)
    return float(_energy_batch(data, x))


def residual(data: WeightedPoints, c) -> np.ndarray:
    """R(c) = sum_i w_i Phi_c(q_i), a vector in H^n; zero exactly at the
    barycenter."""
    phi = mobius.hua_new(q.hvector(c))
    mapped = mobius.hua_apply(phi, data.points)
    return np.einsum("i,ijk->jk", data.weights, mapped)


def gradient_check(data: WeightedPoints, c, step: float = 1e-5) -> float:
    """Max componentwise gap between a five-point finite difference of
    G_c at 0 and the closed form -2 R(c); a consistency diagnostic."""
    c = q.hvector(c)
    n = c.shape[0]
    phi = mobius.hua_new(c)
    target = -2.0 * residual(data, c).ravel()
    basis = np.eye(4 * n).reshape(4 * n, n, 4)
    offsets = np.array([-2.0, -1.0, 1.0, 2.0]) * step
    probes = offsets[None, :, None, None] * basis[:, None, :, :]  # (4n, 4, n, 4)
    e = _energy_batch(data, mobius.hua_apply(phi, probes))
    fd = (e[:, 0] - 8.0 * e[:, 1] + 8.0 * e[:, 2] - e[:, 3]) / (12.0 * step)
    return float(np.max(np.abs(fd - target)))


def _initial_point(data: WeightedPoints) -> np.ndarray:
    mean = np.einsum("i,ijk->jk", data.weights, data.points) / data.total_weight
    nm = float(q.vnorm(mean))
    if nm > 0.9:
        mean = mean * (0.9 / nm)
    return mean


# -- fused residual/energy pass ---------------------------------------------
#
# One sweep over the points yields both R(c) and G(c): the energy term
# |1 - <c,q_i>|^2 equals |1 - <q_i,c>|^2, which is the squared modulus of
# the denominator already needed for Phi_c(q_i).  For desk-sized inputs a
# plain-float sweep avoids per-call array overhead; both paths produce the
# same values (cross-checked by tests) and both reduce in a fixed order.

_SCALAR_CUTOFF = 64  # use the plain-float sweep when size * n is below this


def _pass_vec(data: WeightedPoints, c: np.ndarray):
    cc = float(q.vnorm2(c))
    s = float(np.sqrt(1.0 - cc))
    ip = q.inner(data.points, c)                      # <q_i, c>, (N, 4)
    den = q.ONE - ip
    den2 = q.qnorm2(den)                              # |1 - <q_i,c>|^2, (N,)
    acz = q.qmul(c, ip[:, None, :]) / (1.0 + s) + s * data.points
    phis = q.qmul(c - acz, (q.qconj(den) / den2[:, None])[:, None, :])
    r_vec = np.einsum("i,ijk->jk", data.weights, phis)
    e = float(data.weights @ np.log(den2)) \
        - data.total_weight * np.log1p(-cc) - data._log_const
    return r_vec, float(q.vnorm(r_vec)), e


def _qmul_s(a, b):
    return (
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    )


def _phi_point_s(c, s, z):
    """Phi_c of one point, both as tuples-of-4-tuples; returns (image, den2)."""
    ipw = ipx = ipy = ipz = 0.0
    for cj, zj in zip(c, z):
        # conj(c_j) * z_j accumulated inline
        cw, cx, cy, cz = cj
        zw, zx, zy, zz = zj
        ipw += cw * zw + cx * zx + cy * zy + cz * zz
        ipx += cw * zx - cx * zw - cy * zz + cz * zy
        ipy += cw * zy + cx * zz - cy * zw - cz * zx
        ipz += cw * zz - cx * zy + cy * zx - cz * zw
    dw, dx, dy, dz = 1.0 - ipw, -ipx, -ipy, -ipz
    den2 = dw * dw + dx * dx + dy * dy + dz * dz
    dinv = (dw / den2, -dx / den2, -dy / den2, -dz / den2)
    ip_scale = 1.0 / (1.0 + s)
    ip = (ipw * ip_scale, ipx * ip_scale, ipy * ip_scale, ipz * ip_scale)
    out = []
    for cj, zj in zip(c, z):
        a = _qmul_s(cj, ip)  # (A_c z)_j = c_j <z,c>/(1+s) + s z_j
        num = (cj[0] - a[0] - s * zj[0], cj[1] - a[1] - s * zj[1],
               cj[2] - a[2] - s * zj[2], cj[3] - a[3] - s * zj[3])
        out.append(_qmul_s(num, dinv))
    return tuple(out), den2


def _pass_scalar(pts, wts, log_const, total, c):
    cc = sum(x * x for row in c for x in row)
    s = math.sqrt(1.0 - cc)
    n = len(c)
    acc = [[0.0, 0.0, 0.0, 0.0] for _ in range(n)]
    e = 0.0
    for w, z in zip(wts, pts):
        img, den2 = _phi_point_s(c, s, z)
        e += w * math.log(den2)
        for j in range(n):
            aj, ij = acc[j], img[j]
            aj[0] += w * ij[0]; aj[1] += w * ij[1]
            aj[2] += w * ij[2]; aj[3] += w * ij[3]
    e -= total * math.log1p(-cc) + log_const
    rn = math.sqrt(sum(x * x for row in acc for x in row))
    r_vec = np.array(acc)
    return r_vec, rn, e


def _scalar_state(data: WeightedPoints):
    pts = tuple(tuple(tuple(comp) for comp in point) for point in data.points)
    return pts, tuple(data.weights), data._log_const, data.total_weight


def solve(data: WeightedPoints, config: SolverConfig | None = None,
          start=None) -> SolverResult:
    """Minimize the energy; returns the unique barycenter.

    Starts from the Euclidean weighted mean (clipped to norm 0.9) unless
    `start` is given; the result is independent of the start up to the
    tolerance.  Convergence is declared on the residual norm
    |R(c)| <= tol * total_weight.  On failure to converge the best
    iterate is still returned with converged=False.
    """
    cfg = config or SolverConfig()
    total = data.total_weight
    c = _initial_point(data) if start is None else q.hvector(start).astype(float)
    if float(q.vnorm2(c)) >= 1.0:
        raise NotInBall("start point outside the open unit ball")

    if data.size * data.n <= _SCALAR_CUTOFF:
        pts, wts, log_const, tw = _scalar_state(data)

        def sweep(point):
            return _pass_scalar(pts, wts, log_const, tw,
                                tuple(tuple(comp) for comp in point))

        def chart_step(center, m, eta):
            ctup = tuple(tuple(comp) for comp in center)
            s = math.sqrt(1.0 - sum(x * x for row in ctup for x in row))
            target = tuple(tuple(eta * x for x in comp) for comp in m)
            img, _ = _phi_point_s(ctup, s, target)
            return np.array(img)
    else:

        def sweep(point):
            return _pass_vec(data, point)

        def chart_step(center, m, eta):
            return mobius.hua_apply(mobius.hua_new(center), eta * m)

    r_vec, rn, e_c = sweep(c)
    trace = [e_c]
    iterations = 0
    converged = False
    while True:
        if rn <= cfg.tol * total:
            converged = True
            break
        if iterations >= cfg.max_iters:
            break
        m = r_vec / total  # chart mean; |m| < 1 always
        # energy decreases smaller than this are invisible in float64,
        # so steps in that regime are judged on the residual instead
        e_floor = 8.0 * _EPS * (1.0 + abs(e_c))
        eta = cfg.step
        cand = chart_step(c, m, eta)
        r_cand, rn_cand, e_cand = sweep(cand)
        stalled = False
        while cfg.line_search and e_cand >= e_c:
            if e_cand <= e_c + e_floor and rn_cand < rn:
                e_cand = min(e_cand, e_c)
                break
            eta *= 0.5
            if eta < _ETA_FLOOR:
                stalled = True
                break
            cand = chart_step(c, m, eta)
            r_cand, rn_cand, e_cand = sweep(cand)
        if stalled:
            break  # no acceptable step exists in this chart
        c, r_vec, rn, e_c = cand, r_cand, rn_cand, e_cand
        trace.append(e_c)
        iterations += 1

    return SolverResult(
        barycenter=np.asarray(c, dtype=float),
        residual_norm=rn,
        energy=e_c,
        iterations=iterations,
        converged=converged,
        energy_trace=tuple(trace),
    )


def solve_weighted_tanh_check(data: WeightedPoints,
                              config: SolverConfig | None = None) -> float:
    """For a two-point set, solve and return

        | w_p tanh(d(c,p)/2) - w_q tanh(d(c,q)/2) |

    at the computed barycenter c.  Also checks that c lies on the
    geodesic through the two points (within 1e-10 in distance)."""
    if data.size != 2:
        raise QhbError("the tanh balance check needs exactly two points")
    p, qq = data.points[0], data.points[1]
    res = solve(data, config)
    c = res.barycenter
    dp = float(geometry.distance(c, p))
    dq = float(geometry.distance(c, qq))
    chart = geometry.geodesic_between(p, qq)
    on_curve = geometry.geodesic_point(chart, dp)
    dev = float(geometry.distance(on_curve, c))
    if dev > 1e-10:
        raise QhbError(f"barycenter is {dev:.3g} away from the geodesic through the points")
    return abs(data.weights[0] * np.tanh(dp / 2.0) - data.weights[1] * np.tanh(dq / 2.0))


def pushforward_invariance(data: WeightedPoints, g: mobius.SpMatrix,
                           config: SolverConfig | None = None) -> float:
    """Distance between solve(g . data) and g(solve(data)); near zero because
    the barycenter commutes with every isometry."""
    res = solve(data, config)
    moved = WeightedPoints(points=mobius.sp_apply(g, data.points), weights=data.weights)
    res_moved = solve(moved, config)
    return float(geometry.distance(res_moved.barycenter, mobius.sp_apply(g, res.barycenter)))
