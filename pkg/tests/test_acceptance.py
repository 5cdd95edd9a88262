"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
report lines.
"""

import json
import math
import time

import numpy as np
import pytest
from scipy.integrate import quad

from qhb import barycenter as bc
from qhb import cli, geometry, mobius, regions
from qhb import quaternions as q
from qhb.verify import random_ball_point, random_weighted_points


def pt(*vals):
    """A single point in H^n with real components."""
    return np.array([[v, 0.0, 0.0, 0.0] for v in vals])


def pts1(*vals):
    """A list of real-axis points in H^1, shape (N, 1, 4)."""
    return np.array([[[v, 0.0, 0.0, 0.0]] for v in vals])


def report(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'} — {detail}", flush=True)


def best_runtime(fn, repeats: int = 7) -> float:
    fn()  # warm-up
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def test_criterion_1_two_weighted_points():
    data = bc.WeightedPoints(points=pts1(0.5, -0.25), weights=np.array([2.0, 1.0]))
    res = bc.solve(data)
    err = abs(res.barycenter[0, 0] - 2 / 7)
    res_at = float(np.max(np.abs(bc.residual(data, pt(2 / 7)))))
    runtime = best_runtime(lambda: bc.solve(data))
    ok = err <= 1e-10 and res_at <= 1e-14 and runtime < 1e-3
    report(1, ok, f"|c - 2/7| = {err:.2e}, residual at 2/7 = {res_at:.2e}, "
                  f"runtime = {runtime * 1e3:.3f} ms")
    assert err <= 1e-10
    assert res_at <= 1e-14
    assert runtime < 1e-3


def test_criterion_2_hyperbolic_midpoint():
    data = bc.weighted_points(pt(0.0, 0.5))
    res = bc.solve(data)
    exact = 2 - math.sqrt(3)
    err = abs(res.barycenter[0, 0] - exact)
    fp = mobius.hua_fixed_point(mobius.hua_new(pt(0.5)))
    fp_err = float(np.max(np.abs(res.barycenter - fp)))
    ok = err <= 1e-10 and fp_err <= 1e-12
    report(2, ok, f"|c - (2-sqrt3)| = {err:.2e}, |c - symmetry fixed point| = {fp_err:.2e}")
    assert err <= 1e-10
    assert fp_err <= 1e-12


def test_criterion_3_translation_invariance():
    t = 1.0 / 3.0
    lead = 1.0 / math.sqrt(1 - t * t)
    m = np.zeros((2, 2, 4))
    m[0, 0, 0] = m[1, 1, 0] = lead
    m[0, 1, 0] = m[1, 0, 0] = lead * t
    g = mobius.SpMatrix(matrix=m)

    data = bc.weighted_points(pt(0.0, 0.5))
    res = bc.solve(data)
    moved = bc.WeightedPoints(points=mobius.sp_apply(g, data.points), weights=data.weights)
    res_moved = bc.solve(moved)
    g_of_c = mobius.sp_apply(g, res.barycenter)
    gap = float(geometry.distance(res_moved.barycenter, g_of_c))
    exact = (13 - 4 * math.sqrt(3)) / 11
    err_a = abs(res_moved.barycenter[0, 0] - exact)
    err_b = abs(g_of_c[0, 0] - exact)
    ok = gap <= 1e-10 and err_a <= 1e-10 and err_b <= 1e-10
    report(3, ok, f"d(solve(gD), g(solve(D))) = {gap:.2e}, "
                  f"|c' - (13-4sqrt3)/11| = {max(err_a, err_b):.2e}")
    assert gap <= 1e-10
    assert err_a <= 1e-10 and err_b <= 1e-10


def test_criterion_4_three_point_reference_digits():
    """Residual clause and runtime pass; the four-digit reference components
    cannot: they are inconsistent with the residual equation they are said
    to solve (they break the configuration's rotational symmetry, which
    forces a zero k component and i:j components in ratio 3:2, and three
    independent methods place the true solution near
    (0.13016, 0.09545, 0.06363, 0)).  The assertion is kept verbatim and
    is expected to fail; see the residual-based checks for the
    authoritative verification of this configuration."""
    pts = np.array([[[0, 0, 0, 0.0]], [[0.4, 0, 0, 0.0]], [[0, 0.3, 0.2, 0.0]]])
    data = bc.WeightedPoints(points=pts, weights=np.ones(3))
    res = bc.solve(data)
    rn = float(q.vnorm(bc.residual(data, res.barycenter)))
    runtime = best_runtime(lambda: bc.solve(data))
    reference = np.array([0.1874, -0.0012, -0.0348, -0.0009])
    digit_gap = float(np.max(np.abs(res.barycenter[0] - reference)))
    ok = rn <= 1e-10 and digit_gap <= 5e-4 and runtime < 1e-2
    report(4, ok, f"residual = {rn:.2e} (pass: {rn <= 1e-10}), "
                  f"max digit gap = {digit_gap:.2e} (pass: {digit_gap <= 5e-4}), "
                  f"runtime = {runtime * 1e3:.2f} ms")
    assert rn <= 1e-10
    assert runtime < 1e-2
    assert digit_gap <= 5e-4  # known-defective reference digits; asserted unchanged


def test_criterion_5_symmetric_four_points():
    pts = np.array([
        [[0.5, 0, 0, 0.0]], [[-0.5, 0, 0, 0.0]],
        [[0.0, 0.5, 0, 0.0]], [[0.0, -0.5, 0, 0.0]],
    ])
    data = bc.WeightedPoints(points=pts, weights=np.ones(4))
    res = bc.solve(data, start=pt(0.3))
    norm = float(q.vnorm(res.barycenter))
    ok = norm <= 1e-10
    report(5, ok, f"|c| = {norm:.2e}")
    assert norm <= 1e-10


def test_criterion_6_ball_volumes():
    def sphere_area(m):
        return 2.0 * math.pi ** (m / 2) / math.gamma(m / 2)

    worst_rel = 0.0
    for n in (1, 2):
        for rho in (0.5, math.log(3), 2.0):
            def shell(r, n=n):
                return (4.0 ** (2 * n) * sphere_area(4 * n) * r ** (4 * n - 1)
                        / (1 - r * r) ** (2 * n + 2))

            oracle, _ = quad(shell, 0.0, math.tanh(rho / 2), epsabs=1e-13, epsrel=1e-12)
            closed = float(geometry.ball_volume(rho, n))
            worst_rel = max(worst_rel, abs(closed - oracle) / oracle)
    limit_rel = 0.0
    for n in (1, 2):
        rho = 1e-3
        got = float(geometry.ball_volume(rho, n)) / rho ** (4 * n)
        expect = math.pi ** (2 * n) / math.factorial(2 * n)
        limit_rel = max(limit_rel, abs(got - expect) / expect)
    ok = worst_rel <= 1e-8 and limit_rel <= 1e-4
    report(6, ok, f"quadrature rel err = {worst_rel:.2e}, small-radius rel err = {limit_rel:.2e}")
    assert worst_rel <= 1e-8
    assert limit_rel <= 1e-4


def test_criterion_7_property_suites(tmp_path, capsys):
    report_path = tmp_path / "verify.json"
    t0 = time.perf_counter()
    code = cli.main(["verify", "--trials", "10000", "--seed", "0",
                     "--json", str(report_path)])
    elapsed = time.perf_counter() - t0
    capsys.readouterr()  # the per-identity table; the JSON report is asserted below
    checks = {c["name"]: c for c in json.loads(report_path.read_text())["checks"]}
    required = {
        "involution": 1e-12,
        "norm_relation": 1e-12,
        "sp_membership": 1e-10,
        "jacobian_fd": 1e-6,
        "measure_invariance": 1e-10,
        "intertwine_offdiag": 1e-10,
        "poisson_distance": 1e-12,
        "coercivity": 0.0,
        "convexity_fd": 1e-5,
        "convexity_positive": 0.0,
    }
    worst = {name: checks[name]["max_error"] for name in required}
    ok = (code == 0 and elapsed < 30.0
          and all(checks[name]["max_error"] <= tol for name, tol in required.items()))
    report(7, ok, f"exit = {code}, runtime = {elapsed:.1f} s, worst errors: "
                  + ", ".join(f"{k}={v:.1e}" for k, v in worst.items()))
    assert code == 0
    for name, tol in required.items():
        assert checks[name]["max_error"] <= tol, name
        assert checks[name]["trials"] >= (1 if tol == 0.0 else 2500)
    assert elapsed < 30.0


def test_criterion_8_monte_carlo_regions():
    t0 = time.perf_counter()
    spec = regions.geodesic_ball(pt(0.3), 1.0)
    rr = regions.region_barycenter(spec, 10**6, seed=2024)
    dev = float(np.sqrt(np.sum((rr.result.barycenter - pt(0.3)) ** 2)))
    se = rr.barycenter_standard_error

    spec0 = regions.geodesic_ball(pt(0.0), math.log(3))
    ss = regions.sample_region(spec0, 10**6, seed=2025)
    exact = 88 * math.pi ** 2 / 81
    mass_err = abs(ss.total_mass_estimate - exact)
    elapsed = time.perf_counter() - t0
    ok = dev <= 3 * se and mass_err <= 3 * ss.standard_error and elapsed < 60.0
    report(8, ok, f"|c - center| = {dev:.2e} vs 3SE = {3 * se:.2e}; "
                  f"mass err = {mass_err:.2e} vs 3SE = {3 * ss.standard_error:.2e}; "
                  f"runtime = {elapsed:.1f} s")
    assert dev <= 3 * se
    assert mass_err <= 3 * ss.standard_error
    assert elapsed < 60.0


def test_criterion_9_initialization_independence():
    rng = np.random.default_rng(99)
    data = random_weighted_points(rng, 2, 10, rmax=0.8)
    sols = [bc.solve(data, start=random_ball_point(rng, 2, rmax=0.8)).barycenter
            for _ in range(5)]
    worst = max(
        float(geometry.distance(sols[i], sols[j]))
        for i in range(5) for j in range(i + 1, 5)
    )
    ok = worst <= 1e-8
    report(9, ok, f"max pairwise distance over 5 starts = {worst:.2e}")
    assert worst <= 1e-8
