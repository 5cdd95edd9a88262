"""Command-line interface.

Subcommands: barycenter, region-barycenter, volume, distance, energy,
verify.  All I/O is JSON with round-trip-safe number formatting; exit
codes are 0 (success), 1 (bad input), 2 (solver did not converge).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import barycenter, geometry, regions, verify
from . import quaternions as q
from .errors import QhbError


def load_point_set(path: str) -> barycenter.WeightedPoints:
    """Read {"dimension": n, "points": [{"coords": [[w,x,y,z],...], "weight": w}]}.

    Every coordinate vector must satisfy |coords| < 1 - 1e-12; weights
    default to 1.0 and must be positive.  Errors name the offending index.
    """
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    try:
        n = int(obj["dimension"])
        entries = obj["points"]
    except (KeyError, TypeError) as exc:
        raise QhbError(f"point set file needs 'dimension' and 'points': {exc}") from None
    if n < 1:
        raise QhbError(f"dimension must be >= 1, got {n}")
    if not entries:
        raise barycenter.EmptyData("no points in input")
    pts = np.zeros((len(entries), n, 4))
    wts = np.zeros(len(entries))
    for i, entry in enumerate(entries):
        try:
            coords = q.hvector_from_json(entry["coords"])
        except (KeyError, TypeError) as exc:
            raise QhbError(f"point {i}: missing or malformed coords ({exc})") from None
        if coords.shape[0] != n:
            raise QhbError(f"point {i}: has dimension {coords.shape[0]}, expected {n}")
        nm = float(q.vnorm(coords))
        if nm >= 1.0 - barycenter.BOUNDARY_MARGIN:
            raise QhbError(f"point {i}: |coords| = {nm:.17g} is not inside the unit ball")
        w = float(entry.get("weight", 1.0))
        if w <= 0.0:
            raise QhbError(f"point {i}: weight must be positive, got {w:.17g}")
        pts[i] = coords
        wts[i] = w
    return barycenter.WeightedPoints(points=pts, weights=wts)


def parse_point(text: str, n: int | None = None) -> np.ndarray:
    """Parse a point: a number (real quaternion, n=1), a [w,x,y,z] array
    (n=1), or an array of such arrays."""
    v = json.loads(text)
    if isinstance(v, (int, float)):
        arr = np.array([[float(v), 0.0, 0.0, 0.0]])
    else:
        arr = np.asarray(v, dtype=float)
        if arr.ndim == 1 and arr.shape == (4,):
            arr = arr[None, :]
        elif arr.ndim != 2 or arr.shape[-1] != 4:
            raise QhbError(f"cannot read a point from {text!r}")
    if n is not None and arr.shape[0] != n:
        raise QhbError(f"point has dimension {arr.shape[0]}, expected {n}")
    return arr


def _solver_config(args) -> barycenter.SolverConfig:
    return barycenter.SolverConfig(
        step=args.step, max_iters=args.max_iters, tol=args.tol,
        line_search=not args.no_line_search,
    )


def _config_echo(cfg: barycenter.SolverConfig) -> dict:
    return {"step": cfg.step, "max_iters": cfg.max_iters, "tol": cfg.tol,
            "line_search": cfg.line_search}


def _result_fields(res: barycenter.SolverResult) -> dict:
    return {
        "barycenter": q.to_lists(res.barycenter),
        "residual_norm": res.residual_norm,
        "energy": res.energy,
        "iterations": res.iterations,
        "converged": res.converged,
    }


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2))


def cmd_barycenter(args) -> int:
    data = load_point_set(args.input)
    cfg = _solver_config(args)
    res = barycenter.solve(data, cfg)
    payload = {"dimension": data.n}
    payload.update(_result_fields(res))
    payload["config"] = _config_echo(cfg)
    _emit(payload)
    return 0 if res.converged else 2


def cmd_region_barycenter(args) -> int:
    if args.samples < 1:
        raise QhbError("--samples must be >= 1")
    with open(args.region, encoding="utf-8") as fh:
        spec = regions.region_from_json(json.load(fh))
    cfg = _solver_config(args)
    rr = regions.region_barycenter(spec, args.samples, args.seed, cfg)
    ss = rr.sample_set
    payload = {"dimension": spec.n}
    payload.update(_result_fields(rr.result))
    payload.update({
        "total_mass_estimate": ss.total_mass_estimate,
        "standard_error": ss.standard_error,
        "moment_estimate": ss.moment_estimate,
        "moment_standard_error": ss.moment_standard_error,
        "barycenter_standard_error": rr.barycenter_standard_error,
        "samples_requested": ss.count_requested,
        "samples_accepted": ss.count_accepted,
        "seed": ss.seed,
        "config": _config_echo(cfg),
    })
    _emit(payload)
    return 0 if rr.result.converged else 2


def cmd_volume(args) -> int:
    print(f"{float(geometry.ball_volume(args.rho, args.dim)):.17g}")
    return 0


def cmd_distance(args) -> int:
    p = parse_point(args.p)
    y = parse_point(args.q, n=p.shape[0])
    print(f"{float(geometry.distance(p, y)):.17g}")
    return 0


def cmd_energy(args) -> int:
    data = load_point_set(args.input)
    x = parse_point(args.at, n=data.n)
    print(f"{barycenter.energy(data, x):.17g}")
    return 0


def cmd_verify(args) -> int:
    if args.trials <= 0:
        print("warning: --trials 0 runs no checks (vacuous pass)", file=sys.stderr)
        results = []
    else:
        results = verify.run_all(args.seed, args.trials)
    for r in results:
        status = "pass" if r.passed else "FAIL"
        note = f"  [{r.note}]" if r.note else ""
        print(f"{r.name:34s} trials={r.trials:>6d} max_error={r.max_error: .3e} "
              f"tol={r.tolerance:.1e} {status}{note}")
    ok = all(r.passed for r in results)
    print(f"{len(results)} checks, {sum(r.passed for r in results)} passed "
          f"(seed={args.seed}, trials={args.trials})")
    if args.json:
        report = {
            "seed": args.seed,
            "trials": args.trials,
            "all_passed": ok,
            "checks": [
                {"name": r.name, "trials": r.trials, "max_error": r.max_error,
                 "tolerance": r.tolerance, "passed": r.passed}
                for r in results
            ],
        }
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
    return 0 if ok else 1


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--step", type=float, default=1.0, help="chart step in (0,1]")
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-12,
                   help="residual norm per unit weight")
    p.add_argument("--no-line-search", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qhb",
        description="Conformal barycenters in the quaternionic hyperbolic ball.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("barycenter", help="barycenter of a weighted point set file")
    p.add_argument("input", help="point set JSON file")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_barycenter)

    p = sub.add_parser("region-barycenter", help="barycenter of a sampled region")
    p.add_argument("region", help="region JSON file")
    p.add_argument("--samples", type=int, required=True, help="number of MC proposals")
    p.add_argument("--seed", type=int, default=0)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_region_barycenter)

    p = sub.add_parser("volume", help="volume of a metric ball")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.set_defaults(func=cmd_volume)

    p = sub.add_parser("distance", help="distance between two points")
    p.add_argument("p")
    p.add_argument("q")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("energy", help="energy of a point set at a probe point")
    p.add_argument("input", help="point set JSON file")
    p.add_argument("--at", required=True, help="probe point (JSON)")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("verify", help="run the geometric identity checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--json", help="also write a machine-readable report here")
    p.set_defaults(func=cmd_verify)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except QhbError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
