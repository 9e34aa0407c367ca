"""Command-line front end: ``edslab analyze | billiard | dynamics``.

Exit codes: 0 success, 1 failed check or internal inconsistency, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Optional

import numpy as np

from edslab import billiard as bl
from edslab import dynamics as dyn
from edslab import kernels, systems
from edslab.eds import (INTEGRAL_TOL, cartan_survey, cartan_test, find_integral_elements,
                        integral_residual)
from edslab.errors import (DomainError, EDSError, InputError, NumericalInconsistencyError,
                           SolverError)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

SYSTEMS = {
    "jets": (None, lambda n: systems.jet_maps_system()),
    "cauchy-riemann": (None, lambda n: systems.cauchy_riemann_system()),
    "lagrangian": (1, systems.lagrangian_system),
    "special-lagrangian": (2, systems.special_lagrangian_system),
    "associative": (None, lambda n: systems.associative_system()),
    "billiard": (3, bl.billiard_system),
}

BILLIARD_CHECKS = ("structure", "lemma", "family", "no3d", "triangle")
TRIANGLE_SWEEP = 100


def default_seed() -> int:
    raw = os.environ.get("EDS_LAB_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"EDS_LAB_SEED must be an integer, got {raw!r}")


def _report(system: str, n, seed: int) -> dict:
    return {
        "system": system, "n": n, "seed": seed, "point": None, "c": None, "sum_c": None,
        "codim": None, "involutive": None, "characters": None, "k0": None, "generality": None,
        "checks": {}, "diagnostics": {"backend": kernels.BACKEND},
    }


def _check(report: dict, name: str, passed: bool, value, tolerance) -> None:
    report["checks"][name] = {"pass": bool(passed), "value": value, "tolerance": tolerance}


def _fill_cartan(report: dict, cr) -> None:
    d = cr.as_dict()
    for key in ("c", "sum_c", "codim", "involutive", "characters", "k0", "generality"):
        report[key] = d[key]


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


# ---------------------------------------------------------------- analyze


def run_analyze(system: str, n: Optional[int], seed: int, tol: Optional[float] = None,
                samples: int = 5, h: Optional[float] = None) -> dict:
    if system not in SYSTEMS:
        raise InputError(f"unknown system {system!r}; choose from {', '.join(SYSTEMS)}")
    if samples < 1:
        raise InputError("--samples must be at least 1")
    nmin, build = SYSTEMS[system]
    if nmin is None:
        if n is not None:
            raise InputError(f"system {system!r} does not take --n")
    elif n is None:
        raise InputError(f"system {system!r} requires --n")
    elif n < nmin:
        raise InputError(f"system {system!r} needs n >= {nmin}")
    eds = build(n) if system != "billiard" else bl.billiard_system(n, h=h)
    report = _report(system, n, seed)
    survey = cartan_survey(eds, samples=samples, seed=seed)
    first = survey.reports[0]
    _fill_cartan(report, first)
    report["point"] = survey.points[0]
    itol = INTEGRAL_TOL if tol is None else tol
    sigs = sorted({(tuple(r.c), r.codim) for r in survey.reports})
    _check(report, "agreement", survey.agree, len(sigs), 1)
    _check(report, "cartan_inequality", all(r.sum_c <= r.codim for r in survey.reports),
           max(r.sum_c - r.codim for r in survey.reports), 0)
    report["diagnostics"].update({
        "samples": [{"c": r.c, "codim": r.codim, "tight_margin": r.diagnostics["tight_margin"]}
                    for r in survey.reports],
        "tight_margin": any(r.diagnostics["tight_margin"] for r in survey.reports),
        "rank_rtol": first.diagnostics["rank_rtol"],
        "integral_tol": itol,
        "fd_step": h,
    })
    if not survey.agree:
        raise NumericalInconsistencyError(f"integer data disagree across samples: {sigs}")
    return report


# ---------------------------------------------------------------- billiard


def _parse_checks(text: Optional[str], n: int) -> list:
    if text is None:
        return ["structure", "family", "no3d", "triangle"] if n == 3 else ["structure", "lemma", "family", "no3d"]
    checks = [c.strip() for c in text.split(",") if c.strip()]
    bad = [c for c in checks if c not in BILLIARD_CHECKS]
    if bad or not checks:
        raise InputError(f"unknown checks {bad}; choose from {', '.join(BILLIARD_CHECKS)}")
    if "triangle" in checks and n != 3:
        raise InputError("the triangle check applies to n = 3 only")
    if "lemma" in checks and n == 3:
        raise InputError("the lemma check needs the n >= 4 family")
    return list(dict.fromkeys(checks))


def triangle_sweep(seed: int, count: int = TRIANGLE_SWEEP) -> list:
    """Seeded admissible (alpha1, alpha2, l1) triples for the n = 3 obstruction."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        a1, a2 = rng.uniform(0.05, np.pi / 2 - 0.05, size=2)
        if a1 + a2 < np.pi / 2 - 0.05:
            out.append((float(a1), float(a2), float(rng.uniform(0.5, 2.0))))
    return out


def run_billiard(n: int, seed: int, checks: Optional[str] = None, tol: Optional[float] = None,
                 samples: int = 5, h: Optional[float] = None) -> dict:
    if n is None or n < 3:
        raise InputError("billiard needs --n >= 3")
    if samples < 1:
        raise InputError("--samples must be at least 1")
    chosen = _parse_checks(checks, n)
    eds = bl.billiard_system(n, h=h)
    report = _report("billiard", n, seed)
    children = np.random.SeedSequence(seed).spawn(samples + 1)
    points = [bl.random_admissible(n, np.random.default_rng(c)) for c in children[:samples]]
    rng = np.random.default_rng(children[-1])
    p = points[0]
    report["point"] = p
    elem = bl.general_family_member(eds, p, rng).basis
    _fill_cartan(report, cartan_test(eds, p, elem, seed=seed))
    diag = report["diagnostics"]
    diag["fd_step"] = h if h is not None else eds.chart.step(p)

    if "structure" in chosen:
        t = 1e-5 if tol is None else tol
        worst = max(bl.structure_residual(eds, q) for q in points)
        _check(report, "structure", worst < t, worst, t)

    if "lemma" in chosen:
        members = [bl.integral_family(eds, p, rng.uniform(-1.5, 1.5, size=n - 3)) for _ in range(20)]
        ok = [bl.genericity_propagation(eds, p, m.basis) for m in members]
        least = min(float(np.min(bl.edge_products(p, m.basis))) for m in members)
        _check(report, "lemma", all(ok), least, bl.GENERIC_TOL)

    if "family" in chosen:
        if n == 3:
            found = find_integral_elements(bl.triangle_system(), p, seed=seed, trials=20)
            _check(report, "family", found.empty, 0 if found.empty else len(found.samples), 0)
            diag["family"] = {"message": found.message}
        else:
            member = bl.integral_family(eds, p, rng.uniform(-1.5, 1.5, size=n - 3))
            res = integral_residual(eds, p, member.basis)
            rank, count = bl.family_constraint_rank(eds, p)
            search = find_integral_elements(eds, p, seed=seed, trials=10, keep=5)
            dim = search.local_dimension
            itol = INTEGRAL_TOL if tol is None else tol
            passed = dim == n - 3 and rank == n - 1 and res < itol and search.consistent
            _check(report, "family", passed, dim, n - 3)
            diag["family"] = {"explicit_parameters": n - 3, "constraint_rank": rank,
                              "constraints": count, "member_residual": res,
                              "chain_residual": member.chain_residual, "search": search.message}

    if "no3d" in chosen:
        res = bl.no_3d_integral_elements(eds, p, seed=seed)
        _check(report, "no3d", res.verdict == "none", res.verdict, "none")
        diag["no3d"] = res.as_dict()

    if "triangle" in chosen:
        rows = [bl.triangle_obstruction(*args, h=h) for args in triangle_sweep(seed)]
        t = 1e-4 if tol is None else tol
        least = min(abs(r.torsion) for r in rows)
        rel = max(r.relative_error for r in rows)
        _check(report, "triangle_nonvanishing", least > 1e-6, least, 1e-6)
        _check(report, "triangle_closed_form", rel < t, rel, t)
        diag["triangle"] = {"sweep": len(rows),
                            "max_theta_on_element": max(r.theta_on_element for r in rows)}
    return report


# ---------------------------------------------------------------- dynamics


def run_dynamics(curve: str, n: int, q: int, seed: int, r: Optional[float] = None,
                 a: Optional[float] = None, b: Optional[float] = None,
                 tol: Optional[float] = None, h: Optional[float] = None) -> dict:
    if curve == "circle":
        if a is not None or b is not None:
            raise InputError("a circle takes --r, not --a/--b")
        cv = dyn.ConvexCurve.circle(1.0 if r is None else r)
        default_tol = 1e-6
    elif curve == "ellipse":
        if a is None or b is None:
            raise InputError("an ellipse needs --a and --b")
        cv = dyn.ConvexCurve.ellipse(a, b)
        default_tol = 1e-5
    else:
        raise InputError(f"unknown curve {curve!r}")
    delta = 1e-4 if h is None else h
    report = _report(f"dynamics:{cv.kind}", n, seed)
    orbit = dyn.find_periodic(cv, n, q, seed=seed)
    report["point"] = orbit.config()
    path = dyn.family_path(orbit)
    rich = dyn.richardson_check(path, delta)
    t = default_tol if tol is None else tol
    _check(report, "closure", orbit.closure_residual < dyn.CLOSE_TOL, orbit.closure_residual, dyn.CLOSE_TOL)
    _check(report, "tangency", rich.coarse < t, rich.coarse, t)
    _check(report, "richardson", rich.ok, rich.ratio, 4.0)
    report["diagnostics"].update({
        "curve": {"a": cv.a, "b": cv.b}, "q": q, "delta": delta,
        "tangency_half_delta": rich.fine,
        "richardson_at_floor": rich.coarse < dyn.RICHARDSON_FLOOR and rich.fine < dyn.RICHARDSON_FLOOR, "simulated_drift": orbit.simulated_drift,
        "vertex_parameters": orbit.t,
    })
    return report


# ---------------------------------------------------------------- rendering


def render_text(report: dict) -> str:
    lines = [f"system: {report['system']}"]
    for key in ("n", "seed", "c", "sum_c", "codim", "involutive", "characters", "k0", "generality"):
        if report.get(key) is not None:
            lines.append(f"{key}: {report[key]}")
    for name, chk in report["checks"].items():
        tag = "PASS" if chk["pass"] else "FAIL"
        lines.append(f"[{tag}] {name}: value={chk['value']} tolerance={chk['tolerance']}")
    no3d = report["diagnostics"].get("no3d")
    if no3d:
        lines.append("cascade certificate:")
        for k, order in enumerate(no3d["forcing_order"]):
            lines.append(f"  element {k + 1}: " + ", ".join(f"f{v} <- {src}" if isinstance(v, int)
                                                            else f"{v} = {src:.3g}" for v, src in order))
    if report["diagnostics"].get("tight_margin"):
        lines.append("warning: a singular value sits near the rank threshold")
    return "\n".join(lines)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="text")
    common.add_argument("--seed", type=int, default=None, help="default 0, or $EDS_LAB_SEED")
    common.add_argument("--tol", type=float, default=None, help="override the check tolerance")
    common.add_argument("--samples", type=int, default=5)
    common.add_argument("--h", type=float, default=None, help="finite-difference step override")

    parser = argparse.ArgumentParser(prog="edslab", description="Cartan's test workbench")
    sub = parser.add_subparsers(dest="command", required=True)
    pa = sub.add_parser("analyze", parents=[common], help="Cartan's test on a built-in system")
    pa.add_argument("--system", required=True)
    pa.add_argument("--n", type=int, default=None)
    pb = sub.add_parser("billiard", parents=[common], help="billiard-system checks")
    pb.add_argument("--n", type=int, required=True)
    pb.add_argument("--checks", default=None, help=f"comma list from {','.join(BILLIARD_CHECKS)}")
    pd = sub.add_parser("dynamics", parents=[common], help="periodic-orbit family tangency")
    pd.add_argument("--curve", choices=("circle", "ellipse"), required=True)
    pd.add_argument("--r", type=float, default=None)
    pd.add_argument("--a", type=float, default=None)
    pd.add_argument("--b", type=float, default=None)
    pd.add_argument("--n", type=int, required=True)
    pd.add_argument("--q", type=int, required=True)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    report = None
    try:
        seed = default_seed() if args.seed is None else args.seed
        if args.h is not None and not args.h > 0:
            raise InputError("--h must be positive")
        if args.tol is not None and not args.tol > 0:
            raise InputError("--tol must be positive")
        if args.command == "analyze":
            report = run_analyze(args.system, args.n, seed, args.tol, args.samples, args.h)
        elif args.command == "billiard":
            report = run_billiard(args.n, seed, args.checks, args.tol, args.samples, args.h)
        else:
            report = run_dynamics(args.curve, args.n, args.q, seed, args.r, args.a, args.b,
                                  args.tol, args.h)
    except (InputError, DomainError) as exc:
        print(f"edslab: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalInconsistencyError, SolverError) as exc:
        print(f"edslab: {exc}", file=sys.stderr)
        diag = getattr(exc, "diagnostics", None)
        if diag:
            print(json.dumps(_jsonable(diag), sort_keys=True), file=sys.stderr)
        return EXIT_FAIL
    except EDSError as exc:
        print(f"edslab: {exc}", file=sys.stderr)
        return EXIT_FAIL
    report = _jsonable(report)
    if args.format == "json":
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print(render_text(report))
    return EXIT_OK if all(c["pass"] for c in report["checks"].values()) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
