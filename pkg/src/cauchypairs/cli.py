"""Command-line front end: config ingestion, dispatch, and report emission.

Usage: cauchypairs <config.json> [--json] [--tolerance X] [--exact]

The config is a single JSON document with a "mode" key selecting the
operation; unknown keys are rejected.  Exit codes: 0 all requested checks
passed, 2 invalid configuration, 3 a check failed, 4 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__, classifier, coordinate_fields as cf, flow
from . import frame_core as fc
from . import spacetime_verifier as sv
from .errors import CauchyPairsError, CheckFailed, ConfigInvalid
from .frame_core import DEFAULT_TOL, ShapeOperator

MODES = (
    "verify-pair",
    "classify",
    "curvature",
    "flow-diag",
    "flow-pp",
    "verify-spacetime",
    "reproduce",
)

THETA_KEYS = ("uu", "ul", "un", "ll", "ln", "nn")


def _fail(msg: str):
    raise ConfigInvalid(msg)


def _check_keys(block: dict, allowed, where: str):
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        _fail(f"unknown keys {unknown} in {where}")


def _number(value, exact: bool):
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(f"expected a number, got {value!r}")
    if exact:
        return Fraction(value).limit_denominator(10**12) if isinstance(value, float) \
            else Fraction(value)
    return value


def _theta_from(block: dict, exact: bool) -> ShapeOperator:
    _check_keys(block, THETA_KEYS, "theta block")
    comps = {k: _number(block.get(k, 0), exact) for k in THETA_KEYS}
    return ShapeOperator.from_components(**comps)


def _fmt(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (bool, str, int, type(None))):
        return x
    if isinstance(x, float):
        return float(f"{x:.12e}")
    if isinstance(x, (list, tuple)):
        return [_fmt(v) for v in x]
    if isinstance(x, dict):
        return {k: _fmt(v) for k, v in x.items()}
    if isinstance(x, np.ndarray):
        return _fmt(x.tolist())
    if isinstance(x, (np.floating, np.integer)):
        return _fmt(float(x))
    return str(x)


# ---------------------------------------------------------------------------
# named profile functions for family parameters
# ---------------------------------------------------------------------------


def make_profile(spec: dict):
    """Build a two-argument profile function from a named description.

    kinds: "const" (value), "affine" (w1*s + w2), "exp_affine"
    (w1*exp(rate*s) + w2), "exp" (exp(rate*s)).  Optional w1_y / w2_y add a
    linear dependence w_i + w_i_y * y on the second argument.
    """
    _check_keys(
        spec, ("kind", "value", "w1", "w2", "rate", "w1_y", "w2_y"), "profile"
    )
    kind = spec.get("kind")
    w1 = spec.get("w1", 1.0)
    w2 = spec.get("w2", 0.0)
    w1y = spec.get("w1_y", 0.0)
    w2y = spec.get("w2_y", 0.0)
    rate = spec.get("rate", 1.0)
    if kind == "const":
        value = spec.get("value", 1.0)
        return lambda s, y: value + 0.0 * s
    if kind == "affine":
        return lambda s, y: (w1 + w1y * y) * s + (w2 + w2y * y)
    if kind == "exp_affine":
        return lambda s, y: (w1 + w1y * y) * np.exp(rate * s) + (w2 + w2y * y)
    if kind == "exp":
        return lambda s, y: np.exp(rate * s)
    _fail(f"unknown profile kind {kind!r}")


def make_scalar_function(spec: dict):
    """One-argument named function: "const", "affine" or "exp"."""
    _check_keys(spec, ("kind", "value", "w1", "w2", "rate"), "scalar function")
    kind = spec.get("kind")
    if kind == "const":
        value = spec.get("value", 1.0)
        return lambda x: value + 0.0 * np.asarray(x, dtype=float)
    if kind == "affine":
        w1, w2 = spec.get("w1", 1.0), spec.get("w2", 0.0)
        return lambda x: w1 * np.asarray(x, dtype=float) + w2
    if kind == "exp":
        rate = spec.get("rate", 1.0)
        return lambda x: np.exp(rate * np.asarray(x, dtype=float))
    _fail(f"unknown scalar function kind {kind!r}")


# ---------------------------------------------------------------------------
# mode handlers: each returns (body dict, passed bool)
# ---------------------------------------------------------------------------


def _run_verify_pair(cfg, tol, exact):
    _check_keys(cfg, ("mode", "theta", "tolerance"), "config")
    theta = _theta_from(cfg.get("theta", {}), exact)
    i1, i2 = fc.integrability_residual(theta)
    coh = fc.cohomology_residual(theta)
    ric, asym = fc.ricci_frame(theta)
    body = {
        "integrability_residual": [i1, i2],
        "cohomology_residual": coh,
        "is_cauchy": fc.is_cauchy(theta, tol),
        "is_unimodular": fc.is_unimodular(theta, tol),
        "scalar_curvature": fc.scalar_curvature(theta),
        "ricci": [list(r) for r in ric],
        "ricci_asymmetry": asym,
        "hamiltonian_residual": fc.hamiltonian_residual(theta),
        "momentum_residual": list(fc.momentum_residual(theta)),
        "constrained_ricci_flat_residual": fc.constrained_ricci_flat_residual(theta),
        "codazzi": fc.codazzi_predicate(theta, tol),
        "codazzi_by_conditions": fc.codazzi_predicate_conditions(theta, tol),
    }
    return body, bool(body["is_cauchy"])


def _run_classify(cfg, tol, exact):
    _check_keys(cfg, ("mode", "theta", "tolerance"), "config")
    theta = _theta_from(cfg.get("theta", {}), exact)
    group, change = classifier.classify(theta, tol)
    residual = classifier.normal_form_verify(theta, change)
    body = {
        "group": group.tag,
        "mu": group.mu,
        "change_case": change.case,
        "change_matrix": [list(r) for r in np.asarray(change.matrix, dtype=float)],
        "normal_form_residual": residual,
    }
    return body, True


def _run_curvature(cfg, tol, exact):
    _check_keys(cfg, ("mode", "theta", "tolerance"), "config")
    theta = _theta_from(cfg.get("theta", {}), exact)
    ric, asym = fc.ricci_frame(theta)
    body = {
        "ricci": [list(r) for r in ric],
        "ricci_asymmetry": asym,
        "scalar_curvature": fc.scalar_curvature(theta),
        "hamiltonian_residual": fc.hamiltonian_residual(theta),
        "momentum_residual": list(fc.momentum_residual(theta)),
    }
    return body, True


def _family_from(cfg):
    _check_keys(
        cfg,
        ("mode", "family", "interval", "box", "n", "threshold", "tolerance"),
        "config",
    )
    fam_cfg = cfg.get("family", {})
    _check_keys(fam_cfg, ("case", "a", "b", "Ll", "Ln"), "family block")
    case = fam_cfg.get("case")
    if case not in ("B_nonzero", "B_zero"):
        _fail(f"family case must be B_nonzero or B_zero, got {case!r}")
    a_raw = fam_cfg.get("a", 1.0)
    a = make_scalar_function(a_raw) if isinstance(a_raw, dict) else float(a_raw)
    b = float(fam_cfg.get("b", 0.0))
    ll = make_profile(fam_cfg.get("Ll", {"kind": "const", "value": 1.0}))
    ln = make_profile(fam_cfg.get("Ln", {"kind": "const", "value": 1.0}))
    fam = flow.DiagonalFamily(case=case, a=a, b=b, Ll=ll, Ln=ln)
    interval = tuple(cfg.get("interval", (0.0, 1.0)))
    box = tuple(tuple(ab) for ab in cfg.get("box", ((0, 1), (0, 1), (0, 1))))
    n = cfg.get("n", 17)
    return fam, interval, box, n


def _run_flow_diag(cfg, tol, exact):
    fam, interval, box, n = _family_from(cfg)
    threshold = float(cfg.get("threshold", 1e-6))
    sol = flow.diagonal_solution(fam, interval, box, n)
    report = flow.comoving_residual(sol)
    rf = flow.diagonal_ricci_flat_residual(fam, interval, box, n)
    body = {
        "comoving_residual": report,
        "ricci_flat_residual_max": float(rf[2:-2, 2:-2].max()),
        "primitive_error_estimate": sol.meta["primitive_error_estimate"],
    }
    return body, report["max"] <= threshold


def _run_flow_pp(cfg, tol, exact):
    _check_keys(
        cfg, ("mode", "pp", "box", "n", "threshold", "tolerance"), "config"
    )
    pp_cfg = cfg.get("pp", {})
    _check_keys(pp_cfg, ("a_l", "b_l", "a_n", "b_n", "c"), "pp block")
    data = flow.PPWaveData.log_solution(
        a_l=float(pp_cfg.get("a_l", 0.0)),
        b_l=float(pp_cfg.get("b_l", -1.0)),
        a_n=float(pp_cfg.get("a_n", 0.0)),
        b_n=float(pp_cfg.get("b_n", 1.0)),
        c=float(pp_cfg.get("c", 0.0)),
    )
    box = tuple(tuple(ab) for ab in cfg.get(
        "box", ((-0.3, 0.3), (0, 1), (0, 1), (0, 1))
    ))
    n = cfg.get("n", (33, 5, 5, 5))
    threshold = float(cfg.get("threshold", 1e-6))
    g = flow.pp_metric(data, box, n)
    n0 = n if np.isscalar(n) else n[0]
    xp = np.linspace(box[0][0], box[0][1], n0)
    r_l, r_n = flow.pp_ricci_residual(data, xp)
    ric = sv.ricci4_fd(g)
    pw = flow.plane_wave_check(g, tol=threshold)
    body = {
        "ode_residual_max": [float(np.abs(r_l).max()), float(np.abs(r_n).max())],
        "ricci4_max": sv.interior_max4(ric),
        "plane_wave": pw,
    }
    passed = (
        max(body["ode_residual_max"]) <= threshold
        and body["ricci4_max"] <= threshold
        and pw["passed"]
    )
    return body, passed


def _run_verify_spacetime(cfg, tol, exact):
    _check_keys(
        cfg, ("mode", "metric", "pair", "box", "n", "threshold", "tolerance"),
        "config",
    )
    metric_cfg = cfg.get("metric", {})
    _check_keys(metric_cfg, ("kind", "a", "b"), "metric block")
    kind = metric_cfg.get("kind", "minkowski")
    box = tuple(tuple(ab) for ab in cfg.get(
        "box", ((0, 1), (0, 1), (0, 1), (0, 1))
    ))
    n = cfg.get("n", 9)
    if kind == "minkowski":
        g = sv.Metric4Grid.from_metric_function(
            box, n, lambda t, x, y, z: np.broadcast_to(
                np.diag([-1.0, 1, 1, 1]), t.shape + (4, 4)
            )
        )
    elif kind == "milne":
        a = float(metric_cfg.get("a", 1.0))
        b = float(metric_cfg.get("b", 1.0))

        def gfun(t, x, y, z):
            out = np.zeros(t.shape + (4, 4))
            out[..., 0, 0] = -1.0
            out[..., 1, 1] = (a + b * t) ** 2
            out[..., 2, 2] = 1.0
            out[..., 3, 3] = 1.0
            return out

        g = sv.Metric4Grid.from_metric_function(box, n, gfun)
    else:
        _fail(f"unknown metric kind {kind!r}")
    pair_cfg = cfg.get("pair", {})
    _check_keys(pair_cfg, ("u", "l"), "pair block")
    u_const = np.array(pair_cfg.get("u", [1, 1, 0, 0]), dtype=float)
    l_const = np.array(pair_cfg.get("l", [0, 0, 1, 0]), dtype=float)
    u = np.broadcast_to(u_const, g.shape + (4,)).copy()
    l = np.broadcast_to(l_const, g.shape + (4,)).copy()
    pair = sv.ParabolicPairData(g, u, l, tol=max(tol, 1e-9))
    threshold = float(cfg.get("threshold", 1e-6))
    nab_u, nab_l, kappa = sv.parallel_pair_residual(g, pair)
    body = {
        "nabla_u_max": nab_u,
        "nabla_l_residual_max": nab_l,
        "kappa_max": float(np.abs(kappa).max()),
    }
    return body, nab_u <= threshold and nab_l <= threshold


# ---------------------------------------------------------------------------
# reproduce fixtures
# ---------------------------------------------------------------------------


def _fixture_tau3mu(tol):
    rows = []
    ok = True
    for mu in (Fraction(1, 2), Fraction(1, 1)):
        theta = ShapeOperator.diagonal(1, mu, 1)
        r = fc.scalar_curvature(theta)
        ham = fc.hamiltonian_residual(theta)
        expect_r = -2 * (1 + mu + mu * mu)
        rows.append({
            "mu": str(mu),
            "scalar_curvature": str(r),
            "expected": str(expect_r),
            "hamiltonian_residual": str(ham),
        })
        ok = ok and r == expect_r and (ham == 0) == (mu == 1)
    return {"cases": rows}, ok


def _fixture_table(tol):
    samples = [
        ("r3", {"uu": 5.0}, "cauchy"),
        ("e11", {"a": 1.0, "b": 0.5, "uu": 0.3}, "cauchy"),
        ("t2r_shear", {"ul": 1.0, "un": 2.0}, "cauchy"),
        ("t2r_block", {"T": 1.5, "angle": 0.7, "uu": 0.2}, "cauchy"),
        ("t2r_block", {"T": 1.5, "angle": 0.7}, "crf"),
        ("t2r_block", {"T": 1.5, "angle": 0.7}, "codazzi"),
        ("t2r_mixed_l", {"ul": 1.0, "ll": 2.0}, "cauchy"),
        ("t2r_mixed_n", {"un": 1.0, "nn": -1.5}, "cauchy"),
        ("t2r_full", {"ul": 1.0, "un": 2.0, "ln": 0.5}, "cauchy"),
        ("tau3", {"ll": 2.0, "ln": 0.5, "nn": 1.0, "uu": 0.4}, "cauchy"),
        ("tau3", {"ll": 2.0, "ln": 0.5, "nn": 1.0}, "crf"),
    ]
    rows = []
    ok = True
    for row, params, variant in samples:
        fam = classifier.enumerate_family(row, params, variant)
        group, change = classifier.classify(fam.theta)
        residual = classifier.normal_form_verify(fam.theta, change)
        entry = {
            "row": row,
            "variant": variant,
            "group": group.tag,
            "expected_group": classifier.ROW_GROUP[row],
            "normal_form_residual": residual,
            "flags": fam.flags,
            "expected_flags": fam.expected,
            "mismatches": list(fam.mismatches),
        }
        rows.append(entry)
        ok = ok and group.tag == classifier.ROW_GROUP[row]
        ok = ok and residual < 1e-10 and not fam.mismatches
    return {"rows": rows}, ok


def _fixture_diag(case, tol):
    if case == 1:
        fam = flow.DiagonalFamily(
            case="B_nonzero", a=1.0, b=1.0,
            Ll=lambda s, y: 1.0 + 0.0 * s, Ln=lambda s, z: 1.0 + 0.0 * s,
        )
        interval, box = (0.0, 0.05), ((0, 0.05), (0, 0.05), (0, 0.05))
    else:
        fam = flow.DiagonalFamily(
            case="B_zero", a=lambda x: 1.0, b=0.0,
            Ll=lambda s, y: np.exp(s), Ln=lambda s, z: 1.0 + 0.0 * s,
            a_primitive=lambda x: x,
        )
        interval, box = (0.0, 0.01), ((0, 0.01), (0, 0.01), (0, 0.01))
    sol = flow.diagonal_solution(fam, interval, box, 17)
    report = flow.comoving_residual(sol)
    return {"comoving_residual": report}, report["max"] <= 1e-6


def _fixture_ppwave(tol):
    data = flow.PPWaveData.log_solution(0.0, -1.0, 0.0, 1.0, c=0.3)
    box = ((-0.01, 0.01), (0, 1), (0, 1), (0, 1))
    g = flow.pp_metric(data, box, (33, 5, 5, 5))
    xp = np.linspace(box[0][0], box[0][1], 33)
    r_l, r_n = flow.pp_ricci_residual(data, xp)
    ric = sv.ricci4_fd(g)
    pw = flow.plane_wave_check(g, tol=1e-6)
    body = {
        "ode_residual_max": [float(np.abs(r_l).max()), float(np.abs(r_n).max())],
        "ricci4_max": sv.interior_max4(ric),
        "plane_wave": pw,
    }
    ok = max(body["ode_residual_max"]) == 0.0 and body["ricci4_max"] <= 1e-6 \
        and pw["passed"]
    return body, ok


def _fixture_universal(tol):
    grid = cf.FieldGrid.from_function(
        ((0, 0.02), (0, 0.02), (0, 0.02)), 33, lambda x, y, z: 0.0 * x
    )
    F = cf.warped_F_for_ricci_flat(lambda x: x, grid)
    data = cf.UniversalCoverData(
        grid, hx=lambda x: np.exp(2 * x) * np.eye(2), F=lambda x: -1.0
    )
    theta = cf.build_universal_theta(data)
    coframe = data.coframe_grid()
    report = cf.constraint_residual_fd(coframe, theta)
    body = {
        "warped_F_sample": float(F[0]),
        "constraint_residual": report,
        "mixed_residual": data.mixed_residual,
    }
    ok = abs(float(F[0]) + 1.0) <= 1e-6 and report["max"] <= 1e-6
    return body, ok


def _run_reproduce(cfg, tol, exact):
    _check_keys(cfg, ("mode", "fixture", "tolerance"), "config")
    fixture = cfg.get("fixture")
    table = {
        "tau3mu": lambda: _fixture_tau3mu(tol),
        "table": lambda: _fixture_table(tol),
        "diag1": lambda: _fixture_diag(1, tol),
        "diag2": lambda: _fixture_diag(2, tol),
        "ppwave": lambda: _fixture_ppwave(tol),
        "universal": lambda: _fixture_universal(tol),
    }
    if fixture not in table:
        _fail(f"unknown fixture {fixture!r}; choose from {sorted(table)}")
    body, ok = table[fixture]()
    body["fixture"] = fixture
    return body, ok


HANDLERS = {
    "verify-pair": _run_verify_pair,
    "classify": _run_classify,
    "curvature": _run_curvature,
    "flow-diag": _run_flow_diag,
    "flow-pp": _run_flow_pp,
    "verify-spacetime": _run_verify_spacetime,
    "reproduce": _run_reproduce,
}


def run(config: dict, tolerance=None, exact: bool = False) -> dict:
    """Execute one config document and return the full report."""
    if not isinstance(config, dict):
        _fail("config must be a JSON object")
    mode = config.get("mode")
    if mode not in MODES:
        _fail(f"mode must be one of {MODES}, got {mode!r}")
    tol = tolerance if tolerance is not None else config.get("tolerance", DEFAULT_TOL)
    try:
        tol = float(tol)
    except (TypeError, ValueError):
        _fail(f"tolerance must be a number, got {tol!r}")
    body, passed = HANDLERS[mode](config, tol, exact)
    report = {
        "command": {"mode": mode, "config": _fmt(config)},
        "result": _fmt(body),
        "provenance": {
            "tool": "cauchypairs",
            "version": __version__,
            "tolerance": tol,
            "exact": exact,
            "threads": os.environ.get("CAUCHYPAIRS_THREADS", ""),
        },
        "passed": bool(passed),
    }
    return report


def _render_text(report: dict) -> str:
    lines = [f"cauchypairs {report['provenance']['version']} — mode "
             f"{report['command']['mode']}"]

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k in obj:
                walk(f"{prefix}{k}.", obj[k])
        else:
            lines.append(f"  {prefix[:-1]} = {obj}")

    walk("", report["result"])
    lines.append(f"tolerance = {report['provenance']['tolerance']}")
    lines.append("PASS" if report["passed"] else "FAIL")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cauchypairs",
        description="Verification toolkit for parallel-spinor Cauchy data",
    )
    parser.add_argument("config", help="path to a JSON config document")
    parser.add_argument("--json", action="store_true", dest="as_json",
                        help="emit the machine-readable report")
    parser.add_argument("--tolerance", type=float, default=None,
                        help="override the config tolerance")
    parser.add_argument("--exact", action="store_true",
                        help="parse rational inputs exactly")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    started = time.time()
    try:
        report = run(config, tolerance=args.tolerance, exact=args.exact)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CheckFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 3
    except CauchyPairsError as exc:
        print(f"check failed: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return 4

    report_out = dict(report)
    report_out["timestamp"] = started
    if args.as_json:
        print(json.dumps(report_out, sort_keys=True))
    else:
        print(_render_text(report))
    return 0 if report["passed"] else 3


if __name__ == "__main__":
    sys.exit(main())
