"""Command-line front end.

Subcommands::

    lormin analyze    --config job.json --out DIR   per-point curvature/invariant table
    lormin verify     --config job.json --out DIR   natural-system residuals
    lormin synthesize --config job.json --out DIR   integrate a surface from (mu, nu)
    lormin null-curve --config job.json --out DIR   build + validate a null-curve chart
    lormin example    --out DIR                     end-to-end run of the bundled demo

Configs are single JSON documents (schemas in the README). Exit codes are a
stable contract: 0 success, 1 internal/runtime error, 2 config or
validation failure, 3 integrability-gate rejection, 4 residual threshold
exceeded. Identical configs produce byte-identical data files; timestamps
only ever appear in a JSON summary's metadata block.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import gallery
from .analyzer import (
    SurfaceClass,
    chart_from_expressions,
    curvature_report,
    second_form,
)
from .canonical import check_canonical, extract_frame
from .errors import (
    ConfigError,
    DomainError,
    ExpressionSyntaxError,
    LightlikeSecondFormError,
    LorminError,
    NotGeneralTypeError,
    PairValidationError,
)
from .fields import Rectangle, ScalarField, field_from_text
from .gridio import write_csv, write_json_summary, write_mesh_csv, write_residual_csv
from .natural import fields_K_kappa_from_mu_nu, residual_K_kappa, residual_mu_nu
from .neutral import frame_defect
from .nullcurves import NullCurvePair, null_curve_from_expressions, surface_from_pair, validate_pair
from .synthesis import (
    FrameState,
    GridSpec,
    integrability_defect,
    integrate_frames,
    integrate_positions,
    validate_synthesis,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_GATE = 3
EXIT_THRESHOLD = 4


# --- config plumbing ----------------------------------------------------------

def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config parse error in {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc


_MISSING = object()


def _get(cfg: dict, key: str, kind, where: str, default=_MISSING):
    if key not in cfg:
        if default is not _MISSING:
            return default
        raise ConfigError(f"missing field '{where}.{key}'")
    value = cfg[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"field '{where}.{key}' must be a number")
        return float(value)
    if kind is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"field '{where}.{key}' must be an integer")
        return value
    if not isinstance(value, kind):
        raise ConfigError(f"field '{where}.{key}' must be of type {kind.__name__}")
    return value


def _domain(cfg: dict, where: str) -> Rectangle:
    obj = _get(cfg, "domain", dict, where)
    for axis in ("u", "v"):
        rng = _get(obj, axis, list, f"{where}.domain")
        if len(rng) != 2 or not all(isinstance(x, (int, float)) for x in rng):
            raise ConfigError(f"field '{where}.domain.{axis}' must be [min, max]")
    try:
        return Rectangle(float(obj["u"][0]), float(obj["u"][1]),
                         float(obj["v"][0]), float(obj["v"][1]))
    except LorminError as exc:
        raise ConfigError(f"bad '{where}.domain': {exc}") from exc


def _grid(cfg: dict, where: str) -> GridSpec:
    obj = _get(cfg, "grid", dict, where)
    try:
        return GridSpec(
            u0=_get(obj, "u0", float, f"{where}.grid"),
            v0=_get(obj, "v0", float, f"{where}.grid"),
            h=_get(obj, "h", float, f"{where}.grid"),
            n_u=_get(obj, "n_u", int, f"{where}.grid"),
            n_v=_get(obj, "n_v", int, f"{where}.grid"),
        )
    except LorminError as exc:
        raise ConfigError(f"bad '{where}.grid': {exc}") from exc


def _epsilon(cfg: dict, where: str) -> int:
    eps = _get(cfg, "epsilon", int, where)
    if eps not in (+1, -1):
        raise ConfigError(f"field '{where}.epsilon' must be +1 or -1")
    return eps


def _field(text, domain: Rectangle, fd_step, where: str) -> ScalarField:
    if not isinstance(text, str):
        raise ConfigError(f"field '{where}' must be an expression string")
    try:
        return field_from_text(text, domain, fd_step)
    except ExpressionSyntaxError as exc:
        raise ConfigError(f"field '{where}': {exc}") from exc
    except LorminError as exc:
        raise ConfigError(f"field '{where}': {exc}") from exc


def _grid_points(spec: GridSpec) -> np.ndarray:
    U, V = np.meshgrid(spec.us, spec.vs, indexing="ij")
    return np.column_stack([U.ravel(), V.ravel()])


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_table(path_base: Path, fmt_kind: str, header, rows):
    if fmt_kind == "csv":
        write_csv(path_base.with_suffix(".csv"), header, rows)
        return str(path_base.with_suffix(".csv"))
    payload = {"columns": list(header), "rows": [[None if isinstance(c, float) and np.isnan(c)
                                                  else c for c in row] for row in rows]}
    write_json_summary(path_base.with_suffix(".json"), payload, with_timestamp=False)
    return str(path_base.with_suffix(".json"))


# --- analyze -------------------------------------------------------------------

def cmd_analyze(args) -> int:
    cfg = _load_config(args.config)
    surf_cfg = _get(cfg, "surface", dict, "config")
    comps = _get(surf_cfg, "components", list, "config.surface")
    if len(comps) != 4:
        raise ConfigError("field 'config.surface.components' must hold 4 expression strings")
    domain = _domain(surf_cfg, "config.surface")
    fd_step = _get(surf_cfg, "fd_step", float, "config.surface", None)
    try:
        chart = chart_from_expressions(comps, domain, fd_step)
    except ExpressionSyntaxError as exc:
        raise ConfigError(f"field 'config.surface.components': {exc}") from exc
    spec = _grid(cfg, "config")
    tol_deg = _get(cfg, "tol_deg", float, "config", 1e-7)

    rows = []
    histogram = {cls.value: 0 for cls in SurfaceClass}
    minimality = 0.0
    general_invariants = []
    general_f = []
    for u, v in _grid_points(spec):
        fd = second_form(chart, float(u), float(v))
        rep = curvature_report(fd, tol_deg)
        histogram[rep.surface_class.value] += 1
        minimality = max(minimality, float(np.sqrt(np.dot(rep.H_vector, rep.H_vector))))
        mu = nu = float("nan")
        eps = 0
        if rep.surface_class is SurfaceClass.GENERAL_TYPE:
            try:
                inv = extract_frame(fd)
                mu, nu, eps = inv.mu, inv.nu, inv.epsilon
                general_invariants.append(inv)
                general_f.append(fd.f)
            except (NotGeneralTypeError, LightlikeSecondFormError):
                pass  # borderline point: keep the row, leave the invariants blank
        rows.append((u, v, fd.E, fd.F, fd.G, rep.K, rep.kappa, mu, nu, eps,
                     rep.surface_class.value))

    out = _out_dir(args)
    table = _write_table(out / "analysis", args.format,
                         ["u", "v", "E", "F", "G", "K", "kappa", "mu", "nu", "epsilon", "class"],
                         rows)
    canonical = None
    if general_invariants:
        chk = check_canonical(general_invariants, general_f)
        canonical = {"is_canonical": chk.is_canonical, "constant_c": chk.constant_c,
                     "defect": chk.defect}
    write_json_summary(out / "analysis_summary.json", {
        "classification_histogram": histogram,
        "minimality_residual": minimality,
        "canonical_check": canonical,
        "table": table,
        "grid": {"u0": spec.u0, "v0": spec.v0, "h": spec.h, "n_u": spec.n_u, "n_v": spec.n_v},
    })
    return EXIT_OK


# --- verify --------------------------------------------------------------------

def cmd_verify(args) -> int:
    cfg = _load_config(args.config)
    system = _get(cfg, "system", str, "config", "mu-nu")
    fields_cfg = _get(cfg, "fields", dict, "config")
    domain = _domain(cfg, "config")
    eps = _epsilon(cfg, "config")
    fd_step = _get(cfg, "fd_step", float, "config", None)
    spec = _grid(cfg, "config")
    threshold = args.threshold if args.threshold is not None else _get(
        cfg, "threshold", float, "config", 1e-3)
    pts = _grid_points(spec)

    if system == "mu-nu":
        mu = _field(_get(fields_cfg, "mu", str, "config.fields"), domain, fd_step, "config.fields.mu")
        nu = _field(_get(fields_cfg, "nu", str, "config.fields"), domain, fd_step, "config.fields.nu")
        report = residual_mu_nu(mu, nu, eps, pts, fd_step)
    elif system == "K-kappa":
        K = _field(_get(fields_cfg, "K", str, "config.fields"), domain, fd_step, "config.fields.K")
        kap = _field(_get(fields_cfg, "kappa", str, "config.fields"), domain, fd_step,
                     "config.fields.kappa")
        report = residual_K_kappa(K, kap, eps, pts, fd_step)
    else:
        raise ConfigError("field 'config.system' must be 'mu-nu' or 'K-kappa'")

    out = _out_dir(args)
    write_residual_csv(out / "residuals.csv", report)
    passed = max(report.r1_max, report.r2_max) <= threshold
    write_json_summary(out / "verify_summary.json", {
        "system": system,
        "epsilon": eps,
        "fd_step": report.fd_step,
        "r1_max": report.r1_max,
        "r2_max": report.r2_max,
        "threshold": threshold,
        "passed": passed,
    })
    return EXIT_OK if passed else EXIT_THRESHOLD


# --- synthesize ------------------------------------------------------------------

def _initial_frame(cfg: dict, spec: GridSpec, eps: int) -> FrameState:
    obj = _get(cfg, "initial_frame", dict, "config")
    vecs = {}
    for name in ("x", "y", "n1", "n2"):
        arr = _get(obj, name, list, "config.initial_frame")
        if len(arr) != 4 or not all(isinstance(x, (int, float)) for x in arr):
            raise ConfigError(f"field 'config.initial_frame.{name}' must be 4 numbers")
        vecs[name] = np.asarray(arr, dtype=float)
    state = FrameState(at_point=(spec.u0, spec.v0), **vecs)
    defect = frame_defect(state.x, state.y, state.n1, state.n2, eps).max_abs
    if defect > 1e-10:
        raise ConfigError(
            f"config.initial_frame is not orthonormal for epsilon={eps} (defect {defect:.3g})"
        )
    return state


def cmd_synthesize(args) -> int:
    cfg = _load_config(args.config)
    fields_cfg = _get(cfg, "fields", dict, "config")
    domain = _domain(cfg, "config")
    eps = _epsilon(cfg, "config")
    fd_step = _get(cfg, "fd_step", float, "config", None)
    spec = _grid(cfg, "config")
    gate = _get(cfg, "gate_threshold", float, "config", 1e-3)
    mu_text = _get(fields_cfg, "mu", str, "config.fields")
    nu_text = _get(fields_cfg, "nu", str, "config.fields")
    mu = _field(mu_text, domain, fd_step, "config.fields.mu")
    nu = _field(nu_text, domain, fd_step, "config.fields.nu")
    frame0 = _initial_frame(cfg, spec, eps)
    point0 = _get(cfg, "initial_point", list, "config")
    if len(point0) != 4 or not all(isinstance(x, (int, float)) for x in point0):
        raise ConfigError("field 'config.initial_point' must be 4 numbers")

    stride_u = max(1, spec.n_u // 12)
    stride_v = max(1, spec.n_v // 12)
    gate_pts = _grid_points(GridSpec(spec.u0, spec.v0, spec.h * stride_u,
                                     max(1, (spec.n_u - 1) // stride_u + 1),
                                     max(1, (spec.n_v - 1) // stride_v + 1)))
    defect = integrability_defect(mu, nu, eps, gate_pts)
    out = _out_dir(args)
    if defect > gate:
        write_json_summary(out / "synthesis_summary.json", {
            "gate": {"integrability_defect": defect, "threshold": gate, "passed": False},
        })
        print(f"integrability gate rejected the fields: defect {defect:.6g} > {gate:g}",
              file=sys.stderr)
        return EXIT_GATE

    surface = integrate_frames(mu, nu, eps, frame0, spec, fd_step)
    surface = integrate_positions(surface, mu, nu, np.asarray(point0, dtype=float))
    validation = validate_synthesis(surface, mu, nu, eps)
    if args.format == "csv":
        write_mesh_csv(out / "mesh.csv", surface.us, surface.vs, surface.positions)
        mesh_file = "mesh.csv"
    else:
        write_json_summary(out / "mesh.json", {
            "us": surface.us, "vs": surface.vs, "positions": surface.positions,
        }, with_timestamp=False)
        mesh_file = "mesh.json"
    write_json_summary(out / "synthesis_summary.json", {
        "gate": {"integrability_defect": defect, "threshold": gate, "passed": True},
        "defects": {
            "orthonormality_drift": surface.orthonormality_drift,
            "consistency_defect": surface.consistency_defect,
            "integrability_defect": surface.integrability_defect,
        },
        "validation": {
            "mu_error": validation.mu_error,
            "nu_error": validation.nu_error,
            "minimality_residual": validation.minimality_residual,
            "canonical_defect": validation.canonical_defect,
            "K_error": validation.K_error,
            "kappa_error": validation.kappa_error,
            "epsilon_matches": validation.epsilon_matches,
        },
        "fields": {"mu": mu_text, "nu": nu_text, "epsilon": eps},
        "grid": {"u0": spec.u0, "v0": spec.v0, "h": spec.h, "n_u": spec.n_u, "n_v": spec.n_v},
        "mesh": mesh_file,
    })
    return EXIT_OK


# --- null curves -----------------------------------------------------------------

def cmd_null_curve(args) -> int:
    cfg = _load_config(args.config)
    curves = {}
    for name in ("alpha", "beta"):
        obj = _get(cfg, name, dict, "config")
        comps = _get(obj, "components", list, f"config.{name}")
        if len(comps) != 4:
            raise ConfigError(f"field 'config.{name}.components' must hold 4 expression strings")
        dom = _get(obj, "domain", list, f"config.{name}")
        if len(dom) != 2 or not all(isinstance(x, (int, float)) for x in dom):
            raise ConfigError(f"field 'config.{name}.domain' must be [min, max]")
        try:
            curves[name] = null_curve_from_expressions(comps, (float(dom[0]), float(dom[1])))
        except ExpressionSyntaxError as exc:
            raise ConfigError(f"field 'config.{name}.components': {exc}") from exc
    samples = _get(cfg, "samples", int, "config", 40)
    tol = _get(cfg, "tol", float, "config", 1e-8)
    pair = NullCurvePair(**curves)
    report = validate_pair(pair,
                           np.linspace(*pair.alpha.domain, samples),
                           np.linspace(*pair.beta.domain, samples), tol)
    out = _out_dir(args)
    write_json_summary(out / "pair_summary.json", {
        "max_null_alpha": report.max_null_alpha,
        "max_null_beta": report.max_null_beta,
        "min_transversal": report.min_transversal,
        "passed": report.passed,
    })
    if not report.passed:
        print("null-curve pair failed validation; see pair_summary.json", file=sys.stderr)
        return EXIT_CONFIG

    chart = surface_from_pair(pair, samples, tol)
    n = _get(cfg, "mesh_points", int, "config", 50)
    margin = 1e-9 * max(chart.domain.extents)
    us = np.linspace(chart.domain.u_min + margin, chart.domain.u_max - margin, n)
    vs = np.linspace(chart.domain.v_min + margin, chart.domain.v_max - margin, n)
    positions = np.stack([np.stack([chart.at(u, v) for v in vs]) for u in us])
    write_mesh_csv(out / "mesh.csv", us, vs, positions)
    return EXIT_OK


# --- example ---------------------------------------------------------------------

def cmd_example(args) -> int:
    fd_step = args.fd_step
    bundle = gallery.example(fd_step if fd_step is not None else 1e-4)
    threshold = args.threshold if args.threshold is not None else 1e-3
    out = _out_dir(args)
    verdict = {"thresholds": {"residual": threshold, "oracle": 1e-6,
                              "orthonormality_drift": 1e-8, "invariant_recovery": 1e-4}}
    # stencils must fit between the evaluation box and the field domain edge
    step = bundle.mu.fd_step
    guard = max(gallery.GUARD_T,
                gallery.DOMAIN_MARGIN_T + 2.0 * step / gallery.SCALE + 0.01)
    n_res = 15
    us = gallery.SCALE * np.linspace(gallery.T_MIN + guard, gallery.T_MAX - guard, n_res)
    vs = np.linspace(-0.3, 0.3, n_res)
    U, V = np.meshgrid(us, vs, indexing="ij")
    pts = np.column_stack([U.ravel(), V.ravel()])

    report = residual_mu_nu(bundle.mu, bundle.nu, bundle.epsilon, pts)
    write_residual_csv(out / "residuals.csv", report)
    verdict["verify"] = {"r1_max": report.r1_max, "r2_max": report.r2_max,
                         "fd_step": report.fd_step,
                         "passed": max(report.r1_max, report.r2_max) <= threshold}

    kf, xf = fields_K_kappa_from_mu_nu(bundle.mu, bundle.nu, bundle.epsilon)
    report_kk = residual_K_kappa(kf, xf, bundle.epsilon, pts)
    verdict["verify_curvature_form"] = {
        "r1_max": report_kk.r1_max, "r2_max": report_kk.r2_max,
        "passed": max(report_kk.r1_max, report_kk.r2_max) <= threshold,
    }

    if not (verdict["verify"]["passed"] and verdict["verify_curvature_form"]["passed"]):
        write_json_summary(out / "example_verdict.json", verdict)
        print("residual thresholds exceeded; see example_verdict.json", file=sys.stderr)
        return EXIT_THRESHOLD

    spec = bundle.synthesis_spec(n=args.grid, h=1e-3)
    gate_pts = pts[:: max(1, len(pts) // 64)]
    gate_defect = integrability_defect(bundle.mu, bundle.nu, bundle.epsilon, gate_pts)
    verdict["gate"] = {"integrability_defect": gate_defect, "threshold": 1e-3,
                       "passed": gate_defect <= 1e-3}
    if not verdict["gate"]["passed"]:
        write_json_summary(out / "example_verdict.json", verdict)
        return EXIT_GATE

    surface = integrate_frames(bundle.mu, bundle.nu, bundle.epsilon,
                               bundle.initial_frame(), spec)
    surface = integrate_positions(surface, bundle.mu, bundle.nu, bundle.initial_point())
    discrepancy = gallery.oracle_compare(surface, bundle)
    validation = validate_synthesis(surface, bundle.mu, bundle.nu, bundle.epsilon)
    write_mesh_csv(out / "mesh.csv", surface.us, surface.vs, surface.positions)
    verdict["synthesize"] = {
        "oracle_discrepancy": discrepancy,
        "orthonormality_drift": surface.orthonormality_drift,
        "consistency_defect": surface.consistency_defect,
        "integrability_defect": surface.integrability_defect,
        "mu_error": validation.mu_error,
        "nu_error": validation.nu_error,
        "passed": bool(discrepancy <= 1e-6 and surface.orthonormality_drift <= 1e-8
                       and validation.mu_error <= 1e-4 and validation.nu_error <= 1e-4),
    }

    # classification histogram over a coarse sub-lattice of the mesh
    histogram = {cls.value: 0 for cls in SurfaceClass}
    sub = max(1, args.grid // 8)
    for i in range(1, spec.n_u - 1, sub):
        for j in range(1, spec.n_v - 1, sub):
            fd = second_form(bundle.chart_canonical, float(spec.us[i]), float(spec.vs[j]))
            rep = curvature_report(fd)
            histogram[rep.surface_class.value] += 1
    total = sum(histogram.values())
    verdict["analyze"] = {
        "classification_histogram": histogram,
        "all_general_type": histogram[SurfaceClass.GENERAL_TYPE.value] == total,
    }

    ok = (verdict["verify"]["passed"] and verdict["verify_curvature_form"]["passed"]
          and verdict["gate"]["passed"] and verdict["synthesize"]["passed"]
          and verdict["analyze"]["all_general_type"])
    verdict["passed"] = ok
    write_json_summary(out / "example_verdict.json", verdict)
    print(f"example verdict: {'PASS' if ok else 'FAIL'} "
          f"(oracle {discrepancy:.3e}, drift {surface.orthonormality_drift:.3e}, "
          f"r1 {report.r1_max:.3e})")
    return EXIT_OK if ok else EXIT_THRESHOLD


# --- entry point -------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lormin",
        description="Minimal Lorentz surfaces in neutral 4-space: analyze, verify, synthesize.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_config in (("analyze", True), ("synthesize", True), ("verify", True),
                               ("null-curve", True), ("example", False)):
        p = sub.add_parser(name)
        if needs_config:
            p.add_argument("--config", required=True, help="path to the JSON job config")
        p.add_argument("--out", default="out", help="output directory (default: ./out)")
        p.add_argument("--threshold", type=float, default=None,
                       help="residual threshold override")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="data table format (summaries are always JSON)")
        if name == "example":
            p.add_argument("--grid", type=int, default=100,
                           help="synthesis lattice size per side (default 100)")
            p.add_argument("--fd-step", dest="fd_step", type=float, default=None,
                           help="override the invariant fields' derivative step")
    return parser


_COMMANDS = {
    "analyze": cmd_analyze,
    "verify": cmd_verify,
    "synthesize": cmd_synthesize,
    "null-curve": cmd_null_curve,
    "example": cmd_example,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PairValidationError, DomainError) as exc:
        # bad grids/domains and failed pair validation are config-level problems
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LorminError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
