"""Acceptance suite: every criterion at its stated tolerance, one line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
PASS/FAIL lines on the terminal (they are also embedded in assertion
messages on failure).
"""
import math
import time

import numpy as np

import lormin.gallery as gallery
from lormin.analyzer import (
    SurfaceChart,
    curvature_report,
    frame_free_gauss_curvature,
    minimality_residual,
    second_form,
)
from lormin.canonical import check_canonical, extract_frame
from lormin.fields import Rectangle, ScalarField, hyperbolic_laplacian
from lormin.natural import (
    convert_K_kappa_to_mu_nu,
    convert_mu_nu_to_K_kappa,
    fields_K_kappa_from_mu_nu,
    residual_K_kappa,
    residual_mu_nu,
)
from lormin.neutral import inner
from lormin.nullcurves import NullCurvePair, surface_from_pair, trig_null_curve
from lormin.synthesis import (
    integrability_defect,
    integrate_frames,
    integrate_positions,
    validate_synthesis,
)

R4 = gallery.SCALE
U0 = R4 * math.pi / 2


def _report(num, ok, detail):
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    return line


def test_criterion_1_residual_reproduction(bundle):
    grid = bundle.residual_grid(15)
    start = time.perf_counter()
    report = residual_mu_nu(bundle.mu, bundle.nu, -1, grid, fd_step=1e-3)
    elapsed = time.perf_counter() - start
    ok = report.r1_max <= 1e-4 and report.r2_max <= 1e-4 and elapsed < 1.0
    line = _report(1, ok, f"r1_max={report.r1_max:.3e}, r2_max={report.r2_max:.3e}, "
                          f"tol=1e-4, fd_step=1e-3, {elapsed:.2f}s")
    assert ok, line


def test_criterion_2_point_identities(bundle):
    mu, nu = bundle.mu.eval(U0, 0.0), bundle.nu.eval(U0, 0.0)
    K, kappa = convert_mu_nu_to_K_kappa(mu, nu, -1)
    closed = {
        "mu": (mu, 2.0), "nu": (nu, 1.0),
        "mu2-nu2": (mu * mu - nu * nu, 3.0),
        "ratio": ((mu + nu) / (mu - nu), 3.0),
        "K": (K, 5.0), "kappa": (kappa, -4.0),
        "disc": (K * K - kappa * kappa, 9.0),
        "disc=(mu2-nu2)^2": (K * K - kappa * kappa, (mu * mu - nu * nu) ** 2),
    }
    worst_closed = max(abs(a - b) for a, b in closed.values())

    # numeric pipeline on the closed-form positions, derivatives by differences
    fd_chart = SurfaceChart(bundle.chart_canonical.position, bundle.chart_canonical.domain,
                            fd_step=1e-4)
    inv = extract_frame(second_form(fd_chart, U0, 0.0))
    worst_numeric = max(abs(inv.mu - 2.0), abs(inv.nu - 1.0),
                        abs(inv.K - 5.0), abs(inv.kappa + 4.0))
    ok = worst_closed <= 1e-9 and worst_numeric <= 1e-5
    line = _report(2, ok, f"closed-form err={worst_closed:.2e} (tol 1e-9), "
                          f"numeric pipeline err={worst_numeric:.2e} (tol 1e-5)")
    assert ok, line


def test_criterion_3_synthesis_closure(bundle):
    start = time.perf_counter()
    spec = bundle.synthesis_spec(n=200, h=1e-3)
    surface = integrate_frames(bundle.mu, bundle.nu, -1, bundle.initial_frame(), spec)
    surface = integrate_positions(surface, bundle.mu, bundle.nu, bundle.initial_point())
    discrepancy = gallery.oracle_compare(surface, bundle)
    validation = validate_synthesis(surface, bundle.mu, bundle.nu, -1)
    elapsed = time.perf_counter() - start
    ok = (discrepancy <= 1e-6 and surface.orthonormality_drift <= 1e-8
          and validation.mu_error <= 1e-4 and validation.nu_error <= 1e-4
          and elapsed < 30.0)
    line = _report(3, ok, f"oracle={discrepancy:.2e} (tol 1e-6), "
                          f"drift={surface.orthonormality_drift:.2e} (tol 1e-8), "
                          f"mu_err={validation.mu_error:.2e}, nu_err={validation.nu_error:.2e} "
                          f"(tol 1e-4), {elapsed:.1f}s (< 30s)")
    assert ok, line


def test_criterion_4_integrability_gate(bundle):
    good = integrability_defect(bundle.mu, bundle.nu, -1, bundle.residual_grid(10))
    dom = Rectangle(-2.0, 2.0, -2.0, 2.0)
    cmu = ScalarField(lambda u, v: 2.0 + 0.0 * np.asarray(u), dom, 1e-4)
    cnu = ScalarField(lambda u, v: 1.0 + 0.0 * np.asarray(u), dom, 1e-4)
    grid = np.column_stack([np.linspace(-0.5, 0.5, 5), np.zeros(5)])
    bad = integrability_defect(cmu, cnu, +1, grid)
    ok = good <= 1e-4 and bad >= 0.5
    line = _report(4, ok, f"demo defect={good:.2e} (tol 1e-4), "
                          f"constant-field defect={bad:.3f} (>= 0.5)")
    assert ok, line


def test_criterion_5_minimality_oracle(bundle, rng):
    worst_minimality = 0.0
    checked = 0
    while checked < 12:
        ka, ma, kb, mb = (int(rng.choice([-2, -1, 1, 2])) for _ in range(4))
        alpha = trig_null_curve(rng.uniform(0.5, 1.5), ka, ma, 0.0, 0.0, (-0.15, 0.15))
        beta = trig_null_curve(rng.uniform(0.5, 1.5), kb, mb, 0.0, math.pi, (-0.15, 0.15))
        try:
            chart = surface_from_pair(NullCurvePair(alpha, beta))
        except Exception:
            continue
        dom = chart.domain
        grid = [(u, v) for u in np.linspace(dom.u_min / 2, dom.u_max / 2, 4)
                for v in np.linspace(dom.v_min / 2, dom.v_max / 2, 4)]
        worst_minimality = max(worst_minimality, minimality_residual(chart, grid))
        checked += 1
    demo_chart = surface_from_pair(bundle.null_pair)
    grid = [(u, v) for u in np.linspace(demo_chart.domain.u_min + 1e-6,
                                        demo_chart.domain.u_max - 1e-6, 4)
            for v in np.linspace(demo_chart.domain.v_min + 1e-6,
                                 demo_chart.domain.v_max - 1e-6, 4)]
    worst_minimality = max(worst_minimality, minimality_residual(demo_chart, grid))
    reconstruction = max(float(np.max(np.abs(demo_chart.at(u, v)
                                             - bundle.surface_closed_form(u, v))))
                         for (u, v) in grid)
    ok = worst_minimality <= 1e-8 and reconstruction <= 1e-10
    line = _report(5, ok, f"max minimality={worst_minimality:.2e} (tol 1e-8), "
                          f"demo-pair reconstruction={reconstruction:.2e} (tol 1e-10)")
    assert ok, line


def test_criterion_6_system_equivalence(bundle):
    K, kappa = fields_K_kappa_from_mu_nu(bundle.mu, bundle.nu, -1)
    report = residual_K_kappa(K, kappa, -1, bundle.residual_grid(15))
    ok = report.r1_max <= 1e-4 and report.r2_max <= 1e-4
    line = _report(6, ok, f"r1_max={report.r1_max:.3e}, r2_max={report.r2_max:.3e} (tol 1e-4)")
    assert ok, line


def test_criterion_7_invariant_suites(rng):
    failures = []

    # inner product: symmetry exact, bilinearity to rounding
    for _ in range(100):
        a, b, c = rng.uniform(-10, 10, (3, 4))
        lam = float(rng.uniform(-5, 5))
        if inner(a, b) != inner(b, a):
            failures.append("symmetry")
        if abs(inner(lam * a + b, c) - (lam * inner(a, c) + inner(b, c))) > 1e-12 * 1e4:
            failures.append("bilinearity")

    # Gauss curvature: coefficient formula vs frame-free inner products
    checked = 0
    while checked < 100:
        ka, ma, kb, mb = (int(rng.choice([-2, -1, 1, 2])) for _ in range(4))
        alpha = trig_null_curve(rng.uniform(0.5, 1.5), ka, ma, 0.0, 0.0, (-0.15, 0.15))
        beta = trig_null_curve(rng.uniform(0.5, 1.5), kb, mb, 0.0, math.pi, (-0.15, 0.15))
        try:
            chart = surface_from_pair(NullCurvePair(alpha, beta))
        except Exception:
            continue
        u = rng.uniform(chart.domain.u_min / 2, chart.domain.u_max / 2)
        v = rng.uniform(chart.domain.v_min / 2, chart.domain.v_max / 2)
        fd = second_form(chart, u, v)
        rep = curvature_report(fd)
        if abs(rep.K - frame_free_gauss_curvature(fd)) > 1e-8:
            failures.append("K-oracle")
        checked += 1

    # quartic coefficient identity for the discriminant
    for _ in range(100):
        a, b, c, d = rng.uniform(-3, 3, 4)
        K = b * b - a * a + c * c - d * d
        kappa = 2 * (b * c - a * d)
        rhs = ((a * a - b * b) ** 2 + (c * c - d * d) ** 2
               - 2 * (b * c - a * d) ** 2 - 2 * (a * c - b * d) ** 2)
        if abs(K * K - kappa * kappa - rhs) > 1e-8:
            failures.append("quartic-identity")

    # conversion round trip
    for _ in range(100):
        mu = float(rng.uniform(0.1, 20))
        nu = float(rng.uniform(0.1, 20))
        if abs(mu - nu) < 1e-3 * max(mu, nu):
            continue
        mu, nu = max(mu, nu), min(mu, nu)
        eps = int(rng.choice([-1, 1]))
        mu2, nu2 = convert_K_kappa_to_mu_nu(*convert_mu_nu_to_K_kappa(mu, nu, eps), eps)
        if abs(mu2 - mu) > 1e-12 * mu or abs(nu2 - nu) > max(1e-12 * nu, 1e-12):
            failures.append("round-trip")

    # finite-difference stencils are second order: halving quarters the error
    box = Rectangle(-2, 2, -2, 2)
    done = 0
    while done < 100:
        aa = float(rng.uniform(0.5, 2.0))
        bb = float(rng.uniform(0.5, 2.0))
        u0 = float(rng.uniform(-1, 1))
        v0 = float(rng.uniform(-1, 1))
        target = (bb * bb - aa * aa) * math.sin(aa * u0 + bb * v0)
        if abs(aa ** 4 - bb ** 4) * abs(math.sin(aa * u0 + bb * v0)) < 0.1:
            continue
        f = ScalarField(lambda u, v, aa=aa, bb=bb: np.sin(aa * u + bb * v), box)
        e1 = abs(hyperbolic_laplacian(f, u0, v0, step=1e-2) - target)
        e2 = abs(hyperbolic_laplacian(f, u0, v0, step=5e-3) - target)
        if not 3.5 <= e1 / e2 <= 4.5:
            failures.append("fd-order")
        done += 1

    ok = not failures
    line = _report(7, ok, "all five suites x100 clean" if ok
                   else f"failing suites: {sorted(set(failures))}")
    assert ok, line


def test_criterion_8_canonical_detection(bundle):
    lo, hi = bundle.guarded_t

    def sweep(chart, scale):
        invs, fs = [], []
        for t in np.linspace(lo, hi, 7):
            for s in np.linspace(-0.4, 0.4, 5):
                fd = second_form(chart, scale * t, scale * s)
                invs.append(extract_frame(fd))
                fs.append(fd.f)
        return check_canonical(invs, fs)

    canonical = sweep(bundle.chart_canonical, R4)
    auxiliary = sweep(bundle.chart_ts, 1.0)
    ok = (canonical.is_canonical and abs(canonical.constant_c - 1.0) <= 1e-6
          and abs(auxiliary.constant_c - 3 ** 0.25) <= 1e-6)
    line = _report(8, ok, f"canonical chart c={canonical.constant_c:.8f} (1 +/- 1e-6), "
                          f"auxiliary chart c={auxiliary.constant_c:.8f} "
                          f"(3^(1/4)={3 ** 0.25:.8f} +/- 1e-6)")
    assert ok, line


def test_criterion_9_nonvanishing_curvatures(bundle):
    lo, hi = bundle.guarded_t
    worst_K, worst_kappa = np.inf, np.inf
    for t in np.linspace(lo, hi, 12):
        for s in np.linspace(-0.4, 0.4, 5):
            inv = extract_frame(second_form(bundle.chart_canonical, R4 * t, R4 * s))
            worst_K = min(worst_K, abs(inv.K))
            worst_kappa = min(worst_kappa, abs(inv.kappa))
    ok = worst_K > 1.0 and worst_kappa > 1.0
    line = _report(9, ok, f"min |K|={worst_K:.3f}, min |kappa|={worst_kappa:.3f} "
                          f"(both > 1; actual values exceed 3)")
    assert ok, line
