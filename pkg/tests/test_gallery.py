import math

import numpy as np
import pytest

import lormin.gallery as gallery
from lormin.analyzer import second_form
from lormin.canonical import extract_frame
from lormin.errors import GridMismatchError
from lormin.natural import residual_mu_nu
from lormin.neutral import frame_defect_grid
from lormin.synthesis import GridSpec, integrate_frames, integrate_positions

R4 = gallery.SCALE
U0 = R4 * math.pi / 2


def test_invariants_at_reference_point(bundle):
    assert bundle.mu.eval(U0, 0.0) == pytest.approx(2.0, abs=1e-12)
    assert bundle.nu.eval(U0, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert bundle.epsilon == -1


def test_invariant_difference_identity(bundle, rng):
    # mu^2 - nu^2 = 3 / (sin^4 t (1 - 4 cos^2 t)^2)
    for _ in range(25):
        t = rng.uniform(*bundle.guarded_t)
        m, n = gallery.mu_value(R4 * t), gallery.nu_value(R4 * t)
        w = 1 - 4 * math.cos(t) ** 2
        assert m * m - n * n == pytest.approx(3.0 / (math.sin(t) ** 4 * w * w), rel=1e-10)
        assert (m + n) / (m - n) == pytest.approx(3.0 / w, rel=1e-10)


def test_surface_at_reference_point(bundle):
    np.testing.assert_allclose(bundle.surface_closed_form(math.pi / 2, 0.0),
                               [0.0, 0.0, 1.0, 0.0], atol=1e-15)


def test_initial_frame_values(bundle):
    f = bundle.initial_frame()
    np.testing.assert_allclose(f.x, [-1, 0, 0, 0], atol=1e-15)
    np.testing.assert_allclose(f.y, [0, 0, 0, 1], atol=1e-15)
    np.testing.assert_allclose(f.n1, [0, 0, -1, 0], atol=1e-15)
    np.testing.assert_allclose(f.n2, [0, -1, 0, 0], atol=1e-15)


def test_closed_form_frames_orthonormal(bundle, rng):
    frames = []
    for _ in range(20):
        t = rng.uniform(*bundle.guarded_t)
        s = rng.uniform(-0.5, 0.5)
        frames.append(bundle.frame_closed_form(t, s).matrix)
    defects = frame_defect_grid(np.stack(frames), bundle.epsilon)
    assert float(np.max(defects)) <= 1e-12


def test_expression_texts_match_closures(bundle, rng):
    from lormin.fields import field_from_text
    mu_f = field_from_text(bundle.mu_text, bundle.mu.domain)
    nu_f = field_from_text(bundle.nu_text, bundle.nu.domain)
    for _ in range(20):
        u = rng.uniform(R4 * bundle.guarded_t[0], R4 * bundle.guarded_t[1])
        assert mu_f.eval(u, 0.0) == pytest.approx(gallery.mu_value(u), rel=1e-13)
        assert nu_f.eval(u, 0.0) == pytest.approx(gallery.nu_value(u), rel=1e-13)


def test_residual_on_guarded_grid(bundle):
    report = residual_mu_nu(bundle.mu, bundle.nu, bundle.epsilon, bundle.residual_grid(15))
    assert max(report.r1_max, report.r2_max) <= 1e-4


def test_curvature_pipeline_recovers_invariants(bundle, rng):
    # K = mu^2 + nu^2 and kappa = -2 mu nu (timelike first normal direction)
    for _ in range(20):
        t = rng.uniform(*bundle.guarded_t)
        s = rng.uniform(-0.5, 0.5)
        inv = extract_frame(second_form(bundle.chart_canonical, R4 * t, R4 * s))
        m, n = gallery.mu_value(R4 * t), gallery.nu_value(R4 * t)
        assert inv.K == pytest.approx(m * m + n * n, abs=1e-5)
        assert inv.kappa == pytest.approx(-2 * m * n, abs=1e-5)


def test_oracle_compare_translation_modes(bundle):
    spec = GridSpec(U0, 0.0, 1e-3, 20, 20)
    surf = integrate_frames(bundle.mu, bundle.nu, -1, bundle.initial_frame(), spec)
    surf = integrate_positions(surf, bundle.mu, bundle.nu,
                               bundle.initial_point() + np.array([1.0, 1.0, 1.0, 1.0]))
    # a pure translation: alignment removes it entirely, raw comparison sees |C|
    assert gallery.oracle_compare(surf, bundle, align_translation=True) <= 1e-9
    assert gallery.oracle_compare(surf, bundle) == pytest.approx(2.0, abs=1e-9)


def test_oracle_compare_needs_positions(bundle):
    spec = GridSpec(U0, 0.0, 1e-3, 4, 4)
    surf = integrate_frames(bundle.mu, bundle.nu, -1, bundle.initial_frame(), spec)
    with pytest.raises(GridMismatchError):
        gallery.oracle_compare(surf, bundle)


def test_demo_pair_lives_in_gallery(bundle):
    # convenience wiring: the bundled null pair is the generator of the surface
    assert bundle.null_pair.alpha.d1 is not None
    assert bundle.null_pair.beta.d2 is not None
