import math

import numpy as np
import pytest

import lormin.gallery as gallery
from lormin.analyzer import chart_from_grid, second_form
from lormin.canonical import extract_frame
from lormin.errors import NearSuperconformalError, PreconditionError
from lormin.fields import Rectangle, ScalarField
from lormin.synthesis import (
    FrameState,
    GridSpec,
    build_matrices,
    integrability_defect,
    integrate_frames,
    integrate_positions,
    recover_invariants_on_grid,
    validate_synthesis,
)

R4 = gallery.SCALE
DOM = Rectangle(-2.0, 2.0, -2.0, 2.0)


def const_field(value):
    return ScalarField(lambda u, v: value + 0.0 * np.asarray(u), DOM, 1e-4)


def basis_frame():
    return FrameState(x=np.eye(4)[0], y=np.eye(4)[2], n1=np.eye(4)[1], n2=np.eye(4)[3],
                      at_point=(0.0, 0.0))


@pytest.fixture(scope="module")
def demo_surface(bundle):
    spec = GridSpec(u0=R4 * math.pi / 2, v0=0.0, h=1e-3, n_u=60, n_v=60)
    surf = integrate_frames(bundle.mu, bundle.nu, -1, bundle.initial_frame(), spec)
    return integrate_positions(surf, bundle.mu, bundle.nu, bundle.initial_point())


# --- coefficient matrices -------------------------------------------------------------

def test_build_matrices_constant_fields():
    m = build_matrices(const_field(2.0), const_field(1.0), +1, 0.0, 0.0)
    k = 3.0 ** -0.25
    A_expected = k * np.array([[0, 0, 1, 0], [0, 0, 0, 2], [-1, 0, 0, 0], [0, -2, 0, 0]])
    B_expected = k * np.array([[0, 0, 0, 2], [0, 0, 1, 0], [0, 1, 0, 0], [2, 0, 0, 0]])
    np.testing.assert_allclose(m.A, A_expected, atol=1e-12)
    np.testing.assert_allclose(m.B, B_expected, atol=1e-12)


def test_build_matrices_demo_center(bundle):
    # at t = pi/2 both u-derivative coefficients vanish; sqrt(E) = 3^(-1/4)
    m = build_matrices(bundle.mu, bundle.nu, -1, R4 * math.pi / 2, 0.0)
    k = 3.0 ** -0.25
    A_expected = k * np.array([[0, 0, 1, 0], [0, 0, 0, 2], [1, 0, 0, 0], [0, 2, 0, 0]])
    B_expected = k * np.array([[0, 0, 0, 2], [0, 0, 1, 0], [0, -1, 0, 0], [-2, 0, 0, 0]])
    np.testing.assert_allclose(m.A, A_expected, atol=1e-6)
    np.testing.assert_allclose(m.B, B_expected, atol=1e-6)


def test_build_matrices_superconformal_error():
    with pytest.raises(NearSuperconformalError):
        build_matrices(const_field(1.0), const_field(1.0), +1, 0.0, 0.0)


# --- integrability gate ----------------------------------------------------------------

def test_integrability_demo_interior_grid(bundle):
    # away from the interval ends even a coarse 1e-3 step stays under 1e-4
    us = R4 * np.linspace(math.pi / 3 + 0.3, 2 * math.pi / 3 - 0.3, 10)
    grid = np.column_stack([us, np.zeros_like(us)])
    assert integrability_defect(bundle.mu, bundle.nu, -1, grid, fd_step=1e-3) <= 1e-4


def test_integrability_demo_guarded_grid_default_step(bundle):
    assert integrability_defect(bundle.mu, bundle.nu, -1, bundle.residual_grid(10)) <= 1e-4


def test_integrability_constant_fields_fail():
    grid = np.column_stack([np.linspace(-0.5, 0.5, 5), np.zeros(5)])
    defect = integrability_defect(const_field(2.0), const_field(1.0), +1, grid)
    assert defect >= 0.5
    # the obstruction is the commutator: 5/sqrt(3) for these constants
    assert defect == pytest.approx(5.0 / math.sqrt(3.0), rel=1e-6)


def test_integrability_swapped_roles_is_computable(bundle):
    # swapping the invariant pair is diagnostic only: must run, no contract
    value = integrability_defect(bundle.nu, bundle.mu, -1, bundle.residual_grid(6))
    assert np.isfinite(value)


# --- frame integration -------------------------------------------------------------------

def test_integrate_frames_matches_closed_form(bundle, demo_surface):
    spec = demo_surface.spec
    worst = 0.0
    for i in (0, 20, 59):
        for j in (0, 20, 59):
            t, s = spec.us[i] / R4, spec.vs[j] / R4
            closed = bundle.frame_closed_form(t, s)
            worst = max(worst, float(np.max(np.abs(demo_surface.frames[i, j] - closed.matrix))))
    assert worst <= 1e-6


def test_orthonormality_drift_small(demo_surface):
    assert demo_surface.orthonormality_drift <= 1e-8


def test_optional_reorthonormalization(bundle):
    # the off-by-default projection pins the defect to rounding level even
    # at a coarse step, without moving the frames beyond integrator error
    u0 = R4 * math.pi / 2
    spec = GridSpec(u0, 0.0, 0.04, 11, 11)
    raw = integrate_frames(bundle.mu, bundle.nu, -1, bundle.initial_frame(), spec)
    projected = integrate_frames(bundle.mu, bundle.nu, -1, bundle.initial_frame(), spec,
                                 reorthonormalize=True)
    assert raw.orthonormality_drift > 1e-9
    assert projected.orthonormality_drift <= 1e-12
    assert float(np.max(np.abs(projected.frames - raw.frames))) <= 1e-6
    surf = integrate_positions(projected, bundle.mu, bundle.nu, bundle.initial_point())
    assert surf.reorthonormalized
    assert gallery.oracle_compare(surf, bundle) <= 1e-5


def test_drift_shrinks_at_integrator_order(bundle):
    # same patch, halved step: quadratic-invariant drift drops by >= 12x
    u0 = R4 * math.pi / 2
    coarse = integrate_frames(bundle.mu, bundle.nu, -1, bundle.initial_frame(),
                              GridSpec(u0, 0.0, 0.04, 11, 11))
    fine = integrate_frames(bundle.mu, bundle.nu, -1, bundle.initial_frame(),
                            GridSpec(u0, 0.0, 0.02, 21, 21))
    assert coarse.orthonormality_drift / fine.orthonormality_drift >= 12.0


def test_consistency_defect_demo_vs_broken_fields(bundle):
    # path disagreement: finite-difference noise for a true solution,
    # bounded below for fields violating the natural system
    u0 = R4 * math.pi / 2
    good = integrate_frames(bundle.mu, bundle.nu, -1, bundle.initial_frame(),
                            GridSpec(u0, 0.0, 0.02, 21, 21))
    assert good.consistency_defect <= 1e-6
    for spec in (GridSpec(0.0, 0.0, 0.01, 21, 21), GridSpec(0.0, 0.0, 0.005, 41, 41)):
        bad = integrate_frames(const_field(2.0), const_field(1.0), +1, basis_frame(), spec)
        assert bad.consistency_defect >= 0.05


def test_blowup_guard():
    # constants with a timelike first normal direction make the (x, n1) and
    # (y, n2) pairs boost exponentially in u; a long sweep must trip the bound
    from lormin.errors import BlowUpError
    dom = Rectangle(-1.0, 26.0, -1.0, 1.0)
    cmu = ScalarField(lambda u, v: 2.0 + 0.0 * np.asarray(u), dom, 1e-4)
    cnu = ScalarField(lambda u, v: 1.0 + 0.0 * np.asarray(u), dom, 1e-4)
    with pytest.raises(BlowUpError):
        integrate_frames(cmu, cnu, -1, basis_frame_eps_minus(), GridSpec(0.0, 0.0, 0.1, 240, 2))


def basis_frame_eps_minus():
    return FrameState(x=np.eye(4)[0], y=np.eye(4)[2], n1=np.eye(4)[3], n2=np.eye(4)[1],
                      at_point=(0.0, 0.0))


def test_initial_frame_defect_gate(bundle):
    crooked = FrameState(x=1.0001 * np.eye(4)[0], y=np.eye(4)[2],
                         n1=np.eye(4)[1], n2=np.eye(4)[3], at_point=(0.0, 0.0))
    with pytest.raises(PreconditionError):
        integrate_frames(const_field(2.0), const_field(1.0), +1, crooked,
                         GridSpec(0.0, 0.0, 0.01, 4, 4))


def test_single_row_and_single_column_grids(bundle):
    # degenerate lattice shapes: one baseline, one sweep direction
    u0 = R4 * math.pi / 2
    for spec in (GridSpec(u0, 0.0, 1e-3, 1, 30), GridSpec(u0, 0.0, 1e-3, 30, 1)):
        surf = integrate_frames(bundle.mu, bundle.nu, -1, bundle.initial_frame(), spec)
        surf = integrate_positions(surf, bundle.mu, bundle.nu, bundle.initial_point())
        assert surf.positions.shape == (spec.n_u, spec.n_v, 4)
        assert surf.orthonormality_drift <= 1e-10
        assert gallery.oracle_compare(surf, bundle) <= 1e-8


def test_single_point_grid(bundle):
    spec = GridSpec(R4 * math.pi / 2, 0.0, 1e-3, 1, 1)
    surf = integrate_frames(bundle.mu, bundle.nu, -1, bundle.initial_frame(), spec)
    np.testing.assert_allclose(surf.frames[0, 0], bundle.initial_frame().matrix, atol=0.0)
    assert surf.orthonormality_drift <= 1e-12
    surf = integrate_positions(surf, bundle.mu, bundle.nu, np.array([1.0, 2.0, 3.0, 4.0]))
    np.testing.assert_allclose(surf.positions[0, 0], [1, 2, 3, 4], atol=0.0)


# --- position integration ------------------------------------------------------------------

def test_positions_match_closed_form(bundle, demo_surface):
    assert gallery.oracle_compare(demo_surface, bundle) <= 1e-6


def test_positions_translation_equivariance(bundle, demo_surface):
    offset = np.array([1.0, 2.0, 3.0, 4.0])
    shifted = integrate_positions(demo_surface, bundle.mu, bundle.nu,
                                  bundle.initial_point() + offset)
    np.testing.assert_allclose(shifted.positions, demo_surface.positions + offset, atol=1e-12)


def test_mixed_partial_defect_small_for_solution(demo_surface):
    assert demo_surface.integrability_defect <= 1e-6


# --- closure validation -----------------------------------------------------------------------

def test_validate_demo_synthesis(bundle, demo_surface):
    val = validate_synthesis(demo_surface, bundle.mu, bundle.nu, -1)
    assert val.mu_error <= 1e-4
    assert val.nu_error <= 1e-4
    assert val.minimality_residual <= 1e-4
    assert val.canonical_defect <= 1e-4
    assert val.epsilon_matches


def test_synthesized_mesh_is_canonical_isothermal(bundle, demo_surface):
    # first form of the mesh: E = -G = |mu^2 - nu^2|^(-1/2), F = 0
    spec = demo_surface.spec
    rec = recover_invariants_on_grid(demo_surface.positions, spec.h)
    us = spec.us[1:-1]
    m = gallery.mu_value(us)[:, None]
    n = gallery.nu_value(us)[:, None]
    expected_E = 1.0 / np.sqrt(np.abs(m * m - n * n))
    assert float(np.max(np.abs(rec["E"] - expected_E))) <= 1e-4
    assert float(np.max(np.abs(rec["G"] + expected_E))) <= 1e-4
    assert float(np.max(np.abs(rec["F"]))) <= 1e-4


def test_validate_flipped_epsilon_flags_mismatch(bundle, demo_surface):
    val = validate_synthesis(demo_surface, bundle.mu, bundle.nu, +1)
    assert not val.epsilon_matches
    assert val.K_error > 0.1  # the sign of K comes straight from epsilon


def test_validate_refuses_inconsistent_mesh():
    spec = GridSpec(0.0, 0.0, 0.01, 21, 21)
    surf = integrate_frames(const_field(2.0), const_field(1.0), +1, basis_frame(), spec)
    surf = integrate_positions(surf, const_field(2.0), const_field(1.0), np.zeros(4))
    assert surf.integrability_defect > 1e-3
    with pytest.raises(PreconditionError):
        validate_synthesis(surf, const_field(2.0), const_field(1.0), +1)


def test_validate_requires_positions(bundle):
    spec = GridSpec(R4 * math.pi / 2, 0.0, 1e-3, 4, 4)
    surf = integrate_frames(bundle.mu, bundle.nu, -1, bundle.initial_frame(), spec)
    with pytest.raises(PreconditionError):
        validate_synthesis(surf, bundle.mu, bundle.nu, -1)


def test_vectorised_recovery_matches_pointwise_pipeline(demo_surface):
    # the batched invariant recovery must agree with jet -> second form ->
    # extraction; a lattice chart's first form carries O(h^2) truncation, so
    # the isothermality gate is loosened accordingly
    spec = demo_surface.spec
    rec = recover_invariants_on_grid(demo_surface.positions, spec.h)
    chart = chart_from_grid(demo_surface.positions, spec.u0, spec.v0, spec.h)
    for (i, j) in [(2, 2), (12, 30), (30, 12), (57, 57)]:
        fd = second_form(chart, float(spec.us[i]), float(spec.vs[j]), isothermal_tol=1e-5)
        inv = extract_frame(fd)
        assert rec["mu"][i - 1, j - 1] == pytest.approx(inv.mu, abs=1e-10)
        assert rec["nu"][i - 1, j - 1] == pytest.approx(inv.nu, abs=1e-10)
        assert rec["epsilon"][i - 1, j - 1] == inv.epsilon
        assert rec["K"][i - 1, j - 1] == pytest.approx(
            fd.b ** 2 - fd.a ** 2 + fd.c ** 2 - fd.d ** 2, abs=1e-10)
