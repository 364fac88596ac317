"""Pointwise analysis of immersed Lorentz surfaces in neutral 4-space.

A :class:`SurfaceChart` is an immersion z(u, v) given by a vectorised
position callback (optionally with analytic derivative callbacks) over a
rectangle. All charts this module accepts must be isothermal in the
conformal-Lorentz sense E = -G > 0, F = 0; charts violating that are
rejected, never silently reparametrised.

Sign and orientation conventions (all deterministic):

* the orthonormal normal frame {e1, e2} with <e1,e1> = 1, <e2,e2> = -1 is
  built by projecting the standard basis vectors, in fixed order, onto the
  normal plane and orthonormalising;
* e2 is flipped if needed so the row matrix (x, y, e1, e2) has positive
  determinant, which pins the sign of the normal curvature between runs.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Tuple

import numpy as np

from . import expr as ex
from .errors import (
    DegenerateTangentError,
    DomainError,
    InsufficientSamplesError,
    LorminError,
    NonLorentzianMetricError,
    NormalFrameDegeneracyError,
    NotIsothermalError,
)
from .fields import DEFAULT_FD_FRACTION, Rectangle
from .neutral import CausalCharacter, causal_character, inner

ISOTHERMAL_TOL = 1e-8
DEGENERACY_TOL = 1e-7
TANGENT_TOL = 1e-12


@dataclass(frozen=True)
class SurfaceChart:
    """Immersion z(u, v) with derivative access.

    ``position(u, v)`` must accept numpy arrays and return shape (..., 4).
    In analytic mode ``derivatives(u, v)`` returns the tuple
    (z_u, z_v, z_uu, z_uv, z_vv); otherwise central differences with step
    ``fd_step`` are used (the mixed partial by the 4-point symmetric cross,
    so z_uv = z_vu by construction).
    """

    position: Callable
    domain: Rectangle
    fd_step: Optional[float] = None
    derivatives: Optional[Callable] = None

    def __post_init__(self):
        step = self.fd_step if self.fd_step is not None else DEFAULT_FD_FRACTION * min(self.domain.extents)
        if step <= 0:
            raise LorminError("fd_step must be positive")
        object.__setattr__(self, "fd_step", float(step))

    @property
    def derivative_mode(self) -> str:
        return "analytic-callback" if self.derivatives is not None else "finite-difference"

    def at(self, u, v) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return np.asarray(self.position(u, v), dtype=float)


def chart_from_expressions(components: Sequence[str], domain: Rectangle,
                           fd_step: Optional[float] = None) -> SurfaceChart:
    """Build a finite-difference chart from four component expression strings."""
    if len(components) != 4:
        raise LorminError(f"a chart needs 4 component expressions, got {len(components)}")
    trees = [ex.parse(text) for text in components]

    def position(u, v):
        vals = [np.broadcast_to(ex.evaluate(t, u, v), np.broadcast_shapes(np.shape(u), np.shape(v)))
                for t in trees]
        return np.stack(vals, axis=-1)

    return SurfaceChart(position, domain, fd_step)


def chart_from_grid(positions: np.ndarray, u0: float, v0: float, h: float) -> SurfaceChart:
    """Wrap lattice positions as a chart queryable exactly on lattice points.

    Used to re-analyse synthesised meshes: with fd_step = h every stencil of
    :func:`jet` lands on stored lattice nodes.
    """
    positions = np.asarray(positions, dtype=float)
    n_u, n_v = positions.shape[0], positions.shape[1]
    domain = Rectangle(u0, u0 + (n_u - 1) * h, v0, v0 + (n_v - 1) * h)

    def position(u, v):
        iu = np.rint((np.asarray(u) - u0) / h)
        iv = np.rint((np.asarray(v) - v0) / h)
        if np.any(np.abs((np.asarray(u) - u0) / h - iu) > 1e-6) or \
           np.any(np.abs((np.asarray(v) - v0) / h - iv) > 1e-6):
            raise DomainError("grid chart queried off the stored lattice")
        return positions[iu.astype(int), iv.astype(int)]

    return SurfaceChart(position, domain, fd_step=h)


@dataclass(frozen=True)
class Jet2:
    """Position and derivatives through second order at one parameter point."""

    z: np.ndarray
    z_u: np.ndarray
    z_v: np.ndarray
    z_uu: np.ndarray
    z_uv: np.ndarray
    z_vv: np.ndarray


def jet(chart: SurfaceChart, u: float, v: float) -> Jet2:
    """Second-order jet of the chart at (u, v).

    FD mode uses central differences of step fd_step per component; raises
    when the stencil leaves the domain or a tangent is numerically zero.
    """
    h = chart.fd_step
    if chart.derivatives is not None:
        if not chart.domain.contains(u, v):
            raise DomainError(f"({u}, {v}) outside chart domain")
        z = chart.at(u, v)
        z_u, z_v, z_uu, z_uv, z_vv = (np.asarray(w, dtype=float) for w in chart.derivatives(u, v))
    else:
        if not chart.domain.contains(u, v, margin=h):
            raise DomainError(f"jet stencil at ({u}, {v}) leaves the chart domain")
        z = chart.at(u, v)
        zp = chart.at(u + h, v)
        zm = chart.at(u - h, v)
        zq = chart.at(u, v + h)
        zr = chart.at(u, v - h)
        z_u = (zp - zm) / (2 * h)
        z_v = (zq - zr) / (2 * h)
        z_uu = (zp - 2 * z + zm) / (h * h)
        z_vv = (zq - 2 * z + zr) / (h * h)
        z_uv = (chart.at(u + h, v + h) - chart.at(u + h, v - h)
                - chart.at(u - h, v + h) + chart.at(u - h, v - h)) / (4 * h * h)
    if np.dot(z_u, z_u) < TANGENT_TOL or np.dot(z_v, z_v) < TANGENT_TOL:
        raise DegenerateTangentError(f"coordinate tangent vanishes at ({u}, {v})")
    return Jet2(z, z_u, z_v, z_uu, z_uv, z_vv)


def first_form(j: Jet2) -> Tuple[float, float, float]:
    """Coefficients (E, F, G) of the induced metric; must be Lorentzian."""
    E = float(inner(j.z_u, j.z_u))
    F = float(inner(j.z_u, j.z_v))
    G = float(inner(j.z_v, j.z_v))
    if E * G - F * F >= 0.0:
        raise NonLorentzianMetricError(
            f"induced metric not of signature (1,1): E={E:g}, F={F:g}, G={G:g}"
        )
    return E, F, G


def _normal_project(w, x, y):
    # tangent frame satisfies <x,x>=1, <y,y>=-1, <x,y>=0
    return w - inner(w, x) * x + inner(w, y) * y


def _normal_frame(x: np.ndarray, y: np.ndarray,
                  seed: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal frame {e1 spacelike, e2 timelike} of the normal plane.

    Candidates are the optional seed followed by the standard basis vectors;
    each is projected onto the normal plane, orthogonalised against an
    already-chosen frame vector, and kept if non-lightlike. Raises when the
    scan cannot fill both slots.
    """
    candidates = []
    if seed is not None:
        candidates.append(np.asarray(seed, dtype=float))
    candidates.extend(np.eye(4))
    e_plus = None
    e_minus = None
    for cand in candidates:
        p = _normal_project(cand, x, y)
        if e_plus is not None:
            p = p - inner(p, e_plus) * e_plus
        if e_minus is not None:
            p = p + inner(p, e_minus) * e_minus
        euclid = float(np.dot(p, p))
        if euclid < 1e-20:
            continue
        q = float(inner(p, p))
        if abs(q) <= 1e-10 * euclid:
            continue  # lightlike candidate, try the next seed
        if q > 0.0 and e_plus is None:
            e_plus = p / np.sqrt(q)
        elif q < 0.0 and e_minus is None:
            e_minus = p / np.sqrt(-q)
        if e_plus is not None and e_minus is not None:
            return e_plus, e_minus
    raise NormalFrameDegeneracyError("cannot build a non-lightlike orthonormal normal frame")


@dataclass(frozen=True)
class FundamentalData:
    """First and second fundamental data at a point of an isothermal chart.

    Tangent frame x = z_u/f, y = z_v/f with f = sqrt(E); normal frame
    {e1, e2} as documented in the module header. Second-form coefficients:
    sigma(x,x) = a e1 + b e2, sigma(x,y) = c e1 + d e2, and sigma(y,y) is
    kept as a vector (equal to sigma(x,x) precisely on minimal charts).
    """

    u: float
    v: float
    E: float
    F: float
    G: float
    f: float
    x: np.ndarray
    y: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    a: float
    b: float
    c: float
    d: float
    sigma_xx: np.ndarray
    sigma_xy: np.ndarray
    sigma_yy: np.ndarray
    gamma1: float
    gamma2: float
    beta1: float
    beta2: float


def _tangent_and_normal_frame(chart, u, v, seed, isothermal_tol=ISOTHERMAL_TOL):
    j = jet(chart, u, v)
    E, F, G = first_form(j)
    scale = max(abs(E), 1.0)
    if E <= 0.0 or abs(F) > isothermal_tol * scale or abs(E + G) > isothermal_tol * scale:
        raise NotIsothermalError(
            f"chart not isothermal at ({u}, {v}): E={E:g}, F={F:g}, G={G:g}"
        )
    f = float(np.sqrt(E))
    x = j.z_u / f
    y = j.z_v / f
    e1, e2 = _normal_frame(x, y, seed)
    if np.linalg.det(np.stack([x, y, e1, e2])) < 0.0:
        e2 = -e2
    return j, E, F, G, f, x, y, e1, e2


def second_form(chart: SurfaceChart, u: float, v: float,
                normal_seed: Optional[np.ndarray] = None,
                isothermal_tol: float = ISOTHERMAL_TOL) -> FundamentalData:
    """Full fundamental data at (u, v) of an isothermal Lorentz chart.

    The normal parts of the second derivatives give the second fundamental
    form: sigma(x,x) = P_N(z_uu)/f^2 and cyclic. The tangent connection is
    gamma1 = -f_v/f^2, gamma2 = -f_u/f^2 (computed from the jet), and the
    normal connection beta1, beta2 comes from differencing the e1 field.
    ``isothermal_tol`` may be loosened when re-analysing coarse lattice
    charts, whose first form carries O(h^2) truncation by construction.
    """
    j, E, F, G, f, x, y, e1, e2 = _tangent_and_normal_frame(chart, u, v, normal_seed,
                                                            isothermal_tol)
    f2 = f * f
    sigma_xx = _normal_project(j.z_uu, x, y) / f2
    sigma_xy = _normal_project(j.z_uv, x, y) / f2
    sigma_yy = _normal_project(j.z_vv, x, y) / f2
    a = float(inner(sigma_xx, e1))
    b = float(-inner(sigma_xx, e2))
    c = float(inner(sigma_xy, e1))
    d = float(-inner(sigma_xy, e2))

    # f_u = <z_uu, z_u>/f and f_v = <z_uv, z_u>/f from E = <z_u, z_u> = f^2
    f_u = float(inner(j.z_uu, j.z_u)) / f
    f_v = float(inner(j.z_uv, j.z_u)) / f
    gamma1 = -f_v / f2
    gamma2 = -f_u / f2

    # normal connection: beta1 = -<nabla'_x e1, e2>, beta2 = -<nabla'_y e1, e2>.
    # Differencing e1 needs the frame at four neighbours; when those are
    # unavailable (stencil outside the domain, or the chart is isothermal
    # only on a lower-dimensional set) the betas degrade to NaN while the
    # rest of the data stays valid.
    h = chart.fd_step
    try:
        if not chart.domain.contains(u, v, margin=2.0 * h):
            raise DomainError("no room for the normal-connection stencil")
        e1_up = _tangent_and_normal_frame(chart, u + h, v, normal_seed, isothermal_tol)[7]
        e1_um = _tangent_and_normal_frame(chart, u - h, v, normal_seed, isothermal_tol)[7]
        e1_vp = _tangent_and_normal_frame(chart, u, v + h, normal_seed, isothermal_tol)[7]
        e1_vm = _tangent_and_normal_frame(chart, u, v - h, normal_seed, isothermal_tol)[7]
        de1_du = (e1_up - e1_um) / (2 * h)
        de1_dv = (e1_vp - e1_vm) / (2 * h)
        beta1 = float(-inner(de1_du, e2)) / f
        beta2 = float(-inner(de1_dv, e2)) / f
    except (DomainError, DegenerateTangentError, NonLorentzianMetricError,
            NotIsothermalError, NormalFrameDegeneracyError):
        beta1 = float("nan")
        beta2 = float("nan")

    return FundamentalData(u=u, v=v, E=E, F=F, G=G, f=f, x=x, y=y, e1=e1, e2=e2,
                           a=a, b=b, c=c, d=d,
                           sigma_xx=sigma_xx, sigma_xy=sigma_xy, sigma_yy=sigma_yy,
                           gamma1=gamma1, gamma2=gamma2, beta1=beta1, beta2=beta2)


class SurfaceClass(enum.Enum):
    GENERAL_TYPE = "general_type"
    SUPER_CONFORMAL = "super_conformal"
    THIRD_CLASS = "third_class"
    DEGENERATE_POINT = "degenerate_point"


@dataclass(frozen=True)
class CurvatureReport:
    """Curvatures and classification derived from fundamental data."""

    K: float
    kappa: float
    H_vector: np.ndarray
    H_norm2: float
    discriminant: float
    first_normal_dim: int
    surface_class: SurfaceClass


def curvature_report(fd: FundamentalData, tol_deg: float = DEGENERACY_TOL) -> CurvatureReport:
    """Gauss curvature K = b^2 - a^2 + c^2 - d^2, normal curvature kappa = 2(bc - ad).

    The mean curvature vector is (sigma(x,x) - sigma(y,y))/2. The first
    normal space dimension is the singular-value rank of the coefficient
    matrix [[a, b], [c, d]] at cutoff tol_deg. Classification: degenerate
    point when both curvatures vanish within tol_deg; otherwise by the sign
    of K^2 - kappa^2 against +/- tol_deg.
    """
    K = fd.b ** 2 - fd.a ** 2 + fd.c ** 2 - fd.d ** 2
    kappa = 2.0 * (fd.b * fd.c - fd.a * fd.d)
    H = (fd.sigma_xx - fd.sigma_yy) / 2.0
    disc = K * K - kappa * kappa
    svals = np.linalg.svd(np.array([[fd.a, fd.b], [fd.c, fd.d]]), compute_uv=False)
    dim = int(np.sum(svals > tol_deg))
    if abs(K) <= tol_deg and abs(kappa) <= tol_deg:
        cls = SurfaceClass.DEGENERATE_POINT
    elif disc > tol_deg:
        cls = SurfaceClass.GENERAL_TYPE
    elif disc < -tol_deg:
        cls = SurfaceClass.THIRD_CLASS
    else:
        cls = SurfaceClass.SUPER_CONFORMAL
    return CurvatureReport(K=K, kappa=kappa, H_vector=H, H_norm2=float(inner(H, H)),
                           discriminant=disc, first_normal_dim=dim, surface_class=cls)


def frame_free_gauss_curvature(fd: FundamentalData) -> float:
    """K via inner products of the second form, independent of {e1, e2}.

    Brute-force cross-check for :func:`curvature_report`:
    (<s(x,x), s(y,y)> - <s(x,y), s(x,y)>) / (<x,x><y,y> - <x,y>^2).
    """
    num = inner(fd.sigma_xx, fd.sigma_yy) - inner(fd.sigma_xy, fd.sigma_xy)
    den = inner(fd.x, fd.x) * inner(fd.y, fd.y) - inner(fd.x, fd.y) ** 2
    return float(num / den)


def minimality_residual(chart: SurfaceChart, grid: Iterable[Tuple[float, float]]) -> float:
    """Max Euclidean norm of the mean curvature vector over the grid points."""
    worst = 0.0
    for (u, v) in grid:
        fd = second_form(chart, u, v)
        H = (fd.sigma_xx - fd.sigma_yy) / 2.0
        worst = max(worst, float(np.sqrt(np.dot(H, H))))
    return worst


class HyperplaneCharacter(enum.Enum):
    DEGENERATE = "degenerate"
    NON_DEGENERATE = "non_degenerate"


@dataclass(frozen=True)
class HyperplaneFit:
    contained: bool
    residual: float
    normal: Optional[np.ndarray]
    character: Optional[HyperplaneCharacter]


def hyperplane_containment(chart: SurfaceChart, samples: Sequence[Tuple[float, float]],
                           tol: float) -> HyperplaneFit:
    """Least-squares affine-hyperplane fit of sampled positions.

    The best-fit linear relation sum_k n_k x_k = const comes from the
    smallest singular vector of the centred sample matrix; containment
    means the max residual stays below tol. The metric normal vector of
    that hyperplane has the same coefficient signature, so the fitted
    coefficient vector itself is classified via its causal character
    (degenerate hyperplane iff lightlike).
    """
    if len(samples) < 5:
        raise InsufficientSamplesError(f"hyperplane fit needs >= 5 samples, got {len(samples)}")
    pts = np.stack([chart.at(u, v) for (u, v) in samples])
    centred = pts - pts.mean(axis=0)
    _, svals, vt = np.linalg.svd(centred, full_matrices=True)
    normal = vt[-1]
    residual = float(np.max(np.abs(centred @ normal)))
    if residual > tol:
        return HyperplaneFit(False, residual, None, None)
    char = (HyperplaneCharacter.DEGENERATE
            if causal_character(normal) is CausalCharacter.LIGHTLIKE
            else HyperplaneCharacter.NON_DEGENERATE)
    return HyperplaneFit(True, residual, normal, char)
