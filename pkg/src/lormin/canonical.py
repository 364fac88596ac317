"""Distinguished tangent directions, invariant pair (mu, nu), canonical parameters.

At a general-type point (two-dimensional first normal space and
K^2 - kappa^2 > 0) a hyperbolic rotation of the tangent frame by the angle
phi with tanh(4 phi) = 2(ac - bd)/(b^2 - a^2 + d^2 - c^2) makes the two
second-form vectors orthogonal. Normalising them yields the frame
{x, y, n1, n2} with sigma(x,x) = nu n1 and sigma(x,y) = mu n2.

Sign conventions (the construction leaves four signs free; these make the
output deterministic): n1 and n2 are oriented so that nu > 0 and mu > 0,
and of the pair (x, y) / (-x, -y) we keep the one whose x has a positive
first non-vanishing component. Under these conventions kappa = -2 mu nu
is reported negative.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .analyzer import FundamentalData, curvature_report
from .errors import (
    DomainError,
    EmptyGridError,
    LightlikeSecondFormError,
    NearSuperconformalError,
    NotGeneralTypeError,
)
from .fields import ScalarField
from .neutral import inner

#: Points with K^2 - kappa^2 <= band * (K^2 + kappa^2) are rejected as not general type.
SUPERCONFORMAL_BAND = 1e-10


@dataclass(frozen=True)
class GeometricInvariants:
    """The invariant pair (mu, nu), sign epsilon, curvatures and the frame."""

    mu: float
    nu: float
    epsilon: int
    K: float
    kappa: float
    phi: float
    alpha_ratio: float
    x: np.ndarray
    y: np.ndarray
    n1: np.ndarray
    n2: np.ndarray

    @property
    def frame(self) -> np.ndarray:
        return np.stack([self.x, self.y, self.n1, self.n2])


def extract_frame(fd: FundamentalData, tol: float = 1e-9) -> GeometricInvariants:
    """Distinguished frame and invariants at a general-type point.

    Preconditions: K^2 - kappa^2 > 0 with a relative margin (see
    :data:`SUPERCONFORMAL_BAND`) and rank-2 second form. K and kappa in the
    result are recomputed from the invariants: K = -eps (mu^2 + nu^2),
    kappa = -2 mu nu.
    """
    report = curvature_report(fd)
    K0, kappa0 = report.K, report.kappa
    disc = K0 * K0 - kappa0 * kappa0
    if disc <= tol or disc <= SUPERCONFORMAL_BAND * (K0 * K0 + kappa0 * kappa0):
        raise NotGeneralTypeError(
            f"K^2 - kappa^2 = {disc:g} lacks a positive margin at ({fd.u}, {fd.v})"
        )
    if report.first_normal_dim != 2:
        raise NotGeneralTypeError(
            f"first normal space has dimension {report.first_normal_dim}, need 2"
        )

    ac_bd = fd.a * fd.c - fd.b * fd.d
    if abs(ac_bd) <= tol:
        phi = 0.0
        alpha = 0.0
    else:
        denom = fd.b ** 2 - fd.a ** 2 + fd.d ** 2 - fd.c ** 2
        alpha = 2.0 * ac_bd / denom
        if abs(alpha) >= 1.0 - 1e-12:
            raise NotGeneralTypeError(
                f"|tanh 4 phi| = {abs(alpha):g} not inside the unit interval"
            )
        phi = 0.25 * np.arctanh(alpha)

    # rotate the second form: sigma rotates through the doubled angle
    ch, sh = np.cosh(2.0 * phi), np.sinh(2.0 * phi)
    s_xx = ch * fd.sigma_xx + sh * fd.sigma_xy
    s_xy = sh * fd.sigma_xx + ch * fd.sigma_xy
    q_xx = float(inner(s_xx, s_xx))
    q_xy = float(inner(s_xy, s_xy))
    scale = max(float(np.dot(s_xx, s_xx)), float(np.dot(s_xy, s_xy)), 1e-300)
    if abs(q_xx) <= tol * scale or abs(q_xy) <= tol * scale:
        raise LightlikeSecondFormError(
            "rotated second-form vector is lightlike; numerical breakdown"
        )

    nu = float(np.sqrt(abs(q_xx)))
    mu = float(np.sqrt(abs(q_xy)))
    n1 = s_xx / nu
    n2 = s_xy / mu
    epsilon = 1 if q_xx > 0.0 else -1

    x_bar = np.cosh(phi) * fd.x + np.sinh(phi) * fd.y
    y_bar = np.sinh(phi) * fd.x + np.cosh(phi) * fd.y
    nonzero = np.nonzero(np.abs(x_bar) > 1e-14)[0]
    if nonzero.size and x_bar[nonzero[0]] < 0.0:
        x_bar = -x_bar
        y_bar = -y_bar

    return GeometricInvariants(
        mu=mu, nu=nu, epsilon=epsilon,
        K=-epsilon * (mu * mu + nu * nu), kappa=-2.0 * mu * nu,
        phi=float(phi), alpha_ratio=float(alpha),
        x=x_bar, y=y_bar, n1=n1, n2=n2,
    )


@dataclass(frozen=True)
class CanonicalCheck:
    """Whether sampled parameters are canonical: |mu^2 - nu^2| f^4 constant and equal to 1."""

    is_canonical: bool
    constant_c: float
    defect: float


def check_canonical(invariants: Sequence[GeometricInvariants],
                    f_values: Sequence[float], tol: float = 1e-6) -> CanonicalCheck:
    """Test the canonical-parameter identity on aligned grids.

    On any conformal-Lorentz parametrisation of a general-type minimal
    surface the product |mu^2 - nu^2| f^4 is constant; the parameters are
    canonical precisely when that constant is 1. ``constant_c`` is the
    fourth root of the grid mean, i.e. the parameter rescale factor that
    would make the chart canonical.
    """
    if len(invariants) == 0:
        raise EmptyGridError("canonical check needs at least one grid point")
    if len(invariants) != len(f_values):
        raise EmptyGridError("invariants grid and f grid must be aligned")
    q = np.array([abs(g.mu ** 2 - g.nu ** 2) * f ** 4
                  for g, f in zip(invariants, f_values)])
    constant = float(np.mean(q))
    defect = float(np.max(np.abs(q - constant)))
    constant_c = constant ** 0.25
    return CanonicalCheck(
        is_canonical=bool(defect <= tol and abs(constant_c - 1.0) <= tol),
        constant_c=constant_c,
        defect=defect,
    )


def _quarter_root_diff(mu_val: np.ndarray, nu_val: np.ndarray) -> np.ndarray:
    return np.abs(mu_val * mu_val - nu_val * nu_val) ** 0.25


def _log_ratio(mu_val: np.ndarray, nu_val: np.ndarray) -> np.ndarray:
    return np.log(np.abs((mu_val + nu_val) / (mu_val - nu_val)))


def _superconformal_guard(mu_field: ScalarField, nu_field: ScalarField, u, v):
    m = mu_field._values(u, v)
    n = nu_field._values(u, v)
    if np.any(np.abs(m * m - n * n) <= SUPERCONFORMAL_BAND * (m * m + n * n)):
        raise NearSuperconformalError(
            "mu^2 - nu^2 vanishes on the derivative stencil"
        )


def gamma_beta_from_invariants(mu_field: ScalarField, nu_field: ScalarField,
                               u, v, step: Optional[float] = None) -> Tuple:
    """Connection coefficients of a canonical parametrisation from (mu, nu).

    gamma1 = d_v |mu^2 - nu^2|^(1/4), gamma2 the u-derivative, and
    beta1/beta2 = (|mu^2 - nu^2|^(1/4) / 2) times the v/u-derivative of
    ln |(mu + nu)/(mu - nu)|, all by central differences.
    """
    h = step if step is not None else mu_field.fd_step
    for du, dv in ((h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h), (0.0, 0.0)):
        _superconformal_guard(mu_field, nu_field, np.asarray(u) + du, np.asarray(v) + dv)

    def qr(uu, vv):
        return _quarter_root_diff(mu_field._values(uu, vv), nu_field._values(uu, vv))

    def lr(uu, vv):
        return _log_ratio(mu_field._values(uu, vv), nu_field._values(uu, vv))

    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if not mu_field.domain.contains(u, v, margin=h) or not nu_field.domain.contains(u, v, margin=h):
        raise DomainError("gamma/beta stencil leaves the field domain")
    gamma1 = (qr(u, v + h) - qr(u, v - h)) / (2.0 * h)
    gamma2 = (qr(u + h, v) - qr(u - h, v)) / (2.0 * h)
    half_qr = 0.5 * qr(u, v)
    beta1 = half_qr * (lr(u, v + h) - lr(u, v - h)) / (2.0 * h)
    beta2 = half_qr * (lr(u + h, v) - lr(u - h, v)) / (2.0 * h)
    return gamma1, gamma2, beta1, beta2
