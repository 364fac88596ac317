"""Residuals of the two natural PDE systems and the (mu, nu) <-> (K, kappa) maps.

A general-type minimal Lorentz chart in canonical parameters satisfies,
with Lh = d^2/du^2 - d^2/dv^2 the hyperbolic Laplace operator::

    sqrt|mu^2 - nu^2|  Lh ln|mu^2 - nu^2|          = -4 eps (mu^2 + nu^2)
    sqrt|mu^2 - nu^2|  Lh ln|(mu + nu)/(mu - nu)|  = -4 eps mu nu

equivalently, in terms of the curvatures K = -eps(mu^2 + nu^2) and
kappa = -2 mu nu::

    (K^2 - kappa^2)^(1/4)  Lh ln(K^2 - kappa^2)                  = 8 K
    (K^2 - kappa^2)^(1/4)  Lh ln((K + eps kappa)/(K - eps kappa)) = 4 eps kappa

Residuals are signed (left side minus right side), reported pointwise with
max-norm summaries, so a failing candidate shows where it fails.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import (
    DomainError,
    EmptyGridError,
    InconsistentCurvaturesError,
    NearSuperconformalError,
    NonFiniteResultError,
)
from .fields import ScalarField, hyperbolic_laplacian

#: Relative guard band below which mu^2 - nu^2 (or K^2 - kappa^2) counts as vanishing.
LOCUS_BAND = 1e-10


@dataclass(frozen=True)
class ResidualReport:
    """Pointwise residuals of one natural system over a grid."""

    grid: np.ndarray          # shape (N, 2), columns u, v
    r1: np.ndarray
    r2: np.ndarray
    r1_max: float
    r2_max: float
    epsilon: int
    fd_step: float
    sign_sum: np.ndarray      # sign of mu + nu per grid point (diagnostic)
    sign_diff: np.ndarray     # sign of mu - nu per grid point (diagnostic)


def _as_grid(grid) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.size == 0:
        raise EmptyGridError("residual grid is empty")
    if g.ndim != 2 or g.shape[1] != 2:
        raise DomainError(f"grid must be a sequence of (u, v) pairs, got shape {g.shape}")
    return g


def _check_eps(epsilon: int) -> int:
    if epsilon not in (+1, -1):
        raise InconsistentCurvaturesError(f"epsilon must be +1 or -1, got {epsilon}")
    return int(epsilon)


def residual_mu_nu(mu: ScalarField, nu: ScalarField, epsilon: int,
                   grid, fd_step: Optional[float] = None) -> ResidualReport:
    """Residuals of the (mu, nu) system on the given grid points.

    The Laplacian is applied to the composed log fields with step
    ``fd_step`` (default: mu's own step); grid points must be interior to
    the field domain by twice that step. Raises when |mu^2 - nu^2|
    vanishes within the guard band anywhere on a stencil.
    """
    eps = _check_eps(epsilon)
    g = _as_grid(grid)
    h = fd_step if fd_step is not None else mu.fd_step
    us, vs = g[:, 0], g[:, 1]
    if not (mu.domain.contains(us, vs, margin=2 * h) and nu.domain.contains(us, vs, margin=2 * h)):
        raise DomainError("residual grid not interior to the field domain by 2 * fd_step")

    def log_diff(u, v):
        m, n = mu._values(u, v), nu._values(u, v)
        d = m * m - n * n
        if np.any(np.abs(d) <= LOCUS_BAND * (m * m + n * n)):
            raise NearSuperconformalError("mu^2 - nu^2 vanishes on a Laplacian stencil")
        return np.log(np.abs(d))

    def log_ratio(u, v):
        m, n = mu._values(u, v), nu._values(u, v)
        return np.log(np.abs((m + n) / (m - n)))

    f1 = ScalarField(log_diff, mu.domain, h)
    f2 = ScalarField(log_ratio, mu.domain, h)
    m, n = mu._values(us, vs), nu._values(us, vs)
    root = np.sqrt(np.abs(m * m - n * n))
    lap1 = hyperbolic_laplacian(f1, us, vs)
    lap2 = hyperbolic_laplacian(f2, us, vs)
    r1 = root * lap1 + 4.0 * eps * (m * m + n * n)
    r2 = root * lap2 + 4.0 * eps * m * n
    if not (np.all(np.isfinite(r1)) and np.all(np.isfinite(r2))):
        raise NonFiniteResultError("non-finite residual value")
    return ResidualReport(grid=g, r1=np.atleast_1d(r1), r2=np.atleast_1d(r2),
                          r1_max=float(np.max(np.abs(r1))), r2_max=float(np.max(np.abs(r2))),
                          epsilon=eps, fd_step=float(h),
                          sign_sum=np.sign(np.atleast_1d(m + n)),
                          sign_diff=np.sign(np.atleast_1d(m - n)))


def residual_K_kappa(K: ScalarField, kappa: ScalarField, epsilon: int,
                     grid, fd_step: Optional[float] = None) -> ResidualReport:
    """Residuals of the (K, kappa) system on the given grid points.

    Requires K^2 - kappa^2 > 0 on all stencils and a positive
    (K + eps kappa)/(K - eps kappa) ratio (the log's argument).
    """
    eps = _check_eps(epsilon)
    g = _as_grid(grid)
    h = fd_step if fd_step is not None else K.fd_step
    us, vs = g[:, 0], g[:, 1]
    if not (K.domain.contains(us, vs, margin=2 * h) and kappa.domain.contains(us, vs, margin=2 * h)):
        raise DomainError("residual grid not interior to the field domain by 2 * fd_step")

    def checked(u, v):
        kv, xv = K._values(u, v), kappa._values(u, v)
        disc = kv * kv - xv * xv
        if np.any(disc <= LOCUS_BAND * (kv * kv + xv * xv)):
            raise NearSuperconformalError("K^2 - kappa^2 vanishes on a Laplacian stencil")
        return kv, xv, disc

    def log_disc(u, v):
        _, _, disc = checked(u, v)
        return np.log(disc)

    def log_ratio(u, v):
        kv, xv, _ = checked(u, v)
        ratio = (kv + eps * xv) / (kv - eps * xv)
        if np.any(ratio <= 0.0):
            raise DomainError("(K + eps kappa)/(K - eps kappa) is not positive")
        return np.log(ratio)

    f1 = ScalarField(log_disc, K.domain, h)
    f2 = ScalarField(log_ratio, K.domain, h)
    kv, xv, disc = checked(us, vs)
    quarter = disc ** 0.25
    r1 = quarter * hyperbolic_laplacian(f1, us, vs) - 8.0 * kv
    r2 = quarter * hyperbolic_laplacian(f2, us, vs) - 4.0 * eps * xv
    if not (np.all(np.isfinite(r1)) and np.all(np.isfinite(r2))):
        raise NonFiniteResultError("non-finite residual value")
    return ResidualReport(grid=g, r1=np.atleast_1d(r1), r2=np.atleast_1d(r2),
                          r1_max=float(np.max(np.abs(r1))), r2_max=float(np.max(np.abs(r2))),
                          epsilon=eps, fd_step=float(h),
                          sign_sum=np.sign(np.atleast_1d(kv + eps * xv)),
                          sign_diff=np.sign(np.atleast_1d(kv - eps * xv)))


def convert_mu_nu_to_K_kappa(mu, nu, epsilon: int) -> Tuple:
    """K = -eps (mu^2 + nu^2), kappa = -2 mu nu. Vectorises over arrays."""
    eps = _check_eps(epsilon)
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    K = -eps * (mu * mu + nu * nu)
    kappa = -2.0 * mu * nu
    if K.ndim == 0:
        return float(K), float(kappa)
    return K, kappa


def convert_K_kappa_to_mu_nu(K, kappa, epsilon: int, larger_mu: bool = True) -> Tuple:
    """Positive roots mu, nu with mu^2 + nu^2 = -eps K and 2 mu nu = |kappa|.

    Requires K^2 - kappa^2 > 0 and -eps K > 0. The branch |mu| > |nu| is the
    default; ``larger_mu=False`` swaps the two roots. Round-trips with
    :func:`convert_mu_nu_to_K_kappa` on positive pairs up to the ordering.
    """
    eps = _check_eps(epsilon)
    K = np.asarray(K, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    disc = K * K - kappa * kappa
    if np.any(disc < 0.0):
        raise InconsistentCurvaturesError(f"K^2 - kappa^2 = {disc} is negative")
    s = -eps * K
    if np.any(s <= 0.0):
        raise InconsistentCurvaturesError("-eps K must be positive (mu^2 + nu^2 > 0)")
    root = np.sqrt(disc)
    hi = np.sqrt((s + root) / 2.0)
    lo = np.sqrt(np.maximum(s - root, 0.0) / 2.0)
    mu, nu = (hi, lo) if larger_mu else (lo, hi)
    if mu.ndim == 0:
        return float(mu), float(nu)
    return mu, nu


def fields_K_kappa_from_mu_nu(mu: ScalarField, nu: ScalarField, epsilon: int,
                              fd_step: Optional[float] = None) -> Tuple[ScalarField, ScalarField]:
    """Curvature fields composed pointwise from invariant fields."""
    eps = _check_eps(epsilon)
    h = fd_step if fd_step is not None else mu.fd_step

    def K_call(u, v):
        m, n = mu._values(u, v), nu._values(u, v)
        return -eps * (m * m + n * n)

    def kappa_call(u, v):
        return -2.0 * mu._values(u, v) * nu._values(u, v)

    return (ScalarField(K_call, mu.domain, h), ScalarField(kappa_call, mu.domain, h))
