"""Minimal Lorentz charts as sums of two transversal null curves.

Every minimal Lorentz surface decomposes locally as z = alpha + beta where
both curves have lightlike velocity and <alpha', beta'> never vanishes. The
factory validates a candidate pair and emits the chart in
characteristic-mixed coordinates, z(u, v) = alpha(u + v) + beta(u - v), in
which the induced metric takes the conformal-Lorentz form the analyzer
expects (E = 2 <alpha', beta'> = -G, F = 0). The raw null-coordinate chart
z(u, v) = alpha(u) + beta(v) is also available but fails the analyzer's
isothermal precondition by design.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from . import expr as ex
from .analyzer import SurfaceChart
from .errors import LorminError, PairValidationError
from .fields import Rectangle
from .neutral import inner

DEFAULT_PAIR_TOL = 1e-8


@dataclass(frozen=True)
class NullCurve:
    """A curve p -> R^4 with (intended) lightlike velocity on an interval.

    ``position(p)`` is vectorised with trailing axis 4. Analytic first and
    second derivative callbacks are optional; without them derivatives come
    from central differences of step ``fd_step``.
    """

    position: Callable
    domain: Tuple[float, float]
    d1: Optional[Callable] = None
    d2: Optional[Callable] = None
    fd_step: float = 1e-6

    def __post_init__(self):
        if not self.domain[0] < self.domain[1]:
            raise LorminError(f"curve domain is empty: {self.domain}")

    def at(self, p):
        return np.asarray(self.position(np.asarray(p, dtype=float)), dtype=float)

    def velocity(self, p):
        if self.d1 is not None:
            return np.asarray(self.d1(np.asarray(p, dtype=float)), dtype=float)
        h = self.fd_step
        return (self.at(np.asarray(p) + h) - self.at(np.asarray(p) - h)) / (2 * h)

    def acceleration(self, p):
        if self.d2 is not None:
            return np.asarray(self.d2(np.asarray(p, dtype=float)), dtype=float)
        h = self.fd_step
        return (self.at(np.asarray(p) + h) - 2 * self.at(p) + self.at(np.asarray(p) - h)) / (h * h)


@dataclass(frozen=True)
class NullCurvePair:
    alpha: NullCurve
    beta: NullCurve


@dataclass(frozen=True)
class PairValidation:
    """Nullity and transversality measurements over sample grids."""

    max_null_alpha: float
    max_null_beta: float
    min_transversal: float
    passed: bool


def validate_pair(pair: NullCurvePair, samples_alpha: Sequence[float],
                  samples_beta: Sequence[float], tol: float = DEFAULT_PAIR_TOL) -> PairValidation:
    """Check <a',a'> = <b',b'> = 0 on the samples and <a',b'> != 0 on their product.

    Tolerances are relative to the velocity magnitudes. The report carries
    pass/fail; nothing is raised here.
    """
    ps = np.asarray(samples_alpha, dtype=float)
    qs = np.asarray(samples_beta, dtype=float)
    va = pair.alpha.velocity(ps)
    vb = pair.beta.velocity(qs)
    scale_a = max(float(np.max(np.sum(va * va, axis=-1))), 1e-300)
    scale_b = max(float(np.max(np.sum(vb * vb, axis=-1))), 1e-300)
    null_a = float(np.max(np.abs(inner(va, va)))) / scale_a
    null_b = float(np.max(np.abs(inner(vb, vb)))) / scale_b
    cross = inner(va[:, None, :], vb[None, :, :])
    min_cross = float(np.min(np.abs(cross))) / np.sqrt(scale_a * scale_b)
    return PairValidation(
        max_null_alpha=null_a,
        max_null_beta=null_b,
        min_transversal=min_cross,
        passed=bool(null_a <= tol and null_b <= tol and min_cross > tol),
    )


def _mixed_domain(pair: NullCurvePair) -> Rectangle:
    """Largest centred axis-aligned square with u+v and u-v inside the curve domains."""
    pa, pb = pair.alpha.domain
    qa, qb = pair.beta.domain
    u0 = ((pa + pb) / 2 + (qa + qb) / 2) / 2
    v0 = ((pa + pb) / 2 - (qa + qb) / 2) / 2
    half = min((pb - pa) / 2, (qb - qa) / 2) / 2
    if half <= 0:
        raise LorminError("curve domains leave no room for a mixed-coordinate rectangle")
    return Rectangle(u0 - half, u0 + half, v0 - half, v0 + half)


def surface_from_pair(pair: NullCurvePair, n_validation_samples: int = 40,
                      tol: float = DEFAULT_PAIR_TOL, coordinates: str = "mixed") -> SurfaceChart:
    """Chart z(u,v) = alpha(u+v) + beta(u-v) from a validated pair.

    Validation runs first on uniform samples of both domains and raises
    :class:`PairValidationError` on failure. With analytic curve
    derivatives the chart carries analytic jets (z_uu = z_vv = a'' + b'',
    z_uv = a'' - b''); otherwise jets fall back to the chart's own central
    differences, which preserve the wave identity z_uu = z_vv exactly.
    ``coordinates="null"`` returns the raw z(u,v) = alpha(u) + beta(v)
    chart instead (not isothermal in the analyzer's sense).
    """
    pa, pb = pair.alpha.domain
    qa, qb = pair.beta.domain
    report = validate_pair(pair,
                           np.linspace(pa, pb, n_validation_samples),
                           np.linspace(qa, qb, n_validation_samples), tol)
    if not report.passed:
        raise PairValidationError(
            f"curve pair failed validation: null defects ({report.max_null_alpha:.3g}, "
            f"{report.max_null_beta:.3g}), min transversality {report.min_transversal:.3g}"
        )

    if coordinates == "null":
        def position_null(u, v):
            return pair.alpha.at(u) + pair.beta.at(v)
        return SurfaceChart(position_null, Rectangle(pa, pb, qa, qb))
    if coordinates != "mixed":
        raise LorminError(f"unknown coordinate convention '{coordinates}'")

    def position(u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return pair.alpha.at(u + v) + pair.beta.at(u - v)

    derivatives = None
    if pair.alpha.d1 is not None and pair.beta.d1 is not None \
            and pair.alpha.d2 is not None and pair.beta.d2 is not None:
        def derivatives(u, v):
            da, db = pair.alpha.d1(u + v), pair.beta.d1(u - v)
            dda, ddb = pair.alpha.d2(u + v), pair.beta.d2(u - v)
            return (da + db, da - db, dda + ddb, dda - ddb, dda + ddb)

    return SurfaceChart(position, _mixed_domain(pair), derivatives=derivatives)


# --- constructors --------------------------------------------------------------

def trig_null_curve(radius: float, k: float, m: float, theta0: float, phi0: float,
                    domain: Tuple[float, float]) -> NullCurve:
    """Null curve with velocity r (cos th, sin th, cos ph, sin ph), th = th0 + k p, ph = ph0 + m p.

    The velocity splits into two unit circles traversed at rates k and m,
    so its neutral square vanishes identically; k and m must be non-zero
    for the closed-form antiderivative used for the position.
    """
    if k == 0.0 or m == 0.0:
        raise LorminError("trig null curve needs non-zero frequencies")
    r = float(radius)

    def position(p):
        th = theta0 + k * p
        ph = phi0 + m * p
        return np.stack([r * np.sin(th) / k, -r * np.cos(th) / k,
                         r * np.sin(ph) / m, -r * np.cos(ph) / m], axis=-1)

    def d1(p):
        th = theta0 + k * p
        ph = phi0 + m * p
        return np.stack([r * np.cos(th), r * np.sin(th),
                         r * np.cos(ph), r * np.sin(ph)], axis=-1)

    def d2(p):
        th = theta0 + k * p
        ph = phi0 + m * p
        return np.stack([-r * k * np.sin(th), r * k * np.cos(th),
                         -r * m * np.sin(ph), r * m * np.cos(ph)], axis=-1)

    return NullCurve(position, domain, d1=d1, d2=d2)


def affine_null_curve(direction, domain: Tuple[float, float]) -> NullCurve:
    """Straight line p -> p * L along a lightlike direction L."""
    L = np.asarray(direction, dtype=float)
    if abs(inner(L, L)) > DEFAULT_PAIR_TOL * max(1.0, float(np.dot(L, L))):
        raise LorminError(f"direction {L} is not lightlike")

    def position(p):
        return np.multiply.outer(np.asarray(p, dtype=float), L)

    def d1(p):
        return np.broadcast_to(L, np.shape(p) + (4,)).copy()

    def d2(p):
        return np.zeros(np.shape(p) + (4,))

    return NullCurve(position, domain, d1=d1, d2=d2)


def null_curve_from_expressions(components: Sequence[str], domain: Tuple[float, float],
                                fd_step: float = 1e-6) -> NullCurve:
    """Curve whose four components are expressions in the variable u."""
    if len(components) != 4:
        raise LorminError(f"a curve needs 4 component expressions, got {len(components)}")
    trees = [ex.parse(text) for text in components]

    def position(p):
        p = np.asarray(p, dtype=float)
        vals = [np.broadcast_to(ex.evaluate(t, p, 0.0), p.shape) for t in trees]
        return np.stack(vals, axis=-1)

    return NullCurve(position, domain, fd_step=fd_step)
