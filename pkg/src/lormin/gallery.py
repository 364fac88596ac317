"""Bundled closed-form demo surface with known invariants.

The demo is a minimal Lorentz surface of general type whose invariant pair
depends on one variable only::

    mu(u) = 2 / w(t)^(3/2),    nu(u) = (1 + 2 cos^2 t) / (sin^2 t  w(t)^(3/2)),

with t = u / 3^(1/4) in (pi/3, 2 pi/3) and w(t) = 1 - 4 cos^2 t. The pair
solves the natural system with a timelike first normal direction
(epsilon = -1) and satisfies mu^2 - nu^2 = 3 / (sin^4 t w^2) and
(mu + nu)/(mu - nu) = 3 / w. The surface itself, its distinguished frame,
and the generating null-curve pair all have closed forms, so every stage of
the pipeline can be checked against exact values. At t = pi/2: mu = 2,
nu = 1, K = 5, kappa = -4.

Positions and frames are given in auxiliary coordinates (t, s); canonical
parameters are (u, v) = 3^(1/4) (t, s).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .analyzer import SurfaceChart
from .errors import GridMismatchError
from .fields import Rectangle, ScalarField
from .nullcurves import NullCurvePair, trig_null_curve
from .synthesis import FrameState, GridSpec, SynthesizedSurface

#: Scale between canonical and auxiliary parameters: u = SCALE * t.
SCALE = 3.0 ** 0.25

#: Auxiliary parameter interval on which the demo lives.
T_MIN, T_MAX = math.pi / 3.0, 2.0 * math.pi / 3.0

#: Margin (in t) that evaluation grids keep from the singular interval ends.
GUARD_T = 0.15

#: Smaller margin used for the *field domains*, leaving stencil headroom
#: between the guarded evaluation box and the domain boundary.
DOMAIN_MARGIN_T = 0.05

MU_TEXT = "2/(1 - 4*cos(u/3^0.25)^2)^1.5"
NU_TEXT = "(1 + 2*cos(u/3^0.25)^2)/(sin(u/3^0.25)^2*(1 - 4*cos(u/3^0.25)^2)^1.5)"


def _w(t):
    return 1.0 - 4.0 * np.cos(t) ** 2


def mu_value(u):
    """mu as a function of the canonical parameter u."""
    t = np.asarray(u, dtype=float) / SCALE
    return 2.0 / _w(t) ** 1.5


def nu_value(u):
    t = np.asarray(u, dtype=float) / SCALE
    return (1.0 + 2.0 * np.cos(t) ** 2) / (np.sin(t) ** 2 * _w(t) ** 1.5)


def surface_position_ts(t, s):
    """Closed-form position in auxiliary (t, s) coordinates (offset constant zero)."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    return np.stack([
        0.5 * np.sin(2 * t) * np.cos(2 * s),
        0.5 * np.sin(2 * t) * np.sin(2 * s),
        np.sin(t) * np.cos(s),
        np.sin(t) * np.sin(s),
    ], axis=-1)


def _surface_jet_ts(t, s):
    """(z_t, z_s, z_tt, z_ts, z_ss) of the closed form; z_ss = z_tt (wave identity)."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    z_t = np.stack([np.cos(2 * t) * np.cos(2 * s), np.cos(2 * t) * np.sin(2 * s),
                    np.cos(t) * np.cos(s), np.cos(t) * np.sin(s)], axis=-1)
    z_s = np.stack([-np.sin(2 * t) * np.sin(2 * s), np.sin(2 * t) * np.cos(2 * s),
                    -np.sin(t) * np.sin(s), np.sin(t) * np.cos(s)], axis=-1)
    z_tt = np.stack([-2 * np.sin(2 * t) * np.cos(2 * s), -2 * np.sin(2 * t) * np.sin(2 * s),
                     -np.sin(t) * np.cos(s), -np.sin(t) * np.sin(s)], axis=-1)
    z_ts = np.stack([-2 * np.cos(2 * t) * np.sin(2 * s), 2 * np.cos(2 * t) * np.cos(2 * s),
                     -np.cos(t) * np.sin(s), np.cos(t) * np.cos(s)], axis=-1)
    return z_t, z_s, z_tt, z_ts, z_tt


def frame_closed_form(t: float, s: float) -> FrameState:
    """Distinguished frame {x, y, n1, n2} of the demo surface at (t, s)."""
    pre = 1.0 / (np.sin(t) * np.sqrt(_w(t)))
    x = pre * np.array([np.cos(2 * t) * np.cos(2 * s), np.cos(2 * t) * np.sin(2 * s),
                        np.cos(t) * np.cos(s), np.cos(t) * np.sin(s)])
    y = pre * np.array([-np.sin(2 * t) * np.sin(2 * s), np.sin(2 * t) * np.cos(2 * s),
                        -np.sin(t) * np.sin(s), np.sin(t) * np.cos(s)])
    n1 = pre * np.array([np.cos(t) * np.cos(2 * s), np.cos(t) * np.sin(2 * s),
                         np.cos(2 * t) * np.cos(s), np.cos(2 * t) * np.sin(s)])
    n2 = pre * np.array([np.sin(t) * np.sin(2 * s), -np.sin(t) * np.cos(2 * s),
                         np.sin(2 * t) * np.sin(s), -np.sin(2 * t) * np.cos(s)])
    return FrameState(x=x, y=y, n1=n1, n2=n2, at_point=(SCALE * t, SCALE * s))


@dataclass(frozen=True)
class ExampleBundle:
    """All closed forms of the demo surface, wired for the pipeline."""

    mu: ScalarField
    nu: ScalarField
    epsilon: int
    mu_text: str
    nu_text: str
    chart_canonical: SurfaceChart   # canonical (u, v), analytic jets
    chart_ts: SurfaceChart          # auxiliary (t, s), analytic jets
    null_pair: NullCurvePair
    guarded_t: Tuple[float, float]

    @property
    def t_center(self) -> float:
        return math.pi / 2.0

    def initial_frame(self) -> FrameState:
        """Frame at t = pi/2, s = 0 in canonical coordinates: the synthesis seed."""
        return frame_closed_form(self.t_center, 0.0)

    def initial_point(self) -> np.ndarray:
        return surface_position_ts(self.t_center, 0.0)

    def surface_closed_form(self, t, s) -> np.ndarray:
        return surface_position_ts(t, s)

    def frame_closed_form(self, t: float, s: float) -> FrameState:
        return frame_closed_form(t, s)

    def residual_grid(self, n: int = 15, v_half_width: float = 0.3) -> np.ndarray:
        """n x n canonical-coordinate grid over the guarded t-range."""
        us = SCALE * np.linspace(self.guarded_t[0], self.guarded_t[1], n)
        vs = np.linspace(-v_half_width, v_half_width, n)
        U, V = np.meshgrid(us, vs, indexing="ij")
        return np.column_stack([U.ravel(), V.ravel()])

    def synthesis_spec(self, n: int = 200, h: float = 1e-3) -> GridSpec:
        """Lattice starting at the t = pi/2 seed point, extending in +u and +v."""
        return GridSpec(u0=SCALE * self.t_center, v0=0.0, h=h, n_u=n, n_v=n)


def example(fd_step: Optional[float] = 1e-4) -> ExampleBundle:
    """The demo bundle; ``fd_step`` is the invariant fields' derivative step."""
    lo_t, hi_t = T_MIN + DOMAIN_MARGIN_T, T_MAX - DOMAIN_MARGIN_T
    domain_uv = Rectangle(SCALE * lo_t, SCALE * hi_t, -1.0, 1.0)
    mu = ScalarField(lambda u, v: mu_value(u) + 0.0 * np.asarray(v), domain_uv, fd_step)
    nu = ScalarField(lambda u, v: nu_value(u) + 0.0 * np.asarray(v), domain_uv, fd_step)

    def position_uv(u, v):
        return surface_position_ts(np.asarray(u) / SCALE, np.asarray(v) / SCALE)

    def derivatives_uv(u, v):
        z_t, z_s, z_tt, z_ts, z_ss = _surface_jet_ts(np.asarray(u) / SCALE, np.asarray(v) / SCALE)
        root3 = math.sqrt(3.0)
        return (z_t / SCALE, z_s / SCALE, z_tt / root3, z_ts / root3, z_ss / root3)

    chart_uv = SurfaceChart(position_uv, domain_uv, derivatives=derivatives_uv)

    domain_ts = Rectangle(lo_t, hi_t, -1.0, 1.0)
    chart_ts = SurfaceChart(surface_position_ts, domain_ts,
                            derivatives=lambda t, s: _surface_jet_ts(t, s))

    # z(t, s) = alpha(t + s) + beta(t - s) for these two null curves;
    # p + q then stays inside (2 pi/3, 4 pi/3) where the pair is transversal
    pair = NullCurvePair(
        alpha=trig_null_curve(0.5, 2.0, 1.0, 0.0, 0.0, (lo_t, hi_t)),
        beta=trig_null_curve(0.5, -2.0, -1.0, 0.0, 0.0, (lo_t, hi_t)),
    )

    return ExampleBundle(
        mu=mu, nu=nu, epsilon=-1, mu_text=MU_TEXT, nu_text=NU_TEXT,
        chart_canonical=chart_uv, chart_ts=chart_ts, null_pair=pair,
        guarded_t=(T_MIN + GUARD_T, T_MAX - GUARD_T),
    )


def oracle_compare(surface: SynthesizedSurface, bundle: ExampleBundle,
                   align_translation: bool = False) -> float:
    """Max pointwise Euclidean discrepancy between a mesh and the closed form.

    With ``align_translation`` the best constant offset (the free additive
    constant of the closed form) is removed first.
    """
    if surface.positions is None:
        raise GridMismatchError("surface has no positions to compare")
    ts = surface.us / SCALE
    ss = surface.vs / SCALE
    if ts[0] <= T_MIN or ts[-1] >= T_MAX:
        raise GridMismatchError(
            f"mesh t-range [{ts[0]:g}, {ts[-1]:g}] leaves the demo interval"
        )
    T, S = np.meshgrid(ts, ss, indexing="ij")
    oracle = surface_position_ts(T, S)
    diff = surface.positions - oracle
    if align_translation:
        diff = diff - diff.mean(axis=(0, 1))
    return float(np.max(np.sqrt(np.sum(diff * diff, axis=-1))))
