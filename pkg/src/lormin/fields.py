"""Scalar fields over a rectangle: evaluation, FD derivatives, hyperbolic Laplacian.

A :class:`ScalarField` wraps either a parsed expression (with bound
parameter values) or a host-supplied callback. Callbacks must accept numpy
arrays for (u, v) and evaluate elementwise. Fields are immutable after
construction; every operation here is a pure function.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Union

import numpy as np

from . import expr as ex
from .errors import DomainError, LorminError, NonFiniteResultError

#: Default finite-difference step as a fraction of the smaller domain extent.
DEFAULT_FD_FRACTION = 1e-4


@dataclass(frozen=True)
class Rectangle:
    """Closed axis-aligned parameter rectangle [u_min, u_max] x [v_min, v_max]."""

    u_min: float
    u_max: float
    v_min: float
    v_max: float

    def __post_init__(self):
        if not (self.u_min < self.u_max and self.v_min < self.v_max):
            raise LorminError(f"domain has no area: {self}")

    @property
    def extents(self) -> tuple:
        return (self.u_max - self.u_min, self.v_max - self.v_min)

    def contains(self, u, v, margin: float = 0.0) -> bool:
        u = np.asarray(u)
        v = np.asarray(v)
        return bool(
            np.all(u >= self.u_min + margin) and np.all(u <= self.u_max - margin)
            and np.all(v >= self.v_min + margin) and np.all(v <= self.v_max - margin)
        )


def default_fd_step(domain: Rectangle) -> float:
    return DEFAULT_FD_FRACTION * min(domain.extents)


@dataclass(frozen=True)
class ScalarField:
    """A real-valued function of (u, v) on a rectangle.

    ``source`` is either an :mod:`lormin.expr` tree or a vectorised callback
    ``f(u, v) -> array``. Expression parameters are bound once, here, via
    ``parameters``; the field is closed thereafter.
    """

    source: Union[ex.Expression, Callable]
    domain: Rectangle
    fd_step: Optional[float] = None
    parameters: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        step = self.fd_step if self.fd_step is not None else default_fd_step(self.domain)
        if not (0.0 < step < min(self.domain.extents) / 4.0):
            raise LorminError(
                f"fd_step {step} must be positive and below a quarter of the domain extents"
            )
        object.__setattr__(self, "fd_step", float(step))
        if not callable(self.source):
            missing = ex.free_parameters(self.source) - set(self.parameters)
            if missing:
                raise LorminError(f"unbound parameters: {sorted(missing)}")

    # -- raw evaluation (no domain check); used by stencils after one check --
    def _values(self, u, v):
        if callable(self.source):
            out = self.source(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        else:
            out = ex.evaluate(self.source, np.asarray(u, dtype=float),
                              np.asarray(v, dtype=float), self.parameters)
        return np.asarray(out, dtype=float)

    def _checked(self, u, v, margin: float = 0.0):
        if not self.domain.contains(u, v, margin=margin):
            raise DomainError(
                f"evaluation outside domain {self.domain} (required margin {margin:g})"
            )
        out = self._values(u, v)
        if not np.all(np.isfinite(out)):
            raise NonFiniteResultError("field evaluation produced a non-finite value")
        return out

    def eval(self, u, v):
        """Field value at (u, v); arrays broadcast. Raises on out-of-domain or non-finite."""
        out = self._checked(u, v)
        return float(out) if np.ndim(out) == 0 else out

    __call__ = eval


def field_from_text(text: str, domain: Rectangle, fd_step: Optional[float] = None,
                    parameters: Optional[Mapping[str, float]] = None) -> ScalarField:
    """Parse expression text and wrap it as a field; parameters are bound here."""
    params = dict(parameters or {})
    tree = ex.parse(text, parameters=params.keys())
    return ScalarField(tree, domain, fd_step, params)


# --- finite differences -------------------------------------------------------

def d_u(f: ScalarField, u, v, step: Optional[float] = None):
    """First u-derivative by central differences, O(h^2)."""
    h = step if step is not None else f.fd_step
    if not f.domain.contains(u, v, margin=h):
        raise DomainError("derivative stencil leaves the domain")
    return (f._values(np.asarray(u) + h, v) - f._values(np.asarray(u) - h, v)) / (2.0 * h)


def d_v(f: ScalarField, u, v, step: Optional[float] = None):
    """First v-derivative by central differences, O(h^2)."""
    h = step if step is not None else f.fd_step
    if not f.domain.contains(u, v, margin=h):
        raise DomainError("derivative stencil leaves the domain")
    return (f._values(u, np.asarray(v) + h) - f._values(u, np.asarray(v) - h)) / (2.0 * h)


def hyperbolic_laplacian(f: ScalarField, u, v, step: Optional[float] = None):
    """d^2/du^2 - d^2/dv^2 by central second differences with step h = fd_step.

    Truncation error is O(h^2) for C^4 fields. The stencil must stay inside
    the field domain; everything else propagates field evaluation errors.
    """
    h = step if step is not None else f.fd_step
    if not f.domain.contains(u, v, margin=h):
        raise DomainError("Laplacian stencil leaves the domain")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    center = f._values(u, v)
    ddu = f._values(u + h, v) - 2.0 * center + f._values(u - h, v)
    ddv = f._values(u, v + h) - 2.0 * center + f._values(u, v - h)
    out = (ddu - ddv) / (h * h)
    if not np.all(np.isfinite(out)):
        raise NonFiniteResultError("Laplacian stencil produced a non-finite value")
    return float(out) if np.ndim(out) == 0 else out


def compose(fn: Callable, *fields: ScalarField, fd_step: Optional[float] = None) -> ScalarField:
    """Pointwise composition fn(f1(u,v), f2(u,v), ...) as a new field.

    The domain is the common domain of the inputs (they must agree); the
    composed field gets ``fd_step`` or the first input's step.
    """
    if not fields:
        raise LorminError("compose needs at least one field")
    dom = fields[0].domain
    for g in fields[1:]:
        if g.domain != dom:
            raise LorminError("composed fields must share a domain")

    def call(u, v):
        return fn(*(g._values(u, v) for g in fields))

    return ScalarField(call, dom, fd_step if fd_step is not None else fields[0].fd_step)
