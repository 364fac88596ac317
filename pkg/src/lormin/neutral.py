"""Linear algebra of flat 4-space with the neutral (+,+,-,-) inner product.

Vectors are plain ``numpy`` arrays of shape (4,); :func:`neutral_vector`
validates and converts. All operations are pure functions, values are
immutable by convention and safe to share across threads.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import LorminError

#: Diagonal of the metric: x1^2 + x2^2 - x3^2 - x4^2.
METRIC_DIAGONAL = np.array([1.0, 1.0, -1.0, -1.0])

#: Relative tolerance used to call a squared length "zero".
DEFAULT_ZERO_TOL = 1e-10


def neutral_vector(components) -> np.ndarray:
    """Convert to a float 4-vector, rejecting non-finite components."""
    v = np.asarray(components, dtype=float)
    if v.shape != (4,):
        raise LorminError(f"expected 4 components, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise LorminError(f"non-finite vector components: {v}")
    return v


def inner(a: np.ndarray, b: np.ndarray) -> float:
    """Neutral inner product a1*b1 + a2*b2 - a3*b3 - a4*b4.

    Accepts stacked arrays with trailing axis 4 and contracts the last axis.
    """
    return np.sum(METRIC_DIAGONAL * np.asarray(a) * np.asarray(b), axis=-1)


class CausalCharacter(enum.Enum):
    SPACELIKE = "spacelike"
    TIMELIKE = "timelike"
    LIGHTLIKE = "lightlike"


def causal_character(v, tol: float = DEFAULT_ZERO_TOL) -> CausalCharacter:
    """Classify a vector by the sign of its self inner product.

    The zero vector counts as spacelike. A squared length is treated as zero
    when |<v,v>| <= tol * max(1, ||v||^2_euclid).
    """
    v = np.asarray(v, dtype=float)
    q = float(inner(v, v))
    scale = max(1.0, float(np.dot(v, v)))
    if abs(q) <= tol * scale:
        if np.all(v == 0.0):
            return CausalCharacter.SPACELIKE
        return CausalCharacter.LIGHTLIKE
    return CausalCharacter.SPACELIKE if q > 0.0 else CausalCharacter.TIMELIKE


@dataclass(frozen=True)
class OrthonormalityDefect:
    """Defects of the ten pairwise inner-product constraints of a frame.

    ``phi`` holds, in this fixed order:
    <x,x>-1, <y,y>+1, <n1,n1>-eps, <n2,n2>+eps,
    <x,y>, <x,n1>, <x,n2>, <y,n1>, <y,n2>, <n1,n2>.
    All ten vanish exactly for an orthonormal frame of the stated signature.
    """

    phi: np.ndarray
    epsilon: int

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.phi)))


def frame_defect(x, y, n1, n2, epsilon: int) -> OrthonormalityDefect:
    """Measure how far (x, y, n1, n2) is from an orthonormal frame.

    The target signature is <x,x>=1, <y,y>=-1, <n1,n1>=eps, <n2,n2>=-eps
    with all six cross products zero; epsilon must be +1 or -1.
    """
    if epsilon not in (+1, -1):
        raise LorminError(f"epsilon must be +1 or -1, got {epsilon}")
    phi = np.array([
        inner(x, x) - 1.0,
        inner(y, y) + 1.0,
        inner(n1, n1) - epsilon,
        inner(n2, n2) + epsilon,
        inner(x, y),
        inner(x, n1),
        inner(x, n2),
        inner(y, n1),
        inner(y, n2),
        inner(n1, n2),
    ])
    return OrthonormalityDefect(phi=phi, epsilon=epsilon)


def frame_defect_grid(frames: np.ndarray, epsilon: int) -> np.ndarray:
    """Max orthonormality defect per frame for stacked frames.

    ``frames`` has shape (..., 4, 4) with rows (x, y, n1, n2); returns an
    array of shape (...) holding the max absolute defect at each frame.
    """
    if epsilon not in (+1, -1):
        raise LorminError(f"epsilon must be +1 or -1, got {epsilon}")
    gram = np.einsum("...ab,b,...cb->...ac", frames, METRIC_DIAGONAL, frames)
    target = np.diag([1.0, -1.0, float(epsilon), -float(epsilon)])
    return np.max(np.abs(gram - target), axis=(-2, -1))
