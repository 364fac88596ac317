"""Synthesis of minimal Lorentz charts from a solution (mu, nu) of the natural system.

The moving frame Z = (x, y, n1, n2), stacked as rows, obeys the linear
system Z_u = A Z, Z_v = B Z with coefficient matrices::

    A = sqrt(E) [[0,      -gamma1, nu,    0   ],      B = sqrt(-G) [[0,      -gamma2, 0,     mu  ],
                 [-gamma1, 0,      0,     mu  ],                    [-gamma2, 0,      nu,    0   ],
                 [-eps nu, 0,      0,     beta1],                   [0,       eps nu, 0,     beta2],
                 [0,      -eps mu, beta1, 0   ]]                    [eps mu,  0,      beta2, 0   ]]

where sqrt(E) = sqrt(-G) = |mu^2 - nu^2|^(-1/4) and gamma/beta come from
the invariant fields. Positions follow from z_u = sqrt(E) x,
z_v = sqrt(-G) y. Integration is classical fixed-step 4th-order
Runge-Kutta: one baseline sweep along u at v0, then all v-columns advanced
in lockstep (the columns are independent; the vectorised sweep is
bit-identical to integrating them one at a time). A transposed sweep
(v first, then u) is run only to surface the path-disagreement diagnostic.

Orthonormality of the frame is a first integral of the continuous system
for arbitrary coefficient functions, so the reported drift measures pure
integrator truncation; frames are never re-orthonormalised behind the
caller's back.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .canonical import SUPERCONFORMAL_BAND, gamma_beta_from_invariants
from .errors import (
    BlowUpError,
    DomainError,
    NearSuperconformalError,
    PreconditionError,
)
from .fields import ScalarField
from .neutral import frame_defect_grid, inner

BLOWUP_BOUND = 1e12


@dataclass(frozen=True)
class FrameState:
    """Orthonormal frame attached to a parameter point."""

    x: np.ndarray
    y: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    at_point: Tuple[float, float]

    @property
    def matrix(self) -> np.ndarray:
        return np.stack([self.x, self.y, self.n1, self.n2])

    @staticmethod
    def from_matrix(m: np.ndarray, at_point: Tuple[float, float]) -> "FrameState":
        return FrameState(x=m[0], y=m[1], n1=m[2], n2=m[3], at_point=at_point)


@dataclass(frozen=True)
class CoefficientMatrices:
    A: np.ndarray
    B: np.ndarray


@dataclass(frozen=True)
class GridSpec:
    """Rectangular lattice u0 + i h, v0 + j h with i < n_u, j < n_v."""

    u0: float
    v0: float
    h: float
    n_u: int
    n_v: int

    def __post_init__(self):
        if self.h <= 0 or self.n_u < 1 or self.n_v < 1:
            raise PreconditionError(f"bad grid spec {self}")

    @property
    def us(self) -> np.ndarray:
        return self.u0 + self.h * np.arange(self.n_u)

    @property
    def vs(self) -> np.ndarray:
        return self.v0 + self.h * np.arange(self.n_v)


@dataclass(frozen=True)
class SynthesizedSurface:
    """Frames (and optionally positions) integrated over a lattice, with defects."""

    spec: GridSpec
    epsilon: int
    frames: np.ndarray                 # (n_u, n_v, 4, 4), rows x, y, n1, n2
    positions: Optional[np.ndarray]    # (n_u, n_v, 4) once integrated
    orthonormality_drift: float
    consistency_defect: float
    integrability_defect: float        # z_uv vs z_vu on the stored grid; NaN before positions
    initial_frame: FrameState
    fd_step: float                     # step used for gamma/beta derivatives
    reorthonormalized: bool = False    # per-step frame projection was applied

    @property
    def us(self) -> np.ndarray:
        return self.spec.us

    @property
    def vs(self) -> np.ndarray:
        return self.spec.vs


def _sqrt_E(mu: ScalarField, nu: ScalarField, u, v):
    m, n = mu._values(u, v), nu._values(u, v)
    d = np.abs(m * m - n * n)
    if np.any(d <= SUPERCONFORMAL_BAND * (m * m + n * n)):
        raise NearSuperconformalError("mu^2 - nu^2 vanishes; conformal factor blows up")
    return d ** -0.25


def build_matrices(mu: ScalarField, nu: ScalarField, epsilon: int,
                   u: float, v: float, step: Optional[float] = None) -> CoefficientMatrices:
    """Coefficient matrices A, B of the frame system at one point."""
    A, B = _matrices_stacked(mu, nu, epsilon, np.asarray([u], dtype=float),
                             np.asarray([v], dtype=float), step)
    return CoefficientMatrices(A=A[0], B=B[0])


def _matrices_stacked(mu, nu, epsilon, u_arr, v_arr, step=None):
    """A and B at many points at once; returns two arrays of shape (N, 4, 4)."""
    if epsilon not in (+1, -1):
        raise PreconditionError(f"epsilon must be +1 or -1, got {epsilon}")
    eps = float(epsilon)
    g1, g2, b1, b2 = gamma_beta_from_invariants(mu, nu, u_arr, v_arr, step)
    m = mu._values(u_arr, v_arr)
    n = nu._values(u_arr, v_arr)
    root = _sqrt_E(mu, nu, u_arr, v_arr)
    N = np.broadcast(u_arr, v_arr).size
    zeros = np.zeros(N)
    m, n, g1, g2, b1, b2 = (np.broadcast_to(w, (N,)) for w in (m, n, g1, g2, b1, b2))
    A = np.stack([
        np.stack([zeros, -g1, n, zeros], axis=-1),
        np.stack([-g1, zeros, zeros, m], axis=-1),
        np.stack([-eps * n, zeros, zeros, b1], axis=-1),
        np.stack([zeros, -eps * m, b1, zeros], axis=-1),
    ], axis=-2)
    B = np.stack([
        np.stack([zeros, -g2, zeros, m], axis=-1),
        np.stack([-g2, zeros, n, zeros], axis=-1),
        np.stack([zeros, eps * n, zeros, b2], axis=-1),
        np.stack([eps * m, zeros, b2, zeros], axis=-1),
    ], axis=-2)
    root = np.broadcast_to(root, (N,))[:, None, None]
    return root * A, root * B


def integrability_defect(mu: ScalarField, nu: ScalarField, epsilon: int,
                         grid, fd_step: Optional[float] = None) -> float:
    """Max entry of d_v A - d_u B + AB - BA over the grid.

    This is the compatibility condition making the frame system solvable;
    fields solving the natural system drive it to finite-difference noise,
    anything else leaves an O(1) obstruction. Matrix derivatives are central
    differences with the given step (default: mu's own step).
    """
    g = np.asarray(grid, dtype=float).reshape(-1, 2)
    if g.size == 0:
        raise PreconditionError("integrability grid is empty")
    h = fd_step if fd_step is not None else mu.fd_step
    us, vs = g[:, 0], g[:, 1]
    A_up, B_up = _matrices_stacked(mu, nu, epsilon, us + h, vs, h)
    A_um, B_um = _matrices_stacked(mu, nu, epsilon, us - h, vs, h)
    A_vp, B_vp = _matrices_stacked(mu, nu, epsilon, us, vs + h, h)
    A_vm, B_vm = _matrices_stacked(mu, nu, epsilon, us, vs - h, h)
    A, B = _matrices_stacked(mu, nu, epsilon, us, vs, h)
    dA_dv = (A_vp - A_vm) / (2 * h)
    dB_du = (B_up - B_um) / (2 * h)
    comm = np.matmul(A, B) - np.matmul(B, A)
    return float(np.max(np.abs(dA_dv - dB_du + comm)))


def _augmented(mats: np.ndarray, tangent_row: int, scale: np.ndarray) -> np.ndarray:
    """Extend (N,4,4) frame matrices to (N,5,5) carrying z' = scale * (frame row)."""
    N = mats.shape[0]
    out = np.zeros((N, 5, 5))
    out[:, :4, :4] = mats
    out[:, 4, tangent_row] = scale
    return out


def _rhs_u(mu, nu, eps, u, v_arr, step):
    u_arr = np.broadcast_to(u, np.shape(v_arr)) if np.ndim(v_arr) else np.asarray([u])
    v_use = v_arr if np.ndim(v_arr) else np.asarray([v_arr])
    A, _ = _matrices_stacked(mu, nu, eps, u_arr, v_use, step)
    return _augmented(A, 0, _sqrt_E(mu, nu, u_arr, v_use))


def _rhs_v(mu, nu, eps, u_arr, v, step):
    u_use = u_arr if np.ndim(u_arr) else np.asarray([u_arr])
    v_arr = np.broadcast_to(v, np.shape(u_use))
    _, B = _matrices_stacked(mu, nu, eps, u_use, v_arr, step)
    return _augmented(B, 1, _sqrt_E(mu, nu, u_use, v_arr))


def _reproject_frames(S: np.ndarray, epsilon: int) -> np.ndarray:
    """Metric Gram-Schmidt of the frame rows back onto the orthonormal manifold.

    Row signature targets are <x,x>=1, <y,y>=-1, <n1,n1>=eps, <n2,n2>=-eps.
    Raises when a row's square lands on the wrong side of zero (the frame
    has degenerated beyond repair, projection would hide it).
    """
    out = S.copy()
    signs = (1.0, -1.0, float(epsilon), -float(epsilon))
    for i in range(4):
        row = out[:, i, :]
        for j in range(i):
            prev = out[:, j, :]
            row = row - (inner(row, prev) / signs[j])[:, None] * prev
        q = inner(row, row)
        if np.any(q * signs[i] <= 0.0):
            raise BlowUpError("frame degenerated; re-orthonormalisation impossible")
        out[:, i, :] = row / np.sqrt(signs[i] * q)[:, None]
    return out


def _rk4_march(states, t_start, n_steps, h, matrices_at, reproject=None):
    """Classical RK4 for the linear system S' = M(t) S on stacked states (N,5,4).

    ``matrices_at(t)`` returns the (N,5,5) coefficient stack; the system is
    linear, so the two half-step stages share one matrix evaluation. An
    optional ``reproject`` hook is applied to each accepted state.
    """
    out = [states]
    S = states
    for i in range(n_steps):
        t = t_start + i * h
        M1 = matrices_at(t)
        Mh = matrices_at(t + h / 2)
        M2 = matrices_at(t + h)
        k1 = np.matmul(M1, S)
        k2 = np.matmul(Mh, S + h / 2 * k1)
        k3 = np.matmul(Mh, S + h / 2 * k2)
        k4 = np.matmul(M2, S + h * k3)
        S = S + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if reproject is not None:
            S = reproject(S)
        out.append(S)
    return np.stack(out)


def _rk4_sweep_u(mu, nu, eps, states, u_start, n_steps, h, v_arr, step, reproject=None):
    return _rk4_march(states, u_start, n_steps, h,
                      lambda u: _rhs_u(mu, nu, eps, u, v_arr, step), reproject)


def _rk4_sweep_v(mu, nu, eps, states, v_start, n_steps, h, u_arr, step, reproject=None):
    return _rk4_march(states, v_start, n_steps, h,
                      lambda v: _rhs_v(mu, nu, eps, u_arr, v, step), reproject)


def _check_blowup(arr: np.ndarray):
    if not np.all(np.isfinite(arr)) or np.max(np.abs(arr)) > BLOWUP_BOUND:
        raise BlowUpError("integration blew up (component above bound or non-finite)")


def _double_sweep(mu, nu, eps, initial_state, spec, step, reproject=None):
    """u-baseline then v-columns, and the transposed order; both full grids (n_u, n_v, 5, 4)."""
    us, vs = spec.us, spec.vs
    # main order: baseline along u at v0, then columns in v
    base_u = _rk4_sweep_u(mu, nu, eps, initial_state[None], spec.u0, spec.n_u - 1,
                          spec.h, np.asarray([spec.v0]), step, reproject)  # (n_u, 1, 5, 4)
    cols0 = base_u[:, 0]  # (n_u, 5, 4)
    main = _rk4_sweep_v(mu, nu, eps, cols0, spec.v0, spec.n_v - 1, spec.h, us, step, reproject)
    main = np.swapaxes(main, 0, 1)  # (n_u, n_v, 5, 4)
    _check_blowup(main)
    # transposed order: baseline along v at u0, then rows in u
    base_v = _rk4_sweep_v(mu, nu, eps, initial_state[None], spec.v0, spec.n_v - 1,
                          spec.h, np.asarray([spec.u0]), step, reproject)
    rows0 = base_v[:, 0]  # (n_v, 5, 4)
    transposed = _rk4_sweep_u(mu, nu, eps, rows0, spec.u0, spec.n_u - 1, spec.h, vs, step,
                              reproject)
    _check_blowup(transposed)  # (n_u, n_v, 5, 4) already in u-major order
    return main, transposed


def _require_grid_inside(mu, nu, spec, step):
    margin = max(2 * spec.h, spec.h + step)
    us, vs = spec.us, spec.vs
    lo_u, hi_u = float(us[0]), float(us[-1])
    lo_v, hi_v = float(vs[0]), float(vs[-1])
    for f in (mu, nu):
        if not (f.domain.contains(lo_u, lo_v, margin=margin)
                and f.domain.contains(hi_u, hi_v, margin=margin)):
            raise DomainError(
                f"synthesis grid needs margin {margin:g} inside the field domain {f.domain}"
            )


def integrate_frames(mu: ScalarField, nu: ScalarField, epsilon: int,
                     initial: FrameState, spec: GridSpec,
                     fd_step: Optional[float] = None,
                     reorthonormalize: bool = False) -> SynthesizedSurface:
    """Integrate the frame system over the lattice from the initial frame.

    The initial frame must be orthonormal for the given epsilon to within
    1e-10. Reports the worst orthonormality defect over the grid and the
    disagreement between the two sweep orders; positions stay empty.
    ``reorthonormalize`` projects the frame back onto the orthonormal
    manifold after every step; it is off by default so that the drift
    diagnostic keeps measuring the integrator honestly instead of masking
    bad input fields.
    """
    step = fd_step if fd_step is not None else mu.fd_step
    defect0 = frame_defect_grid(initial.matrix[None], epsilon)[0]
    if defect0 > 1e-10:
        raise PreconditionError(
            f"initial frame defect {defect0:g} exceeds 1e-10 for epsilon={epsilon}"
        )
    _require_grid_inside(mu, nu, spec, step)
    state0 = np.vstack([initial.matrix, np.zeros(4)])
    reproject = (lambda S: _reproject_frames(S, int(epsilon))) if reorthonormalize else None
    main, transposed = _double_sweep(mu, nu, epsilon, state0, spec, step, reproject)
    frames = main[:, :, :4, :]
    drift = float(np.max(frame_defect_grid(frames, epsilon)))
    consistency = float(np.max(np.abs(main[:, :, :4, :] - transposed[:, :, :4, :])))
    return SynthesizedSurface(
        spec=spec, epsilon=int(epsilon), frames=frames, positions=None,
        orthonormality_drift=drift, consistency_defect=consistency,
        integrability_defect=float("nan"), initial_frame=initial, fd_step=float(step),
        reorthonormalized=reorthonormalize,
    )


def integrate_positions(surface: SynthesizedSurface, mu: ScalarField, nu: ScalarField,
                        initial_point) -> SynthesizedSurface:
    """Fill positions by integrating z_u = sqrt(E) x, z_v = sqrt(-G) y.

    Re-runs the joint frame+position sweep (the frame block reproduces the
    stored frames bit for bit, since positions never feed back into it) and
    records the mixed-partial defect of z measured by differencing
    sqrt(E) x against sqrt(-G) y on the stored grid.
    """
    if surface.frames is None:
        raise PreconditionError("integrate frames before positions")
    spec = surface.spec
    z0 = np.asarray(initial_point, dtype=float)
    if z0.shape != (4,):
        raise PreconditionError("initial point must have 4 components")
    state0 = np.vstack([surface.initial_frame.matrix, z0])
    reproject = ((lambda S: _reproject_frames(S, surface.epsilon))
                 if surface.reorthonormalized else None)
    main, transposed = _double_sweep(mu, nu, surface.epsilon, state0, spec, surface.fd_step,
                                     reproject)
    positions = main[:, :, 4, :]
    consistency = float(np.max(np.abs(main - transposed)))

    # z_uv vs z_vu: difference the two tangent fields sqrt(E) x and sqrt(-G) y
    U = np.broadcast_to(spec.us[:, None], (spec.n_u, spec.n_v))
    V = np.broadcast_to(spec.vs[None, :], (spec.n_u, spec.n_v))
    root = _sqrt_E(mu, nu, U.ravel(), V.ravel()).reshape(spec.n_u, spec.n_v, 1)
    zu_field = root * main[:, :, 0, :]
    zv_field = root * main[:, :, 1, :]
    if spec.n_u >= 3 and spec.n_v >= 3:
        d_zu_dv = (zu_field[:, 2:, :] - zu_field[:, :-2, :]) / (2 * spec.h)
        d_zv_du = (zv_field[2:, :, :] - zv_field[:-2, :, :]) / (2 * spec.h)
        mixed = float(np.max(np.abs(d_zu_dv[1:-1, :, :] - d_zv_du[:, 1:-1, :])))
    else:
        mixed = 0.0
    drift = float(np.max(frame_defect_grid(main[:, :, :4, :], surface.epsilon)))
    return replace(surface, positions=positions, integrability_defect=mixed,
                   orthonormality_drift=drift,
                   consistency_defect=max(surface.consistency_defect, consistency))


@dataclass(frozen=True)
class SynthesisValidation:
    """Closure report: re-analysis of the synthesized mesh against its inputs."""

    mu_error: float
    nu_error: float
    minimality_residual: float
    canonical_defect: float
    K_error: float
    kappa_error: float
    epsilon_matches: bool

    @property
    def headline(self) -> Tuple[float, float, float, float]:
        return (self.mu_error, self.nu_error, self.minimality_residual, self.canonical_defect)


def recover_invariants_on_grid(positions: np.ndarray, h: float):
    """Vectorised invariant recovery on interior lattice points.

    Same mathematics as the per-point analyzer/extraction pipeline (the
    rotation angle and the invariants only need inner products of the
    second-form vectors, which are frame independent); returns dict of
    arrays over the (n_u - 2) x (n_v - 2) interior.
    """
    P = np.asarray(positions, dtype=float)
    z_u = (P[2:, 1:-1] - P[:-2, 1:-1]) / (2 * h)
    z_v = (P[1:-1, 2:] - P[1:-1, :-2]) / (2 * h)
    z_uu = (P[2:, 1:-1] - 2 * P[1:-1, 1:-1] + P[:-2, 1:-1]) / h**2
    z_vv = (P[1:-1, 2:] - 2 * P[1:-1, 1:-1] + P[1:-1, :-2]) / h**2
    z_uv = (P[2:, 2:] - P[2:, :-2] - P[:-2, 2:] + P[:-2, :-2]) / (4 * h**2)

    E = inner(z_u, z_u)
    F = inner(z_u, z_v)
    G = inner(z_v, z_v)
    f = np.sqrt(E)
    x = z_u / f[..., None]
    y = z_v / f[..., None]

    def PN(w):
        return w - inner(w, x)[..., None] * x + inner(w, y)[..., None] * y

    f2 = (f * f)[..., None]
    s_xx = PN(z_uu) / f2
    s_xy = PN(z_uv) / f2
    s_yy = PN(z_vv) / f2
    H = (s_xx - s_yy) / 2.0
    q_xx = inner(s_xx, s_xx)
    q_xy = inner(s_xy, s_xy)
    q_cross = inner(s_xx, s_xy)
    denom = -(q_xx + q_xy)  # equals b^2 - a^2 + d^2 - c^2 in any admissible normal frame
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(denom != 0.0, 2.0 * q_cross / np.where(denom != 0.0, denom, 1.0), 0.0)
    alpha = np.where(np.abs(q_cross) > 1e-12 * np.abs(denom), ratio, 0.0)
    phi = 0.25 * np.arctanh(np.clip(alpha, -1 + 1e-15, 1 - 1e-15))
    ch, sh = np.cosh(2 * phi)[..., None], np.sinh(2 * phi)[..., None]
    s_xx_r = ch * s_xx + sh * s_xy
    s_xy_r = sh * s_xx + ch * s_xy
    qr_xx = inner(s_xx_r, s_xx_r)
    qr_xy = inner(s_xy_r, s_xy_r)
    nu_rec = np.sqrt(np.abs(qr_xx))
    mu_rec = np.sqrt(np.abs(qr_xy))
    eps_rec = np.where(qr_xx > 0, 1, -1)
    K_rec = -q_xx + q_xy  # b^2 - a^2 + c^2 - d^2, frame free
    kappa_rec = -2.0 * mu_rec * nu_rec
    return dict(E=E, F=F, G=G, f=f, mu=mu_rec, nu=nu_rec, epsilon=eps_rec,
                K=K_rec, kappa=kappa_rec,
                minimality=np.sqrt(np.sum(H * H, axis=-1)),
                canonical=np.abs(mu_rec**2 - nu_rec**2) * f**4)


def validate_synthesis(surface: SynthesizedSurface, mu: ScalarField, nu: ScalarField,
                       epsilon: int) -> SynthesisValidation:
    """Closure test: re-analyse the mesh and compare against the generating fields.

    Refuses surfaces whose stored mixed-partial defect exceeds 1e-3 (the
    mesh then does not represent a single surface to useful accuracy).
    """
    if surface.positions is None:
        raise PreconditionError("surface has no positions; integrate them first")
    if not (surface.integrability_defect <= 1e-3):
        raise PreconditionError(
            f"integrability defect {surface.integrability_defect:g} above 1e-3; refusing to validate"
        )
    spec = surface.spec
    if spec.n_u < 3 or spec.n_v < 3:
        raise PreconditionError("validation needs at least a 3x3 grid")
    rec = recover_invariants_on_grid(surface.positions, spec.h)
    us = spec.us[1:-1]
    vs = spec.vs[1:-1]
    U = np.broadcast_to(us[:, None], rec["mu"].shape)
    V = np.broadcast_to(vs[None, :], rec["mu"].shape)
    mu_in = mu._values(U.ravel(), V.ravel()).reshape(rec["mu"].shape)
    nu_in = nu._values(U.ravel(), V.ravel()).reshape(rec["nu"].shape)
    eps = int(epsilon)
    K_in = -eps * (mu_in**2 + nu_in**2)
    kappa_in = -2.0 * mu_in * nu_in
    return SynthesisValidation(
        mu_error=float(np.max(np.abs(rec["mu"] - np.abs(mu_in)))),
        nu_error=float(np.max(np.abs(rec["nu"] - np.abs(nu_in)))),
        minimality_residual=float(np.max(rec["minimality"])),
        canonical_defect=float(np.max(np.abs(rec["canonical"] - 1.0))),
        K_error=float(np.max(np.abs(rec["K"] - K_in))),
        kappa_error=float(np.max(np.abs(rec["kappa"] - kappa_in))),
        epsilon_matches=bool(np.all(rec["epsilon"] == eps)),
    )
