"""Pointwise check of the tensor form of the Dirac Lagrangian density.

Both sides of the identity

    Re psi* g0 (g^k (i d_k - tau e A_k) - m) psi
        = -[ 1/2 <f3, div R* + grad theta> + e <f0, A> + m cos theta ] rho

are evaluated on smooth test fields with second order central differences.
The planar (M^3) counterpart works with the dyad (f1, f2) and the
pseudovector r of infinitesimal rotations.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import (
    GAMMA,
    LEVI_CIVITA3,
    LEVI_CIVITA4,
    METRIC,
    METRIC3,
    ORTHO_TOL,
    Bispinor,
    bispinor_to_tensors,
    dyad_completion,
    frame_arrays,
    is_degenerate,
    lower,
    minkowski,
    minkowski3,
    tensors_to_bispinor,
)


# ---------------------------------------------------------------------------
# test fields


@dataclass(frozen=True, eq=False)
class TrigField:
    """psi(x) = base + sum_j c_j exp(i k_j . x), with Euclidean k . x."""

    base: np.ndarray
    wavevectors: np.ndarray
    coeffs: np.ndarray

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        phase = np.exp(1j * (x @ self.wavevectors.T))
        return self.base + phase @ self.coeffs


@dataclass(frozen=True, eq=False)
class PlaneWave:
    """psi(x) = amplitude exp(-i <p, x>)."""

    amplitude: np.ndarray
    momentum: np.ndarray

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-1j * minkowski(x, self.momentum))[..., None] * self.amplitude


@dataclass(frozen=True, eq=False)
class TransformedField:
    """Field seen in primed coordinates: psi'(x') = S psi(Lambda^-1 x')."""

    field: Callable
    transform: object

    def __call__(self, x):
        L = self.transform
        x_old = np.asarray(x, dtype=float) @ np.linalg.inv(L.matrix).T
        psi = self.field(x_old)
        if L.antilinear:
            psi = np.conj(psi)
        return psi @ L.spinor_action.T


def random_field(rng, n_modes=3, amplitude=0.2, kmax=1.0, dim=4):
    """Seeded trigonometric-polynomial bispinor field.

    The constant part is kept close to (1, 0, 1, 0) so that |eta* xi| stays
    bounded away from zero on the whole space.
    """
    base = np.array([1, 0, 1, 0], dtype=complex)
    base += 0.2 * (rng.normal(size=4) + 1j * rng.normal(size=4))
    k = np.zeros((n_modes, 4))
    k[:, :dim] = rng.uniform(-kmax, kmax, size=(n_modes, dim))
    c = amplitude * (rng.normal(size=(n_modes, 4)) + 1j * rng.normal(size=(n_modes, 4))) / 2
    return TrigField(base, k, c)


def constant_field(psi):
    psi = np.asarray(psi, dtype=complex)
    return TrigField(psi, np.zeros((0, 4)), np.zeros((0, 4), dtype=complex))


def free_plane_wave(m, L=None):
    """Rest-frame solution e^{-i m x0}(1, 0, 1, 0), optionally boosted by L."""
    u = np.array([1, 0, 1, 0], dtype=complex)
    p = np.array([m, 0.0, 0.0, 0.0])
    if L is not None:
        u = L.spinor_action @ u
        p = L.matrix @ p
    return PlaneWave(u, p)


@dataclass(frozen=True, eq=False)
class EMPotential:
    """Contravariant four-potential evaluator together with the charge."""

    evaluate: Callable
    e: float = -1.0
    static: bool = False

    def __call__(self, x):
        return self.evaluate(np.asarray(x, dtype=float))


def constant_potential(A, e=-1.0):
    A = np.asarray(A, dtype=float)
    return EMPotential(lambda x: np.broadcast_to(A, x.shape[:-1] + (4,)).copy(), e, True)


def random_potential(rng, n_modes=2, amplitude=0.3, kmax=1.0, e=-1.0, dim=4):
    """Smooth real potential A(x) = a + sum_j b_j cos(k_j . x + phase_j)."""
    a = amplitude * rng.normal(size=4)
    k = np.zeros((n_modes, 4))
    k[:, :dim] = rng.uniform(-kmax, kmax, size=(n_modes, dim))
    b = amplitude * rng.normal(size=(n_modes, 4))
    ph = rng.uniform(0, 2 * np.pi, size=n_modes)

    def evaluate(x):
        return a + np.cos(x @ k.T + ph) @ b

    return EMPotential(evaluate, e, False)


def transformed_potential(potential, L):
    """A'(x') = Lambda A(Lambda^-1 x')."""
    inv = np.linalg.inv(L.matrix)

    def evaluate(x):
        return potential(x @ inv.T) @ L.matrix.T

    return EMPotential(evaluate, potential.e, False)


# ---------------------------------------------------------------------------
# densities


def dirac_density(psi, dpsi, A, tau=1, m=1.0, e=-1.0):
    """Re(psi* g0 (g^k (i d_k - tau e A_k) - m) psi).

    ``dpsi[..., k, :]`` is the partial derivative along x^k and ``A`` holds
    contravariant components. Vectorized over leading axes.
    """
    psi = np.asarray(psi, dtype=complex)
    dpsi = np.asarray(dpsi, dtype=complex)
    A_low = lower(A)
    D = 1j * dpsi - tau * e * A_low[..., :, None] * psi[..., None, :]
    w = np.einsum("kab,...kb->...a", GAMMA, D) - m * psi
    return np.einsum("...a,ab,...b->...", np.conj(psi), GAMMA[0], w).real


@dataclass(frozen=True, eq=False)
class RotationTensor:
    """R[nu] is R_{mu lam} for direction nu (covariant); star[nu] its dual."""

    R: np.ndarray
    star: np.ndarray
    div_star: np.ndarray


def _check_frame(frame, tol=ORTHO_TOL):
    frame = np.asarray(frame, dtype=float)
    gram = np.einsum("...km,mn,...ln->...kl", frame, METRIC, frame)
    scale = max(1.0, np.nanmax(np.abs(frame)) ** 2)
    if np.nanmax(np.abs(gram - METRIC)) > tol * scale:
        raise ValueError("frame is not orthonormal")
    return frame


def div_r_star(frame, grad_frame):
    """1/2 sum g_jl e^{eps kappa mu lam} (d_eps f^(j)_mu) f^(l)_lam.

    ``frame[..., j, :]`` is f^(j) and ``grad_frame[..., eps, j, :]`` its
    derivative along x^eps, both contravariant.
    """
    Fl = lower(frame)
    dFl = lower(grad_frame)
    return 0.5 * np.einsum("jl,ekmL,...ejm,...lL->...k", METRIC, LEVI_CIVITA4, dFl, Fl)


def rotation_tensor(frame, grad_frame, tol=ORTHO_TOL):
    frame = _check_frame(frame, tol)
    Fl = lower(frame)
    dFl = lower(grad_frame)
    R = np.einsum("jl,...njm,...lL->...nmL", METRIC, dFl, Fl)
    star = 0.5 * np.einsum("abml,...nml->...nab", LEVI_CIVITA4, R)
    div = np.einsum("...nnk->...k", star)
    return RotationTensor(R, star, div)


def tensor_density(rho, theta, frame, div_star, grad_theta, A, e=-1.0, m=1.0):
    """-[1/2 <f3, div R* + grad theta> + e <f0, A> + m cos theta] rho.

    ``grad_theta`` holds the partials d_nu theta; they are raised here.
    """
    frame = np.asarray(frame)
    f0, f3 = frame[..., 0, :], frame[..., 3, :]
    bracket = (
        0.5 * minkowski(f3, div_star + lower(grad_theta))
        + e * minkowski(f0, A)
        + m * np.cos(theta)
    )
    return -bracket * rho


def tensor_density_frame(T, div_star, grad_theta, A, e=-1.0, m=1.0):
    return tensor_density(T.rho, T.theta, T.frame, div_star, grad_theta, A, e, m)


# ---------------------------------------------------------------------------
# residual harness


def _stencil(points, h):
    """Points and their +-h neighbours: shape (9, P, 4), order 0, +0, -0, +1, ..."""
    shifts = [np.zeros(4)]
    for nu in range(4):
        e = np.zeros(4)
        e[nu] = h
        shifts += [e, -e]
    return points[None, :, :] + np.array(shifts)[:, None, :]


def _central(values, h):
    """Central differences from stencil values; derivative axis inserted after P."""
    plus = values[1::2]
    minus = values[2::2]
    return np.moveaxis((plus - minus) / (2 * h), 0, 1)


def _angle_central(theta, h):
    d = theta[1::2] - theta[2::2]
    return np.moveaxis(np.angle(np.exp(1j * d)) / (2 * h), 0, 1)


@dataclass(frozen=True, eq=False)
class IdentityResidual:
    max: float
    mean: float
    n_used: int
    n_skipped: int
    points: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def residual(self):
        return np.abs(self.lhs - self.rhs)


def sample_points(rng, n, half_width=1.0, dim=4):
    x = np.zeros((n, 4))
    x[:, :dim] = rng.uniform(-half_width, half_width, size=(n, dim))
    return x


def densities(field, potential, points, h, m=1.0, tau=1):
    """Both sides of the identity at ``points`` plus a usable-point mask."""
    points = np.asarray(points, dtype=float).reshape(-1, 4)
    X = _stencil(points, h)
    psi = field(X)
    ok = ~np.any(is_degenerate(psi), axis=0)
    A = potential(points)
    e = potential.e

    lhs = dirac_density(psi[0], _central(psi, h), A, tau, m, e)

    with np.errstate(invalid="ignore"):
        rho, theta, F = frame_arrays(psi, tau)
    dF = _central(F, h)
    dth = _angle_central(theta, h)
    div = div_r_star(F[0], dF)
    rhs = tensor_density(rho[0], theta[0], F[0], div, dth, A, e, m)
    return lhs, rhs, ok


def identity_residual(field, potential, points, h, m=1.0, tau=1):
    """Max and mean |LHS - RHS| over the usable sample points.

    Points whose stencil touches a degenerate bispinor are skipped and
    counted.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    points = np.asarray(points, dtype=float).reshape(-1, 4)
    lhs, rhs, ok = densities(field, potential, points, h, m, tau)
    res = np.abs(lhs[ok] - rhs[ok])
    n_used = int(ok.sum())
    return IdentityResidual(
        float(res.max()) if n_used else np.nan,
        float(res.mean()) if n_used else np.nan,
        n_used,
        int((~ok).sum()),
        points[ok],
        lhs[ok],
        rhs[ok],
    )


def convergence_ratio(field, potential, points, h, m=1.0, tau=1):
    """residual(h) / residual(h/2) together with both residual reports."""
    coarse = identity_residual(field, potential, points, h, m, tau)
    fine = identity_residual(field, potential, points, h / 2, m, tau)
    return coarse.max / fine.max, coarse, fine


def align_sign(reference, candidate):
    """Nearest-sign continuation: choose +-candidate closest to reference."""
    reference = np.asarray(reference)
    candidate = np.asarray(candidate)
    flip = np.sum(np.abs(candidate - reference) ** 2, axis=-1) > np.sum(
        np.abs(candidate + reference) ** 2, axis=-1
    )
    return np.where(flip[..., None], -candidate, candidate)


def dirac_density_from_frames(frame_field, potential, point, h, m=1.0, tau=1):
    """Left side of the identity rebuilt from a frame field alone.

    ``frame_field(x)`` returns FrameTensors. The bispinor is reconstructed at
    each stencil point and its sign continued from the centre along every
    grid line before differencing.
    """
    X = _stencil(np.asarray(point, dtype=float).reshape(1, 4), h)[:, 0]
    psi = np.array([tensors_to_bispinor(frame_field(x)).as_array() for x in X])
    psi[1:] = align_sign(psi[0], psi[1:])
    dpsi = _central(psi[:, None, :], h)[0]
    return float(dirac_density(psi[0], dpsi, potential(X[0]), tau, m, potential.e))


def frame_field_of(field, tau=1):
    """Pointwise frame field of a bispinor field."""
    return lambda x: bispinor_to_tensors(field(x), tau)


# ---------------------------------------------------------------------------
# planar (M^3) reduction


def planar_field(rng, sign=1, n_modes=3, amplitude=0.15, kmax=1.0):
    """x^3-independent field built from one planar system.

    For sign +1 only (phi_+, chi_+) are nonzero, for sign -1 only
    (phi_-, chi_-). The constant part keeps |phi| > |chi| so that theta = 0.
    """
    k = np.zeros((n_modes, 4))
    k[:, :3] = rng.uniform(-kmax, kmax, size=(n_modes, 3))
    c = amplitude * (rng.normal(size=(n_modes, 2)) + 1j * rng.normal(size=(n_modes, 2))) / 2
    base = np.array([1.0, 0.3 * (rng.normal() + 1j * rng.normal())])

    def lift(a):
        phi, chi = a[..., 0], a[..., 1]
        if sign > 0:
            xi = np.stack([phi, chi], axis=-1)
            eta = np.stack([phi, -chi], axis=-1)
        else:
            xi = np.stack([chi, phi], axis=-1)
            eta = np.stack([-chi, phi], axis=-1)
        return np.concatenate([xi, eta], axis=-1) / np.sqrt(2)

    T = TrigField(np.array([*base, 0, 0]), k, np.concatenate([c, np.zeros_like(c)], axis=1))

    def field(x):
        return lift(T(x)[..., :2])

    return field


def dyad_from_bispinor(psi):
    """(rho, f1, f2) in M^3 from a planar bispinor (components 0..2)."""
    rho, _, F = frame_arrays(psi)
    return rho, F[..., 1, :3], F[..., 2, :3]


def curl3(grad):
    """(curl v)^lam = e^{lam mu nu} d_mu v_nu; ``grad[..., mu, :]`` = d_mu v^nu."""
    return np.einsum("lmn,...mn->...l", LEVI_CIVITA3, grad @ METRIC3)


def div_r(dyad, grad_dyad):
    """div r = -1/2 sum g_jl <f^(j), curl f^(l)>.

    ``dyad[..., j, :]`` is (f0, f1, f2) and ``grad_dyad[..., mu, j, :]`` the
    derivative along x^mu.
    """
    curls = curl3(np.moveaxis(grad_dyad, -3, -2))
    terms = minkowski3(dyad, curls)
    return -0.5 * np.einsum("j,...j->...", np.diag(METRIC3), terms)


def m3_density(rho, dyad, grad_dyad, A, e=-1.0, m=1.0, sign=1, tol=ORTHO_TOL):
    """[1/2 div r + e <f0, A> +- m] rho on M^3."""
    dyad = np.asarray(dyad, dtype=float)
    gram = np.einsum("...km,mn,...ln->...kl", dyad, METRIC3, dyad)
    if np.abs(gram - METRIC3).max() > tol * max(1.0, np.abs(dyad).max() ** 2):
        raise ValueError("dyad is not orthonormal")
    return (0.5 * div_r(dyad, grad_dyad) + e * minkowski3(dyad[..., 0, :], A) + sign * m) * rho


def _full_dyad(f1, f2):
    return np.stack([dyad_completion(f1, f2), f1, f2], axis=-2)


def dyad_stencil(field, points, h):
    """rho, dyad and its derivatives at ``points`` (shape (P, 3))."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    X4 = np.zeros((points.shape[0], 4))
    X4[:, :3] = points
    X = _stencil(X4, h)[:7]
    rho, f1, f2 = dyad_from_bispinor(field(X))
    D = _full_dyad(f1, f2)
    return rho[0], D[0], _central(D, h)


def rotation_vector(dyad, grad_dyad):
    """Covariant r per direction from d_nu f^(k) = [r, f^(k)] (least squares)."""
    dyad = np.asarray(dyad)
    low = dyad @ METRIC3
    M = np.concatenate([np.einsum("lmn,n->lm", LEVI_CIVITA3, low[k]) for k in range(3)])
    grad_dyad = np.asarray(grad_dyad)
    rhs = grad_dyad.reshape(grad_dyad.shape[:-2] + (-1,))
    return np.linalg.lstsq(M, rhs.T, rcond=None)[0].T


def rotation_dual3(dyad, grad_dyad):
    """R*_lam = 1/2 e_{lam mu nu} R^{mu nu} per direction, covariant."""
    low = np.asarray(dyad) @ METRIC3
    dlow = np.asarray(grad_dyad) @ METRIC3
    R = np.einsum("jl,njm,lL->nmL", METRIC3, dlow, low)
    R_up = METRIC3 @ R @ METRIC3
    eps_low = np.einsum("abc,aA,bB,cC->ABC", LEVI_CIVITA3, METRIC3, METRIC3, METRIC3)
    return 0.5 * np.einsum("lmn,kmn->kl", eps_low, R_up)
