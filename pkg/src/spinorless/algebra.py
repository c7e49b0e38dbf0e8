"""Bispinor and orthonormal-frame algebra.

Conventions
-----------
* Metric ``g = diag(+1, -1, -1, -1)``; four-vectors are numpy arrays of
  contravariant components unless a name says otherwise.
* Gamma matrices in the spinor representation,
  ``gamma^0 = [[0, I], [I, 0]]`` and ``gamma^k = [[0, -sigma^k], [sigma^k, 0]]``.
* A bispinor is stored as ``(xi^1, xi^2, eta_1, eta_2)``.
* Lorentz transforms are passive: ``a'^mu = Lambda^mu_nu a^nu``.
"""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

SIGMA0 = np.eye(2, dtype=complex)
SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])
METRIC3 = np.diag([1.0, -1.0, -1.0])

DEGENERACY_TOL = 1e-12
ORTHO_TOL = 1e-8


def _levi_civita(n):
    eps = np.zeros((n,) * n)
    for perm in itertools.permutations(range(n)):
        eps[perm] = np.linalg.det(np.eye(n)[list(perm)])
    return eps


# e^{0123} = +1 (upper indices)
LEVI_CIVITA4 = _levi_civita(4)
LEVI_CIVITA3 = _levi_civita(3)


class DegenerateBispinor(ValueError):
    """Raised when eta* xi vanishes (to tolerance) and no frame exists."""


class UnsupportedTransform(ValueError):
    """Raised for a Lorentz matrix that carries no bispinor action."""


def gamma_matrices():
    """Return the four gamma matrices as an array of shape (4, 4, 4)."""
    Z = np.zeros((2, 2), dtype=complex)
    g = [np.block([[Z, SIGMA0], [SIGMA0, Z]])]
    g += [np.block([[Z, -s], [s, Z]]) for s in SIGMA]
    return np.array(g)


GAMMA = gamma_matrices()
# gamma^0 gamma^mu and gamma^0 gamma^2 gamma^mu, used by the currents
_G0G = np.einsum("ab,mbc->mac", GAMMA[0], GAMMA)
_G0G2G = np.einsum("ab,bc,mcd->mad", GAMMA[0], GAMMA[2], GAMMA)


def lower(a):
    """Lower (or raise) the index of a four-vector; an involution."""
    return np.asarray(a) @ METRIC


def minkowski(a, b):
    """Minkowski product <a, b> over the last axis."""
    a, b = np.asarray(a), np.asarray(b)
    return a[..., 0] * b[..., 0] - np.sum(a[..., 1:] * b[..., 1:], axis=-1)


def minkowski3(a, b):
    """Product with metric diag(+1, -1, -1) over the last axis (no conjugation)."""
    a, b = np.asarray(a), np.asarray(b)
    return a[..., 0] * b[..., 0] - a[..., 1] * b[..., 1] - a[..., 2] * b[..., 2]


def wrap_angle(x):
    """Map angles onto the branch (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2 * np.pi)


@dataclass(frozen=True)
class Bispinor:
    xi1: complex
    xi2: complex
    eta1: complex
    eta2: complex

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=complex).reshape(4)
        return cls(*(complex(c) for c in a))

    @classmethod
    def from_reals(cls, values):
        """Build from 8 floats ``re xi1, im xi1, re xi2, ..., im eta2``."""
        v = np.asarray(values, dtype=float).reshape(4, 2)
        return cls.from_array(v[:, 0] + 1j * v[:, 1])

    def as_array(self):
        return np.array([self.xi1, self.xi2, self.eta1, self.eta2], dtype=complex)

    @property
    def xi(self):
        return self.as_array()[:2]

    @property
    def eta(self):
        return self.as_array()[2:]

    def pairing(self):
        """The invariant eta* xi."""
        return np.vdot(self.eta, self.xi)

    def is_degenerate(self, tol=DEGENERACY_TOL):
        return bool(is_degenerate(self.as_array(), tol))


def _as_psi(psi):
    if isinstance(psi, Bispinor):
        return psi.as_array()
    return np.asarray(psi, dtype=complex)


def is_degenerate(psi, tol=DEGENERACY_TOL):
    """Scale-invariant degeneracy gate |eta* xi| <= tol (|xi|^2 + |eta|^2)."""
    psi = _as_psi(psi)
    pair = np.sum(np.conj(psi[..., 2:]) * psi[..., :2], axis=-1)
    norm2 = np.sum(np.abs(psi) ** 2, axis=-1)
    return np.abs(pair) <= tol * norm2


@dataclass(frozen=True, eq=False)
class FrameTensors:
    rho: float
    theta: float
    f0: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray
    tau: int = 1

    @property
    def frame(self):
        """Rows f^(0)..f^(3), contravariant."""
        return np.array([self.f0, self.f1, self.f2, self.f3])

    def orthonormality_error(self):
        F = self.frame
        return np.abs(F @ METRIC @ F.T - METRIC).max()


def currents(psi):
    """Return (j, u): the real current j^mu and complex current u^mu."""
    psi = _as_psi(psi)
    j = np.einsum("...a,mab,...b->...m", np.conj(psi), _G0G, psi).real
    u = -1j * np.einsum("...a,mab,...b->...m", psi, _G0G2G, psi)
    return j, u


def _spin(f0, f1, f2):
    return np.einsum(
        "klmn,...k,...l,...m->...n", LEVI_CIVITA4, lower(f0), lower(f1), lower(f2)
    )


def spin_vector(f0, f1, f2, tol=ORTHO_TOL):
    """Complete an orthonormal triad by f3^nu = e^{klmn} f0_k f1_l f2_m."""
    F = np.array([f0, f1, f2], dtype=float)
    gram = F @ METRIC @ F.T
    scale = max(1.0, np.abs(F).max() ** 2)
    if np.abs(gram - METRIC[:3, :3]).max() > tol * scale:
        raise ValueError("spin_vector needs an orthonormal triad")
    return _spin(F[0], F[1], F[2])


def frame_arrays(psi, tau=1):
    """Vectorized forward map.

    ``psi`` has shape (..., 4). Returns ``rho``, ``theta`` and the frame ``F``
    of shape (..., 4, 4) with rows f^(0)..f^(3). Degenerate inputs give nan.
    """
    psi = _as_psi(psi)
    z = 2 * np.sum(np.conj(psi[..., 2:]) * psi[..., :2], axis=-1)
    rho = np.abs(z)
    theta = wrap_angle(np.angle(z))
    bad = is_degenerate(psi)
    safe = np.where(bad, np.nan, rho)
    j, u = currents(psi)
    f0 = tau * j / safe[..., None]
    f1 = u.real / safe[..., None]
    f2 = tau * u.imag / safe[..., None]
    F = np.stack([f0, f1, f2, _spin(f0, f1, f2)], axis=-2)
    return rho, theta, F


def bispinor_to_tensors(psi, tau=1):
    """Forward map psi -> (rho, theta, f^(0..3))."""
    if tau not in (1, -1):
        raise ValueError("tau must be +1 or -1")
    psi = _as_psi(psi).reshape(4)
    if is_degenerate(psi):
        raise DegenerateBispinor("eta* xi = 0: no frame for this bispinor")
    rho, theta, F = frame_arrays(psi, tau)
    return FrameTensors(float(rho), float(theta), *F, tau=tau)


def _check_unit(n):
    n = np.asarray(n, dtype=float).reshape(3)
    if abs(np.linalg.norm(n) - 1) > 1e-10:
        raise ValueError("axis must be a unit 3-vector")
    return n


def _block_spinor(B):
    Z = np.zeros((2, 2), dtype=complex)
    return np.block([[B, Z], [Z, np.linalg.inv(B.conj().T)]])


@dataclass(frozen=True, eq=False)
class LorentzTransform:
    """Passive Lorentz transform with its bispinor action, if known.

    ``spinor_action`` is the 4x4 matrix S with psi' = S psi, or
    psi' = S conj(psi) when ``antilinear`` is set. Composition uses ``@``:
    ``L2 @ L1`` applies L1 first.
    """

    matrix: np.ndarray
    spinor_action: np.ndarray | None = None
    antilinear: bool = False
    spinor_lift: np.ndarray | None = None

    @property
    def det(self):
        return float(np.linalg.det(self.matrix))

    @property
    def proper(self):
        return self.det > 0 and self.matrix[0, 0] >= 1 - 1e-12

    @property
    def time_sign(self):
        """+1 when the time orientation is kept, -1 when it is reversed."""
        return 1 if self.matrix[0, 0] > 0 else -1

    def is_lorentz(self, tol=1e-10):
        L = self.matrix
        return np.abs(L.T @ METRIC @ L - METRIC).max() < tol * max(1, np.abs(L).max() ** 2)

    def __matmul__(self, first):
        matrix = self.matrix @ first.matrix
        if self.spinor_action is None or first.spinor_action is None:
            return LorentzTransform(matrix)
        if self.antilinear:
            S = self.spinor_action @ np.conj(first.spinor_action)
        else:
            S = self.spinor_action @ first.spinor_action
        out = LorentzTransform(matrix, S, self.antilinear ^ first.antilinear)
        if out.proper and not out.antilinear:
            out = LorentzTransform(matrix, S, False, S[:2, :2].copy())
        return out

    def inverse(self):
        matrix = np.linalg.inv(self.matrix)
        if self.spinor_action is None:
            return LorentzTransform(matrix)
        S = np.linalg.inv(self.spinor_action)
        if self.antilinear:
            return LorentzTransform(matrix, np.conj(S), True)
        lift = None if self.spinor_lift is None else np.linalg.inv(self.spinor_lift)
        return LorentzTransform(matrix, S, False, lift)


def identity_transform():
    return LorentzTransform(np.eye(4), np.eye(4, dtype=complex), False, np.eye(2, dtype=complex))


def from_matrix(lam):
    """Wrap a raw Lorentz matrix; it has no bispinor action."""
    return LorentzTransform(np.asarray(lam, dtype=float))


def _boost_generator(n):
    M = np.zeros((4, 4))
    M[0, 1:] = n
    M[1:, 0] = n
    return M


def _rotation_generator(n):
    n1, n2, n3 = n
    return np.array(
        [[0, 0, 0, 0], [0, 0, -n3, n2], [0, n3, 0, -n1], [0, -n2, n1, 0]], dtype=float
    )


def boost(phi, n):
    """Boost with rapidity ``phi`` along unit axis ``n``."""
    n = _check_unit(n)
    M = _boost_generator(n)
    lam = np.eye(4) + (np.cosh(phi) - 1) * M @ M - np.sinh(phi) * M
    ns = np.einsum("k,kab->ab", n, SIGMA)
    B = np.cosh(phi / 2) * SIGMA0 - np.sinh(phi / 2) * ns
    return LorentzTransform(lam, _block_spinor(B), False, B)


def rotation(theta, n):
    """Spatial rotation by angle ``theta`` about unit axis ``n``."""
    n = _check_unit(n)
    N = _rotation_generator(n)
    lam = np.eye(4) + (1 - np.cos(theta)) * N @ N - np.sin(theta) * N
    ns = np.einsum("k,kab->ab", n, SIGMA)
    B = np.cos(theta / 2) * SIGMA0 + 1j * np.sin(theta / 2) * ns
    return LorentzTransform(lam, _block_spinor(B), False, B)


def space_inversion():
    Z = np.zeros((2, 2), dtype=complex)
    S = np.block([[Z, 1j * SIGMA0], [1j * SIGMA0, Z]])
    return LorentzTransform(np.diag([1.0, -1.0, -1.0, -1.0]), S, False)


def time_inversion():
    Z = np.zeros((2, 2), dtype=complex)
    S = np.block([[SIGMA[1], Z], [Z, SIGMA[1]]])
    return LorentzTransform(np.diag([-1.0, 1.0, 1.0, 1.0]), S, True)


def apply_to_bispinor(L, psi):
    if L.spinor_action is None:
        raise UnsupportedTransform(
            "no bispinor action; build the transform from boosts, rotations and inversions"
        )
    v = _as_psi(psi).reshape(4)
    if L.antilinear:
        v = np.conj(v)
    return Bispinor.from_array(L.spinor_action @ v)


def apply_to_vector(L, a):
    return L.matrix @ np.asarray(a, dtype=float)


def apply_to_frame(L, T):
    """Frame expected after transforming the underlying bispinor by L.

    rho is a scalar, theta and f3 are pseudo-quantities, and tau follows the
    time orientation.
    """
    lam = L.matrix
    det = 1 if L.det > 0 else -1
    theta = float(wrap_angle(det * T.theta))
    return FrameTensors(
        T.rho,
        theta,
        lam @ T.f0,
        lam @ T.f1,
        lam @ T.f2,
        det * (lam @ T.f3),
        tau=T.tau * L.time_sign,
    )


def tensors_to_bispinor(T, tol=ORTHO_TOL):
    """Inverse map; the result is fixed up to a global sign."""
    if T.tau not in (1, -1):
        raise ValueError("tau must be +1 or -1")
    if not (T.rho > 0 and np.isfinite(T.rho)):
        raise ValueError("rho must be positive")
    if not (-np.pi < T.theta <= np.pi):
        raise ValueError("theta must lie in (-pi, pi]")
    F = np.array([T.f0, T.f1, T.f2, T.f3], dtype=float)
    scale = max(1.0, np.abs(F).max() ** 2)
    if np.abs(F @ METRIC @ F.T - METRIC).max() > tol * scale:
        raise ValueError("frame is not orthonormal")
    if np.abs(_spin(F[0], F[1], F[2]) - F[3]).max() > tol * scale:
        raise ValueError("f3 is not the spin vector of (f0, f1, f2)")

    a0, a1, a2 = T.tau * F[0], F[1], T.tau * F[2]
    if a0[0] <= 0:
        raise ValueError("f0 is not future-pointing relative to tau")
    a3 = _spin(a0, a1, a2)

    v = a0[1:]
    s = np.linalg.norm(v)
    axis = v / s if s > 0 else np.array([0.0, 0.0, 1.0])
    L1 = boost(np.arcsinh(s), axis)

    Q = (L1.matrix @ np.array([a1, a2, a3]).T)[1:]
    R = Q.T
    if np.linalg.det(R) <= 0:
        raise ValueError("frame orientation is improper")
    rv = Rotation.from_matrix(R).as_rotvec()
    angle = np.linalg.norm(rv)
    L2 = rotation(angle, -rv / angle) if angle > 0 else identity_transform()
    L = L2 @ L1

    half = T.theta / 2
    psi_can = np.sqrt(T.rho / 2) * np.array([np.exp(1j * half), 0, np.exp(-1j * half), 0])
    return Bispinor.from_array(np.linalg.solve(L.spinor_action, psi_can))


@dataclass(frozen=True)
class PlanarPair:
    phi_plus: complex
    phi_minus: complex
    chi_minus: complex
    chi_plus: complex


def planar_reduce(psi):
    psi = _as_psi(psi).reshape(4)
    xi, eta = psi[:2], psi[2:]
    s = (xi + eta) / np.sqrt(2)
    d = (xi - eta) / np.sqrt(2)
    return PlanarPair(complex(s[0]), complex(s[1]), complex(d[0]), complex(d[1]))


def planar_lift(pair):
    s = np.array([pair.phi_plus, pair.phi_minus])
    d = np.array([pair.chi_minus, pair.chi_plus])
    xi = (s + d) / np.sqrt(2)
    eta = (s - d) / np.sqrt(2)
    return Bispinor.from_array(np.concatenate([xi, eta]))


def check_dyad(f1, f2, tol=ORTHO_TOL):
    """Orthonormal spacelike dyad in M^3 (metric diag(+1, -1, -1))."""
    F = np.array([f1, f2], dtype=float)
    gram = F @ METRIC3 @ F.T
    scale = max(1.0, np.abs(F).max() ** 2)
    if np.abs(gram + np.eye(2)).max() > tol * scale:
        raise ValueError("dyad is not orthonormal")
    return F


def dyad_completion(f1, f2):
    """Timelike unit vector f0^l = e^{lmn} f1_m f2_n completing the dyad."""
    return np.einsum(
        "lmn,...m,...n->...l", LEVI_CIVITA3, np.asarray(f1) @ METRIC3, np.asarray(f2) @ METRIC3
    )


def dyad_to_isotropic(rho, f1, f2):
    """Complex null vector u = rho (f1 + i f2)."""
    check_dyad(f1, f2)
    return rho * (np.asarray(f1, dtype=float) + 1j * np.asarray(f2, dtype=float))
