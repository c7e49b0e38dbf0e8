"""Finite-difference planar model operator and its spectral pencil.

Grid functions are flattened in C order (x1 index slow, x2 index fast).
Covariant derivatives are P_k = i D_k - e A_k with central differences
D_k and Dirichlet truncation, so every P_k is hermitian. Time-harmonic
states u(x) e^{-i eps t} give P_0 = eps - e Phi.
"""

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps
from scipy.optimize import brentq

from .algebra import METRIC3

RESTRICTION = "‖eΦ‖_{L∞}<m"


class RestrictionViolated(ValueError):
    pass


@dataclass(frozen=True)
class PlanarGrid:
    L: float
    N: int

    def __post_init__(self):
        if not (self.L > 0 and np.isfinite(self.L)):
            raise ValueError("box half-width L must be positive")
        if int(self.N) != self.N or self.N < 8:
            raise ValueError("need at least 8 points per side")

    @property
    def h(self):
        return 2 * self.L / (self.N - 1)

    @property
    def x(self):
        return np.linspace(-self.L, self.L, self.N)

    @property
    def size(self):
        return self.N * self.N

    def mesh(self):
        return np.meshgrid(self.x, self.x, indexing="ij")


@dataclass(frozen=True, eq=False)
class PlanarPotential:
    """Samples of Phi and covariant A_1, A_2 on the grid; ``e`` is the charge."""

    phi: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    e: float = -1.0

    @property
    def e_phi(self):
        return self.e * self.phi

    def sup_e_phi(self):
        return float(np.abs(self.e_phi).max())

    def satisfies_restriction(self, m):
        return self.sup_e_phi() < m

    @classmethod
    def zero(cls, grid, e=-1.0):
        z = np.zeros((grid.N, grid.N))
        return cls(z, z.copy(), z.copy(), e)

    @classmethod
    def gaussian_well(cls, grid, alpha, depth=1.0, e=-1.0):
        """e Phi = -depth alpha^2 exp(-(alpha r)^2), no magnetic part."""
        X1, X2 = grid.mesh()
        e_phi = -depth * alpha**2 * np.exp(-(alpha**2) * (X1**2 + X2**2))
        z = np.zeros_like(e_phi)
        return cls(e_phi / e, z, z.copy(), e)

    def with_gauge(self, grid, chi, dchi1, dchi2):
        """A_k -> A_k + d_k chi, given chi and its partials as callables of (x1, x2)."""
        X1, X2 = grid.mesh()
        return PlanarPotential(self.phi, self.a1 + dchi1(X1, X2), self.a2 + dchi2(X1, X2), self.e)

    def negated(self):
        return PlanarPotential(-self.phi, self.a1, self.a2, self.e)


def read_potential_csv(path, e=-1.0):
    """Read ``x1,x2,phi,a1,a2`` rows on a square uniform grid."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    for col in ("x1", "x2", "phi", "a1", "a2"):
        if col not in data.dtype.names:
            raise ValueError(f"potential file lacks column {col}")
    xs = np.unique(data["x1"])
    N = len(xs)
    if len(data) != N * N or not np.allclose(np.unique(data["x2"]), xs):
        raise ValueError("potential file is not a full square grid")
    grid = PlanarGrid(float(xs[-1]), N)
    if not np.allclose(xs, grid.x, atol=1e-9 * grid.L):
        raise ValueError("grid must be uniform and symmetric about 0")
    order = np.lexsort((data["x2"], data["x1"]))
    d = data[order]
    shape = (N, N)
    pot = PlanarPotential(
        d["phi"].reshape(shape), d["a1"].reshape(shape), d["a2"].reshape(shape), e
    )
    return grid, pot


def write_potential_csv(path, grid, potential):
    X1, X2 = grid.mesh()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "x2", "phi", "a1", "a2"])
        for row in zip(X1.ravel(), X2.ravel(), potential.phi.ravel(),
                       potential.a1.ravel(), potential.a2.ravel()):
            w.writerow([f"{v:.17g}" for v in row])


def difference_1d(N, h):
    """Central difference with Dirichlet truncation (antisymmetric)."""
    off = np.ones(N - 1) / (2 * h)
    return sps.diags([-off, off], [-1, 1], format="csr")


def covariant_derivatives(grid, potential):
    """Return sparse (P1, P2) with P_k = i D_k - e A_k."""
    D = difference_1d(grid.N, grid.h)
    I = sps.identity(grid.N, format="csr")
    D1 = sps.kron(D, I, format="csr")
    D2 = sps.kron(I, D, format="csr")
    e = potential.e
    P1 = 1j * D1 - e * sps.diags(potential.a1.ravel())
    P2 = 1j * D2 - e * sps.diags(potential.a2.ravel())
    return P1.tocsr(), P2.tocsr()


def time_derivative(grid, potential, eps):
    """P_0 = eps - e Phi for time-harmonic states."""
    return sps.diags(eps - potential.e_phi.ravel()).astype(complex).tocsr()


def bracket_matrix(grid, potential, eps):
    """Matrix of u -> [P, u] on contravariant (u^0, u^1, u^2)."""
    P1, P2 = covariant_derivatives(grid, potential)
    P0 = time_derivative(grid, potential, eps)
    return sps.bmat([[None, P2, -P1], [P2, None, P0], [-P1, -P0, None]], format="csr")


def assemble_curl_A(grid, potential, m, sign=1, eps=0.0):
    """Return (curl, hermitian_form, mass).

    ``curl`` is curl_A = -i[P, .] acting on contravariant components, so the
    model equation reads ``curl @ u = mass @ u`` with ``mass = sign m I``.
    ``hermitian_form`` lowers the output index (metric diag(1, -1, -1)); it
    is the hermitian matrix behind the formal self-adjointness.
    """
    n = grid.size
    curl = (-1j * bracket_matrix(grid, potential, eps)).tocsr()
    G = sps.kron(sps.diags(np.diag(METRIC3)), sps.identity(n), format="csr")
    herm = (G @ curl).tocsr()
    mass = sign * m * sps.identity(3 * n, format="csr")
    return curl, herm, mass


@dataclass(frozen=True, eq=False)
class PencilMatrices:
    A: sps.csr_matrix
    B: sps.csr_matrix
    curl: sps.csr_matrix
    m: float
    sign: int
    grid: PlanarGrid
    potential: PlanarPotential

    def operator(self, eps):
        return (self.A - eps * self.B).tocsr()


def assemble_pencil(grid, potential, m=1.0, sign=1):
    """Pencil A u = eps B u for time-harmonic planar states."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if not potential.satisfies_restriction(m):
        raise RestrictionViolated(
            f"restriction {RESTRICTION} violated: sup|eΦ| = {potential.sup_e_phi():.6g}, m = {m}"
        )
    n = grid.size
    P1, P2 = covariant_derivatives(grid, potential)
    I = sps.identity(n, format="csr")
    ephi = sps.diags(potential.e_phi.ravel())
    A = sps.bmat(
        [
            [m * m * I + P2 @ P2, -sign * 1j * m * ephi - P2 @ P1],
            [sign * 1j * m * ephi - P1 @ P2, m * m * I + P1 @ P1],
        ],
        format="csr",
    )
    B = sps.bmat([[None, -sign * 1j * m * I], [sign * 1j * m * I, None]], format="csr")
    _, herm, _ = assemble_curl_A(grid, potential, m, sign)
    return PencilMatrices(A, B, herm, m, sign, grid, potential)


def reduced_action(grid, potential, m, sign, eps, u):
    """Eliminate u^0 from curl_A u = sign m u and return sign i m (rows 1, 2).

    Equals (A - eps B) u for u = (u^1, u^2).
    """
    n = grid.size
    P1, P2 = covariant_derivatives(grid, potential)
    P0 = time_derivative(grid, potential, eps)
    u1, u2 = u[:n], u[n:]
    u0 = -sign * 1j * (P2 @ u1 - P1 @ u2) / m
    r1 = P2 @ u0 + P0 @ u2 - sign * 1j * m * u1
    r2 = -P1 @ u0 - P0 @ u1 - sign * 1j * m * u2
    return sign * 1j * m * np.concatenate([r1, r2])


# ---------------------------------------------------------------------------
# symbol and Weyl packets


def symbol_matrix(xi, eps, m=1.0, sign=1):
    """Principal symbol of A - eps B with P_k -> -xi_k (free case)."""
    s1, s2 = -np.asarray(xi, dtype=float)
    return np.array(
        [
            [m * m + s2 * s2, -s2 * s1 + sign * 1j * m * eps],
            [-s1 * s2 - sign * 1j * m * eps, m * m + s1 * s1],
        ]
    )


def symbol_det(xi, eps, m=1.0, sign=1):
    return float(np.linalg.det(symbol_matrix(xi, eps, m, sign)).real)


def discrete_symbol(eta, h):
    """Central-difference symbol: xi_k -> sin(eta_k h)/h."""
    return np.sin(np.asarray(eta, dtype=float) * h) / h


@dataclass(frozen=True, eq=False)
class WeylPacket:
    eta: np.ndarray
    width: float
    center: np.ndarray
    polarization: np.ndarray

    def samples(self, grid):
        """Flattened (u^1, u^2) of the Gaussian-windowed plane wave."""
        X1, X2 = grid.mesh()
        d1, d2 = X1 - self.center[0], X2 - self.center[1]
        sigma = self.width * grid.h
        env = np.exp(-(d1**2 + d2**2) / (2 * sigma**2))
        wave = (env * np.exp(1j * (self.eta[0] * d1 + self.eta[1] * d2))).ravel()
        return np.concatenate([self.polarization[0] * wave, self.polarization[1] * wave])


def null_polarization(S):
    """Unit null vector of a singular 2x2 matrix."""
    _, _, vh = np.linalg.svd(S)
    return vh[-1].conj()


def weyl_packet(grid, eps, m=1.0, sign=1, angle=0.0, width=8.0, center=(0.0, 0.0)):
    """Packet whose carrier lies on the discrete zero set |s(eta)|^2 = eps^2 - m^2."""
    if not abs(eps) > m:
        raise ValueError("Weyl packets need |eps| > m")
    h = grid.h
    c, s = np.cos(angle), np.sin(angle)
    target = eps * eps - m * m

    def f(t):
        return np.sum(discrete_symbol(t * np.array([c, s]), h) ** 2) - target

    tmax = np.pi / (2 * h * max(abs(c), abs(s)))
    if f(tmax) < 0:
        raise ValueError("eps lies above the grid's resolvable band")
    t = brentq(f, 0.0, tmax, xtol=1e-15, rtol=1e-15)
    eta = t * np.array([c, s])
    pol = null_polarization(symbol_matrix(discrete_symbol(eta, h), eps, m, sign))
    return WeylPacket(eta, float(width), np.asarray(center, dtype=float), pol)


def weyl_residual(packet, pencil, eps, tol=1e-8):
    """||(A - eps B) u|| / ||u|| for the sampled packet."""
    m, h = pencil.m, pencil.grid.h
    S = symbol_matrix(discrete_symbol(packet.eta, h), eps, m, pencil.sign)
    if abs(np.linalg.det(S)) > tol * m**2 * (m**2 + np.sum(np.asarray(packet.eta) ** 2)):
        raise ValueError("packet carrier is off the zero set of the symbol")
    u = packet.samples(pencil.grid)
    return float(np.linalg.norm(pencil.operator(eps) @ u) / np.linalg.norm(u))


# ---------------------------------------------------------------------------
# spectra


def _inverse_sqrt(A):
    w, V = sla.eigh(A)
    if w.min() <= 0:
        raise RuntimeError("A is not positive definite")
    return (V / np.sqrt(w)) @ V.conj().T


def reciprocal_operator(pencil):
    """Dense A^{-1/2} B A^{-1/2} and A^{-1/2}."""
    Ais = _inverse_sqrt(pencil.A.toarray())
    C = (pencil.B.T @ Ais.T).T @ Ais
    return (C + C.conj().T) / 2, Ais


@dataclass(frozen=True, eq=False)
class GapSpectrum:
    eps: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    side: str


def reciprocal_eigh(pencil, subset_by_value=None):
    """Reciprocals lambda = 1/eps and A-orthonormal pencil vectors.

    B u = lambda A u is solved by Cholesky reduction; its eigenvalues are
    those of A^{-1/2} B A^{-1/2} and u = A^{-1/2} y.
    """
    return sla.eigh(pencil.B.toarray(), pencil.A.toarray(), subset_by_value=subset_by_value)


def gap_eigenpairs(pencil, count=None, side="electron", decomposition=None, edge_tol=1e-12):
    """Gap eigenvalues |eps| < m of the pencil, ground state first.

    ``decomposition`` may carry a precomputed ``reciprocal_eigh`` result.
    Reciprocals within ``edge_tol`` (relative) of 1/m are band-edge modes,
    not gap eigenvalues.
    """
    if side not in ("electron", "positron"):
        raise ValueError("side must be electron or positron")
    m = pencil.m
    edge = (1 + edge_tol) / m
    if decomposition is None:
        window = (edge, np.inf) if side == "electron" else (-np.inf, -edge)
        lam, U = reciprocal_eigh(pencil, window)
    else:
        lam, U = decomposition
        keep = lam > edge if side == "electron" else lam < -edge
        lam, U = lam[keep], U[:, keep]
    eps = 1 / lam
    order = np.argsort(eps) if side == "electron" else np.argsort(-eps)
    eps, U = eps[order], U[:, order]
    if count is not None:
        eps, U = eps[:count], U[:, :count]
    res = np.array(
        [np.linalg.norm(pencil.operator(e) @ U[:, i]) / np.linalg.norm(U[:, i]) for i, e in enumerate(eps)]
    )
    return GapSpectrum(eps, U, res, side)


def reciprocal_spectrum(pencil):
    return sla.eigvalsh(reciprocal_operator(pencil)[0])


def rim_fraction(grid, u):
    """Share of |u|^2 on the outer part max(|x1|, |x2|) > L/2."""
    X1, X2 = grid.mesh()
    rim = (np.maximum(np.abs(X1), np.abs(X2)) > grid.L / 2).ravel()
    w = np.abs(u.reshape(2, -1)) ** 2
    return float(w[:, rim].sum() / w.sum())


@dataclass(frozen=True)
class IntervalStatistics:
    m: float
    delta_box: float
    max_gap: float
    n_inside: int
    n_gap: int
    n_polluting: int
    gap_reciprocals: np.ndarray = field(repr=False)
    outliers: np.ndarray = field(repr=False)


def interval_statistics(pencil, rim_tol=0.1, decomposition=None, edge_tol=1e-12):
    """Essential-interval statistics of A^{-1/2} B A^{-1/2}.

    Eigenvalues outside [-1/m, 1/m] with eigenvectors concentrated away
    from the box rim are classified as gap reciprocals. ``delta_box`` is the
    distance from the band edges +-1/m to the nearest remaining eigenvalue
    (box effects keep the discrete continuum short of the edges), and
    ``outliers`` lists unlocalized eigenvalues beyond +-1/m (pollution).
    Eigenvalues within ``edge_tol`` (relative) of the edges count as inside;
    odd N gives exact eps = +-m modes from the kernel of the difference matrix.
    """
    m = pencil.m
    lam, U = reciprocal_eigh(pencil) if decomposition is None else decomposition
    edge = 1 / m
    outside = np.abs(lam) > edge * (1 + edge_tol)
    localized = np.array([outside[i] and rim_fraction(pencil.grid, U[:, i]) < rim_tol
                          for i in range(lam.size)])
    gap = lam[localized]
    rest = lam[~localized]
    inside = rest[np.abs(rest) <= edge * (1 + edge_tol)]
    outliers = rest[np.abs(rest) > edge * (1 + edge_tol)]
    if inside.size:
        delta = max(0.0, edge - inside.max(), inside.min() + edge)
        pts = np.sort(np.concatenate([[-edge, edge], inside]))
        max_gap = float(np.diff(pts).max())
    else:
        delta, max_gap = np.inf, 2 * edge
    return IntervalStatistics(m, float(delta), max_gap, int(inside.size), int(gap.size),
                              int(outliers.size), gap, outliers)


# ---------------------------------------------------------------------------
# squared operator


def _lower_index(n, u):
    g = np.repeat(np.diag(METRIC3), n)
    return g * u


def delta_d(grid, potential, eps, u, swapped=False):
    """(delta_A d_A u)^nu = P_mu g^{mu mu} g^{nu nu} (P_mu u_nu - P_nu u_mu).

    With ``swapped`` the second term is applied as P_nu P_mu, exposing the
    commutator [P_mu, P_nu] that the ordered assembly avoids.
    """
    n = grid.size
    P1, P2 = covariant_derivatives(grid, potential)
    P = [time_derivative(grid, potential, eps), P1, P2]
    g = np.diag(METRIC3)
    ul = _lower_index(n, u).reshape(3, n)
    out = np.zeros((3, n), dtype=complex)
    for nu in range(3):
        for mu in range(3):
            first = P[mu] @ (P[mu] @ ul[nu])
            if swapped:
                second = P[nu] @ (P[mu] @ ul[mu])
            else:
                second = P[mu] @ (P[nu] @ ul[mu])
            out[nu] += g[mu] * g[nu] * (first - second)
    return out.ravel()


@dataclass(frozen=True)
class SquaredIdentity:
    residual: float
    ordering_discrepancy: float


def squared_identity_residual(grid, potential, m=1.0, eps=0.0, rng=None, n_vectors=3):
    """max ||(curl_A^2 - delta_A d_A) u|| / ||u|| over random u."""
    rng = np.random.default_rng(0) if rng is None else rng
    curl, _, _ = assemble_curl_A(grid, potential, m, 1, eps)
    res, disc = 0.0, 0.0
    for _ in range(n_vectors):
        u = rng.normal(size=3 * grid.size) + 1j * rng.normal(size=3 * grid.size)
        nu = np.linalg.norm(u)
        lhs = curl @ (curl @ u)
        rhs = delta_d(grid, potential, eps, u)
        alt = delta_d(grid, potential, eps, u, swapped=True)
        res = max(res, np.linalg.norm(lhs - rhs) / nu)
        disc = max(disc, np.linalg.norm(rhs - alt) / nu)
    return SquaredIdentity(float(res), float(disc))
