"""Radial bound states of the planar model equation and its references.

Each radial equation g'' + c1 g' + c0 g = 0 is brought to Sturm-Liouville
form (p g')' + p c0 g = 0 with c1 = p'/p and discretized by the standard
symmetric three-point scheme on r_i = i h, i = 1..n, with g = 0 at
r_max = (n + 1) h. Near the origin g ~ r^s with the Frobenius exponent s.
For s > 0 we impose g(0) = 0; for s = 0 an extra node at r = 0 carries a
half-cell finite-volume row.

Bound states are roots in eps of the j-th largest eigenvalue of the
tridiagonal matrix T(eps), found with Brent's method.
"""

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal
from scipy.optimize import brentq
from scipy.stats import linregress

EQUATIONS = ("model", "kg", "pauli")


class InsufficientData(RuntimeError):
    pass


@dataclass(frozen=True)
class RadialGrid:
    r_max: float
    n: int

    def __post_init__(self):
        if not (self.r_max > 0 and np.isfinite(self.r_max)):
            raise ValueError("r_max must be positive")
        if int(self.n) != self.n or self.n < 200:
            raise ValueError("need at least 200 radial points")

    @property
    def h(self):
        return self.r_max / (self.n + 1)

    @property
    def r(self):
        return self.h * np.arange(1, self.n + 1)

    def refined(self):
        """Same r_max, half the spacing; nodes of self are kept."""
        return RadialGrid(self.r_max, 2 * self.n + 1)

    @classmethod
    def for_alpha(cls, alpha, h=0.05, extent=30.0):
        r_max = extent / alpha
        return cls(r_max, int(round(r_max / h)) - 1)


def gaussian_profile(s):
    return -np.exp(-s * s)


def gaussian_profile_derivative(s):
    return 2 * s * np.exp(-s * s)


@dataclass(frozen=True, eq=False)
class ScaledPotential:
    """e Phi(r) = depth alpha^2 Psi(alpha r)."""

    alpha: float
    profile: Callable = gaussian_profile
    dprofile: Callable = gaussian_profile_derivative
    depth: float = 1.0

    def e_phi(self, r):
        return self.depth * self.alpha**2 * self.profile(self.alpha * np.asarray(r))

    def de_phi(self, r):
        return self.depth * self.alpha**3 * self.dprofile(self.alpha * np.asarray(r))

    def minimum(self, r_max):
        s = np.linspace(0, self.alpha * r_max, 4001)
        return float(self.depth * self.alpha**2 * self.profile(s).min())

    def sup(self, r_max):
        s = np.linspace(0, self.alpha * r_max, 4001)
        return float(self.depth * self.alpha**2 * np.abs(self.profile(s)).max())

    def negated(self):
        return ScaledPotential(self.alpha, self.profile, self.dprofile, -self.depth)


@dataclass(frozen=True)
class RadialChannel:
    """Model channel k with its Klein-Gordon and Pauli partners."""

    k: int
    sign: int = 1
    side: str = "electron"

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.side not in ("electron", "positron"):
            raise ValueError("side must be electron or positron")

    @property
    def _shift(self):
        return self.sign if self.side == "electron" else -self.sign

    @property
    def n_kg(self):
        return abs(self.k - self._shift)

    @property
    def l_pauli(self):
        return self.k - self._shift

    def index(self, equation):
        return {"model": self.k, "kg": self.n_kg, "pauli": self.l_pauli}[equation]


def _check_r(r):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("radial samples must be positive")
    return r


def radial4_coefficients(k, m, eps, phi, dphi, sign, r):
    """(c1, c0) of the single second order equation for g.

    c0 is evaluated as (1 - k^2 - 2q)/r^2 + ..., q = m^2 r^2/(k^2 + m^2 r^2),
    which equals (k^2 - m^2 r^2)/((k^2 + m^2 r^2) r^2) - k^2/r^2 + ... and
    reduces exactly to the Klein-Gordon form with n^2 = 1 at k = 0.
    """
    r = _check_r(r)
    den = k * k + m * m * r * r
    q = m * m * r * r / den
    c1 = (3 * k * k + m * m * r * r) / (den * r)
    lin = sign * 2 * k * m * (eps - phi) / den + sign * k * dphi / (m * r)
    c0 = (1 - k * k - 2 * q) / r**2 + lin + (eps - phi) ** 2 - m * m
    return c1, c0


def kg_coefficients(n, m, eps, phi, r):
    r = _check_r(r)
    # the + 0.0 stands in for the model's k-linear terms so k = 0 sums round identically
    return 1 / r, -(n * n) / r**2 + 0.0 + (eps - phi) ** 2 - m * m


def pauli_coefficients(l, m, E, phi, r):
    """Standard form of -(g'' + g'/r - l^2 g/r^2)/(2m) + e Phi g = E g."""
    r = _check_r(r)
    return 1 / r, -(l * l) / r**2 + 2 * m * (E - phi)


def frobenius_exponent(equation, index):
    if equation == "model":
        return abs(index) - 1 if index != 0 else 1
    if equation in ("kg", "pauli"):
        return abs(index)
    raise ValueError(f"unknown equation {equation!r}")


def sl_weight(equation, index, m, r):
    """p(r) with c1 = p'/p."""
    r = np.asarray(r, dtype=float)
    if equation == "model":
        return r * (m * m * r * r / (index * index + m * m * r * r))
    return r.copy()


def _c0(equation, index, m, eps, potential, sign, r):
    phi = potential.e_phi(r)
    if equation == "model":
        return radial4_coefficients(index, m, eps, phi, potential.de_phi(r), sign, r)[1]
    if equation == "kg":
        return kg_coefficients(index, m, eps, phi, r)[1]
    if equation == "pauli":
        return pauli_coefficients(index, m, eps - m, phi, r)[1]
    raise ValueError(f"unknown equation {equation!r}")


def assemble(equation, index, m, eps, potential, grid, sign=1):
    """Symmetric tridiagonal (diag, offdiag) of the discretized operator."""
    h, r = grid.h, grid.r
    p_half = sl_weight(equation, index, m, np.concatenate([[h / 2], r + h / 2]))
    d = -(p_half[1:] + p_half[:-1]) / h**2 + sl_weight(equation, index, m, r) * _c0(
        equation, index, m, eps, potential, sign, r
    )
    off = p_half[1:-1] / h**2
    if frobenius_exponent(equation, index) == 0:
        # origin cell [0, h/2], source integrated at its midpoint
        rc = np.array([h / 4])
        src = 0.5 * h * sl_weight(equation, index, m, rc) * _c0(
            equation, index, m, eps, potential, sign, rc
        )
        d0 = -p_half[0] / h**2 + src[0] / h
        d = np.concatenate([[d0], d])
        off = np.concatenate([[p_half[0] / h**2], off])
    return d, off


def nodes_of(grid, equation, index):
    if frobenius_exponent(equation, index) == 0:
        return np.concatenate([[0.0], grid.r])
    return grid.r


def _eig_j(d, off, j):
    n = d.size
    return eigvalsh_tridiagonal(d, off, select="i", select_range=(n - 1 - j, n - 1 - j),
                                tol=np.finfo(float).tiny)[0]


def count_positive(equation, index, m, eps, potential, grid, sign=1):
    d, off = assemble(equation, index, m, eps, potential, grid, sign)
    hi = np.abs(d).max() + 2 * np.abs(off).max()
    return eigvalsh_tridiagonal(d, off, select="v", select_range=(0.0, hi)).size


@dataclass(frozen=True, eq=False)
class BoundState:
    equation: str
    index: int
    eps: float
    m: float
    r: np.ndarray = field(repr=False)
    g: np.ndarray = field(repr=False)
    nodes: int = 0
    error_estimate: float = np.nan
    decay: float = 0.0

    @property
    def E(self):
        return self.eps - self.m


def _node_count(g, rel=1e-8):
    big = g[np.abs(g) > rel * np.abs(g).max()]
    return int(np.sum(np.diff(np.sign(big)) != 0))


def solve_bound_states(equation, channel, potential, grid, count=1, m=1.0,
                       xtol=1e-15, decay_tol=1e-3):
    """Bound states of one radial equation, ground state first.

    Positron states are obtained from the electron problem with opposite
    sign and potential through eps -> -eps.
    """
    if equation not in EQUATIONS:
        raise ValueError(f"unknown equation {equation!r}")
    index = channel.index(equation)
    sign = channel.sign
    if channel.side == "positron":
        potential, sign = potential.negated(), -sign
    if potential.sup(grid.r_max) >= m:
        raise ValueError("potential violates sup|e Phi| < m")

    def T(eps):
        return assemble(equation, index, m, eps, potential, grid, sign)

    hi = m
    lo = max(m + 2 * potential.minimum(grid.r_max), -m)
    while count_positive(equation, index, m, lo, potential, grid, sign) and lo > -m:
        lo = max(lo - (m - lo), -m)
    available = count_positive(equation, index, m, hi, potential, grid, sign)

    states = []
    for j in range(min(count, available)):
        f = lambda e: _eig_j(*T(e), j)
        if not (f(lo) < 0 < f(hi)):
            break
        eps = brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
        d, off = T(eps)
        n = d.size
        _, vec = eigh_tridiagonal(d, off, select="i", select_range=(n - 1 - j, n - 1 - j))
        g = vec[:, 0]
        g = g / g[np.argmax(np.abs(g))]
        decay = float(abs(g[-1]))
        if decay > decay_tol:
            warnings.warn(f"{equation} state {j} at eps={eps:.12g} does not decay (|g|={decay:.2e})")
            continue
        e_out = -eps if channel.side == "positron" else eps
        states.append(BoundState(equation, index, float(e_out), m, nodes_of(grid, equation, index),
                                 g, _node_count(g), np.nan, decay))
    return states


def solve_with_error(equation, channel, potential, grid, count=1, m=1.0):
    """Solve on grid and its refinement; return Richardson-extrapolated states.

    The error estimate |eps_h - eps_{h/2}|/3 bounds the fine-grid error of a
    second order scheme.
    """
    coarse = solve_bound_states(equation, channel, potential, grid, count, m)
    fine = solve_bound_states(equation, channel, potential, grid.refined(), count, m)
    out = []
    for c, f in zip(coarse, fine):
        shift = f.eps - c.eps
        out.append(BoundState(f.equation, f.index, f.eps + shift / 3, m, f.r, f.g, f.nodes,
                              abs(shift) / 3, f.decay))
    return out


def ground_state(equation, channel, potential, grid, m=1.0):
    states = solve_with_error(equation, channel, potential, grid, 1, m)
    if not states or states[0].nodes != 0:
        return None
    return states[0]


def reconstruct_f(g, dg, k, m, eps, phi, sign, r):
    """f = [(k/r) g' + (k/r^2) g + sign m (eps - e Phi) g] / (k^2/r^2 + m^2)."""
    r = _check_r(r)
    return (k / r * dg + k / r**2 * g + sign * m * (eps - phi) * g) / (k * k / r**2 + m * m)


def radial3_residual(f, g, k, m, eps, phi, sign, r):
    """Residual of g'' + g'/r - g/r^2 - (k/r) f' + (k/r^2) f - m^2 g + sign m (eps - e Phi) f.

    Derivatives by second order differences on the uniform grid ``r``.
    """
    h = r[1] - r[0]
    dg = np.gradient(g, h, edge_order=2)
    d2g = np.gradient(dg, h, edge_order=2)
    df = np.gradient(f, h, edge_order=2)
    return (d2g + dg / r - g / r**2 - k / r * df + k / r**2 * f - m * m * g
            + sign * m * (eps - phi) * f)


@dataclass(frozen=True, eq=False)
class SweepResult:
    channel: RadialChannel
    rows: list
    exponent: float
    stderr: float
    usable: int
    reliable: bool
    exact_coincidence: bool
    pauli_exponent: float
    e_over_alpha2: np.ndarray
    dropped: list

    @property
    def e_spread(self):
        v = self.e_over_alpha2
        return float((v.max() - v.min()) / np.abs(v).mean())


def _fit(alphas, values):
    fit = linregress(np.log(alphas), np.log(values))
    return float(fit.slope), float(fit.stderr)


def scaling_sweep(channel, alphas, m=1.0, profile=gaussian_profile,
                  dprofile=gaussian_profile_derivative, h=0.05, extent=30.0, floor=1e-13):
    """Model vs Klein-Gordon (and Pauli) ground states across alphas.

    Each row holds alpha, eps_model, eps_kg, eps_pauli_plus_m, delta and
    the Richardson error estimate of delta (the larger of the model and
    Klein-Gordon estimates).
    """
    rows, dropped = [], []
    for alpha in alphas:
        pot = ScaledPotential(alpha, profile, dprofile)
        grid = RadialGrid.for_alpha(alpha, h, extent)
        sol = {eq: ground_state(eq, channel, pot, grid, m) for eq in EQUATIONS}
        if any(s is None for s in sol.values()):
            warnings.warn(f"alpha={alpha}: no matched ground state, dropped")
            dropped.append(alpha)
            continue
        em, ek, ep = sol["model"], sol["kg"], sol["pauli"]
        rows.append(dict(
            alpha=alpha,
            eps_model=em.eps,
            eps_kg=ek.eps,
            eps_pauli_plus_m=ep.eps,
            delta=abs(em.eps - ek.eps),
            richardson_err=max(em.error_estimate, ek.error_estimate),
            pauli_delta=abs(em.eps - ep.eps),
        ))
    if len(rows) < 3:
        raise InsufficientData(f"only {len(rows)} usable alphas, need 3")

    a = np.array([row["alpha"] for row in rows])
    delta = np.array([row["delta"] for row in rows])
    err = np.array([row["richardson_err"] for row in rows])
    e_ratio = np.array([(row["eps_model"] - m) / row["alpha"] ** 2 for row in rows]) * (
        1 if channel.side == "electron" else -1
    )
    exact = bool(np.all(delta <= np.maximum(floor, err)))
    if exact:
        p, s = np.nan, np.nan
    else:
        p, s = _fit(a, delta)
    pp, _ = _fit(a, np.array([row["pauli_delta"] for row in rows]))
    i = int(np.argmin(a))
    reliable = bool(exact or err[i] < 0.1 * delta[i])
    return SweepResult(channel, rows, p, s, len(rows), reliable, exact, pp, e_ratio, dropped)
