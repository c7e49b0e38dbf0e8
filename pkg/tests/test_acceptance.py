"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run directly with ``python tests/test_acceptance.py`` or through pytest.
"""

import time

import numpy as np
import pytest

from spinorless import algebra as alg
from spinorless import lagrangian as lg
from spinorless import planar as pl
from spinorless import radial as rd

ALPHAS = [0.2, 0.15, 0.1, 0.07, 0.05]


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def random_bispinors(rng, n):
    psi = rng.normal(size=(n, 4)) + 1j * rng.normal(size=(n, 4))
    keep = ~alg.is_degenerate(psi, tol=1e-3)
    return psi[keep]


def frame_error(T, U):
    scale = max(1.0, np.abs(U.frame).max())
    return max(abs(T.rho - U.rho) / U.rho,
               abs(alg.wrap_angle(T.theta - U.theta)),
               np.abs(T.frame - U.frame).max() / scale,
               0.0 if T.tau == U.tau else np.inf)


# 1. bijection


def test_c1_bijection(capsys):
    t0 = time.perf_counter()
    psi = random_bispinors(np.random.default_rng(1), 10_000)
    rho, theta, F = alg.frame_arrays(psi)
    G = np.einsum("nij,jk,nlk->nil", F, alg.METRIC, F)
    # Gram cancellation costs |F|^2 ulps, so errors are relative to the frame scale
    scale = np.maximum(1.0, np.abs(F).max(axis=(1, 2)) ** 2)
    raw = np.abs(G - alg.METRIC).max(axis=(1, 2))
    ortho = (raw / scale).max()
    inv = 0.0
    for p, r, th, f in zip(psi, rho, theta, F):
        q = alg.tensors_to_bispinor(alg.FrameTensors(r, th, *f)).as_array()
        inv = max(inv, min(np.abs(q - p).max(), np.abs(q + p).max()) / np.abs(p).max())
    dt = time.perf_counter() - t0
    ok = psi.shape[0] == 10_000 and ortho < 1e-10 and inv < 1e-9 and dt < 10
    report(capsys, 1, ok, f"n={psi.shape[0]} ortho={ortho:.2e} (absolute {raw.max():.2e}, "
                          f"max |F|^2 {scale.max():.3g}) inverse={inv:.2e} time={dt:.2f}s")


# 2. equivariance


def random_transform(rng, kind):
    n = rng.normal(size=3)
    n /= np.linalg.norm(n)
    if kind == "boost":
        return alg.boost(rng.uniform(-1.5, 1.5), n)
    if kind == "rotation":
        return alg.rotation(rng.uniform(-2 * np.pi, 2 * np.pi), n)
    if kind == "space":
        return alg.space_inversion() @ alg.rotation(rng.uniform(-np.pi, np.pi), n)
    return alg.time_inversion() @ alg.boost(rng.uniform(-1, 1), n)


def test_c2_equivariance(capsys):
    rng = np.random.default_rng(2)
    kinds = ["boost", "rotation", "space", "time"]
    psi = random_bispinors(rng, 400)[:200]
    err, theta_flip = 0.0, 0.0
    for i, p in enumerate(psi):
        kind = kinds[i % 4]
        L = random_transform(rng, kind)
        tau = 1 if i % 8 < 4 else -1
        T = alg.bispinor_to_tensors(p, tau)
        expect = alg.apply_to_frame(L, T)
        got = alg.bispinor_to_tensors(alg.apply_to_bispinor(L, p), expect.tau)
        err = max(err, frame_error(got, expect))
        if kind in ("space", "time"):
            theta_flip = max(theta_flip, abs(alg.wrap_angle(got.theta + T.theta)))
    p = psi[0]
    T = alg.bispinor_to_tensors(p)
    full = alg.bispinor_to_tensors(alg.apply_to_bispinor(alg.rotation(2 * np.pi, [0.0, 0.6, 0.8]), p))
    turn = frame_error(full, T)
    ok = len(psi) == 200 and err < 1e-9 and theta_flip < 1e-9 and turn < 1e-9
    report(capsys, 2, ok, f"pairs={len(psi)} max_err={err:.2e} theta_flip={theta_flip:.2e} "
                          f"full_turn={turn:.2e}")


# 3. Lagrangian identity


def test_c3_identity_convergence(capsys):
    t0 = time.perf_counter()
    ratios = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        field_, pot = lg.random_field(rng), lg.random_potential(rng)
        pts = lg.sample_points(rng, 200)
        ratio, _, _ = lg.convergence_ratio(field_, pot, pts, 0.05)
        ratios.append(ratio)
    rng = np.random.default_rng(99)
    pts = lg.sample_points(rng, 50)
    const = lg.identity_residual(lg.constant_field([1, 0.2, 0.7j, 0.1]),
                                 lg.constant_potential([0.3, -0.1, 0.2, 0.05]), pts, 0.05).max
    dt = time.perf_counter() - t0
    ratios = np.array(ratios)
    ok = bool(np.all((ratios >= 3) & (ratios <= 5))) and const < 1e-12 and dt < 60
    report(capsys, 3, ok, f"ratio in [{ratios.min():.3f},{ratios.max():.3f}] constant={const:.2e} "
                          f"time={dt:.1f}s")


# 4. k = 0 coincidence


def test_c4_k0_coincidence(capsys):
    pot = rd.ScaledPotential(0.2, lambda s: 4 * rd.gaussian_profile(s),
                             lambda s: 4 * rd.gaussian_profile_derivative(s))
    grid = rd.RadialGrid.for_alpha(0.2)
    mat = 0.0
    for eps in np.linspace(0.9, 0.999, 7):
        dm, om = rd.assemble("model", 0, 1.0, eps, pot, grid)
        dk, ok_ = rd.assemble("kg", 1, 1.0, eps, pot, grid)
        mat = max(mat, np.abs(dm - dk).max(), np.abs(om - ok_).max())
    ch = rd.RadialChannel(0)
    em = rd.solve_bound_states("model", ch, pot, grid)
    ek = rd.solve_bound_states("kg", ch, pot, grid)
    de = abs(em[0].eps - ek[0].eps) if em and ek else np.inf
    ok = mat <= 1e-14 and de <= 1e-12
    report(capsys, 4, ok, f"matrix_diff={mat:.2e} eps_diff={de:.2e}")


# 5, 6. scaling sweep


@pytest.fixture(scope="module")
def k1_sweep():
    t0 = time.perf_counter()
    res = rd.scaling_sweep(rd.RadialChannel(1), ALPHAS, h=0.0125)
    return res, time.perf_counter() - t0


def test_c5_scaling_exponent(capsys, k1_sweep):
    res, dt = k1_sweep
    ok = res.usable == 5 and res.reliable and abs(res.exponent - 4) <= 0.5 and dt < 300
    report(capsys, 5, ok, f"exponent={res.exponent:.4f} stderr={res.stderr:.1e} "
                          f"reliable={res.reliable} pauli_exponent={res.pauli_exponent:.3f} "
                          f"time={dt:.1f}s")


def test_c6_binding_scale(capsys, k1_sweep):
    res, _ = k1_sweep
    ok = res.usable == 5 and res.e_spread < 0.2
    report(capsys, 6, ok, f"E/alpha^2 in [{res.e_over_alpha2.min():.4f},{res.e_over_alpha2.max():.4f}] "
                          f"spread={res.e_spread:.4f}")


# 7. essential spectrum structure


def test_c7a_weyl(capsys):
    g = pl.PlanarGrid(100.0, 401)
    P = pl.assemble_pencil(g, pl.PlanarPotential.zero(g))
    res = [pl.weyl_residual(pl.weyl_packet(g, 1.25, width=w), P, 1.25) for w in (8, 16, 32)]
    ok = res[0] > res[1] > res[2]
    report(capsys, "7a", ok, "residuals " + " > ".join(f"{r:.4f}" for r in res))


def test_c7b_interval(capsys):
    stats = []
    for L in (8, 12):
        g = pl.PlanarGrid(float(L), 2 * L + 1)
        stats.append(pl.interval_statistics(pl.assemble_pencil(g, pl.PlanarPotential.gaussian_well(g, 0.75))))
    d = [s.delta_box for s in stats]
    ok = all(s.n_polluting == 0 for s in stats) and d[1] < d[0]
    report(capsys, "7b", ok, f"delta_box {d[0]:.5f} -> {d[1]:.5f} "
                             f"n_gap={[s.n_gap for s in stats]} n_polluting={[s.n_polluting for s in stats]}")


def test_c7c_symbol(capsys):
    rng = np.random.default_rng(7)
    err = 0.0
    for _ in range(100):
        xi, eps, m = rng.normal(size=2), rng.uniform(-2, 2), rng.uniform(0.5, 2)
        for sign in (1, -1):
            d = pl.symbol_det(xi, eps, m, sign)
            err = max(err, abs(d - m * m * (xi @ xi + m * m - eps * eps)))
    report(capsys, "7c", err < 1e-12, f"max_err={err:.2e}")


# 8. squared identity


def random_smooth_potential(grid, rng, e=-1.0):
    X1, X2 = grid.mesh()

    def trig():
        k, ph, a = rng.normal(size=2) * 0.5, rng.uniform(0, 2 * np.pi), rng.uniform(0.05, 0.3)
        return a * np.sin(k[0] * X1 + k[1] * X2 + ph)

    return pl.PlanarPotential(trig() / e, trig() + trig(), trig() + trig(), e)


def test_c8_squared_identity(capsys):
    g = pl.PlanarGrid(5.0, 11)
    rng = np.random.default_rng(8)
    free = pl.squared_identity_residual(g, pl.PlanarPotential.zero(g), 1.0, 0.6, rng).residual
    mag = pl.squared_identity_residual(g, random_smooth_potential(g, rng), 1.0, 0.6, rng).residual
    ok = free < 1e-12 and mag < 1e-12
    report(capsys, 8, ok, f"A=0 {free:.2e} random A {mag:.2e}")


# 9. 2D pencil vs radial model


def test_c9_cross_module(capsys):
    eps2d = {}
    for N in (32, 48):
        g = pl.PlanarGrid(30.0, N)
        P = pl.assemble_pencil(g, pl.PlanarPotential.gaussian_well(g, 0.2))
        eps2d[N] = pl.gap_eigenpairs(P, 1).eps[0]
    h32, h48 = 60 / 31, 60 / 47
    est2d = abs(eps2d[48] - eps2d[32]) / ((h32 / h48) ** 2 - 1)
    pot = rd.ScaledPotential(0.2, rd.gaussian_profile, rd.gaussian_profile_derivative)
    rad = rd.ground_state("model", rd.RadialChannel(1), pot, rd.RadialGrid.for_alpha(0.2, 0.0125))
    tol = min(max(est2d, rad.error_estimate), 1e-3)
    diff = abs(eps2d[48] - rad.eps)
    report(capsys, 9, diff <= tol, f"eps_2d={eps2d[48]:.8f} eps_radial={rad.eps:.8f} "
                                   f"diff={diff:.2e} tol={tol:.2e}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
