import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinorless import algebra as alg
from spinorless import lagrangian as lg

ZERO_A = np.zeros(4)
ZERO_D = np.zeros((4, 4))


def rotating_frame(omega):
    """Frame turning in the (1, 2)-plane at rate omega along x^0, with analytic partials."""

    def frame(x0):
        c, s = np.cos(omega * x0), np.sin(omega * x0)
        return np.array([[1, 0, 0, 0], [0, c, s, 0], [0, -s, c, 0], [0, 0, 0, 1.0]])

    def grad(x0):
        c, s = np.cos(omega * x0), np.sin(omega * x0)
        d = np.zeros((4, 4, 4))
        d[0, 1] = omega * np.array([0, -s, c, 0])
        d[0, 2] = omega * np.array([0, -c, -s, 0])
        return d

    return frame, grad


# densities at a point


def test_dirac_density_constant_examples():
    assert lg.dirac_density([1, 0, 1, 0], ZERO_D, ZERO_A) == pytest.approx(-2)
    assert lg.dirac_density([1, 0, 1j, 0], ZERO_D, ZERO_A) == pytest.approx(0, abs=1e-15)


def test_dirac_density_plane_wave_vanishes():
    psi = np.array([1, 0, 1, 0], dtype=complex)
    dpsi = np.zeros((4, 4), dtype=complex)
    dpsi[0] = -1j * psi
    assert lg.dirac_density(psi, dpsi, ZERO_A) == pytest.approx(0, abs=1e-15)


def test_tensor_density_constant_examples():
    T = alg.bispinor_to_tensors([1, 0, 1, 0])
    assert lg.tensor_density_frame(T, ZERO_A, ZERO_A, ZERO_A) == pytest.approx(-2)
    T = alg.FrameTensors(2.0, np.pi / 2, *np.eye(4))
    assert lg.tensor_density_frame(T, ZERO_A, ZERO_A, ZERO_A) == pytest.approx(0, abs=1e-15)


@pytest.mark.parametrize("tau", [1, -1])
def test_scalar_potential_term(tau):
    psi = np.array([1, 0.2j, 0.8, -0.1])
    T = alg.bispinor_to_tensors(psi, tau)
    j, _ = alg.currents(psi)
    phi, e = 0.7, -1.0
    A = np.array([phi, 0, 0, 0])
    expect = -e * phi * tau * j[0]
    shift = lg.dirac_density(psi, ZERO_D, A, tau) - lg.dirac_density(psi, ZERO_D, ZERO_A, tau)
    assert shift == pytest.approx(expect)
    shift = lg.tensor_density_frame(T, ZERO_A, ZERO_A, A) - lg.tensor_density_frame(
        T, ZERO_A, ZERO_A, ZERO_A
    )
    assert shift == pytest.approx(expect)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1, -1]))
def test_constant_fields_agree(seed, tau):
    rng = np.random.default_rng(seed)
    psi = np.array([1, 0, 1, 0]) + 0.3 * (rng.normal(size=4) + 1j * rng.normal(size=4))
    A = rng.normal(size=4)
    T = alg.bispinor_to_tensors(psi, tau)
    lhs = lg.dirac_density(psi, ZERO_D, A, tau)
    rhs = lg.tensor_density_frame(T, ZERO_A, ZERO_A, A)
    assert lhs == pytest.approx(rhs, abs=1e-13)


# rotation tensor


def test_constant_frame_has_no_rotation():
    rt = lg.rotation_tensor(np.eye(4), np.zeros((4, 4, 4)))
    assert np.array_equal(rt.R, np.zeros((4, 4, 4)))
    assert np.array_equal(lg.div_r_star(np.eye(4), np.zeros((4, 4, 4))), ZERO_A)


def test_rotating_frame():
    omega, x0 = 0.37, 0.8
    frame, grad = rotating_frame(omega)
    rt = lg.rotation_tensor(frame(x0), grad(x0))
    R0 = rt.R[0]
    assert R0[1, 2] == pytest.approx(omega)
    assert R0[2, 1] == pytest.approx(-omega)
    R0[1, 2] = R0[2, 1] = 0
    assert np.abs(R0).max() < 1e-15
    assert np.abs(rt.R[1:]).max() == 0
    div = lg.div_r_star(frame(x0), grad(x0))
    assert div[3] == pytest.approx(omega)
    assert np.abs(div[:3]).max() < 1e-15
    assert np.allclose(rt.div_star, div)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_rotation_tensor_reconstructs_derivatives(seed):
    rng = np.random.default_rng(seed)
    field = lg.random_field(rng)
    x = lg.sample_points(rng, 1)[0]
    h = 1e-5
    F = np.array([alg.bispinor_to_tensors(field(x + s * h * e)).frame for e in np.eye(4) for s in (1, -1)])
    dF = (F[0::2] - F[1::2]) / (2 * h)
    F0 = alg.bispinor_to_tensors(field(x)).frame
    rt = lg.rotation_tensor(F0, dF)
    assert np.abs(rt.R + np.swapaxes(rt.R, -1, -2)).max() < 1e-8
    recon = np.einsum("nml,kl->nkm", rt.R, F0)
    assert np.abs(recon - alg.lower(dF)).max() < 1e-8


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_swap_reverses_spin_projection(seed):
    # relabelling f1 <-> f2 only permutes the sum, but f3 flips, so <f3, div R*> is odd
    rng = np.random.default_rng(seed)
    field = lg.random_field(rng)
    x = lg.sample_points(rng, 1)[0]
    h = 1e-5
    F = np.array([alg.bispinor_to_tensors(field(x + s * h * e)).frame for e in np.eye(4) for s in (1, -1)])
    dF = (F[0::2] - F[1::2]) / (2 * h)
    F0 = alg.bispinor_to_tensors(field(x)).frame
    Fs = F0[[0, 2, 1, 3]] * np.array([1, 1, 1, -1])[:, None]
    dFs = dF[:, [0, 2, 1, 3]] * np.array([1, 1, 1, -1])[:, None]
    assert np.allclose(alg.spin_vector(*Fs[:3]), Fs[3])
    d, ds = lg.div_r_star(F0, dF), lg.div_r_star(Fs, dFs)
    assert np.allclose(ds, d, atol=1e-8)
    assert alg.minkowski(Fs[3], ds) == pytest.approx(-alg.minkowski(F0[3], d), abs=1e-8)


def test_rotation_tensor_rejects_bad_frame():
    with pytest.raises(ValueError):
        lg.rotation_tensor(2 * np.eye(4), np.zeros((4, 4, 4)))


# identity harness


def test_constant_field_residual():
    rng = np.random.default_rng(0)
    field = lg.constant_field(np.array([1, 0.3j, 0.9, 0.2]))
    pot = lg.constant_potential([0.3, -0.2, 0.1, 0.4])
    res = lg.identity_residual(field, pot, lg.sample_points(rng, 50), 0.05)
    assert res.max < 1e-12
    assert res.n_skipped == 0


@pytest.mark.parametrize("seed", range(4))
def test_second_order_convergence(seed):
    rng = np.random.default_rng(seed)
    field, pot = lg.random_field(rng), lg.random_potential(rng)
    ratio, coarse, fine = lg.convergence_ratio(field, pot, lg.sample_points(rng, 100), 0.05)
    assert 3 <= ratio <= 5
    assert coarse.max > fine.max > 0


def test_plane_wave_residual_is_second_order():
    rng = np.random.default_rng(2)
    L = alg.boost(0.6, [0.6, 0, 0.8])
    field = lg.free_plane_wave(1.0, L)
    pot = lg.constant_potential(ZERO_A)
    pts = lg.sample_points(rng, 40)
    ratio, coarse, _ = lg.convergence_ratio(field, pot, pts, 0.05)
    assert 3 <= ratio <= 5
    lhs, rhs, _ = lg.densities(field, pot, pts, 0.0125)
    assert np.abs(lhs).max() < 1e-3 and np.abs(rhs).max() < 1e-3


def test_degenerate_points_are_skipped():
    # psi = (1, 0, x0, 0) has eta* xi = 0 on the plane x0 = 0

    def f(x):
        out = np.zeros(x.shape[:-1] + (4,), dtype=complex)
        out[..., 0] = 1
        out[..., 2] = x[..., 0]
        return out

    pts = np.array([[0.0, 0, 0, 0], [0.5, 0, 0, 0]])
    res = lg.identity_residual(f, lg.constant_potential(ZERO_A), pts, 0.01)
    assert res.n_skipped == 1 and res.n_used == 1


def test_zero_step_rejected():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        lg.identity_residual(lg.random_field(rng), lg.random_potential(rng), np.zeros((1, 4)), 0.0)


@pytest.mark.parametrize("tau", [1, -1])
def test_passive_boost_is_scalar(tau):
    rng = np.random.default_rng(7)
    field, pot = lg.random_field(rng), lg.random_potential(rng)
    L = alg.rotation(0.4, [0, 0, 1]) @ alg.boost(0.5, [0.6, 0.8, 0])
    fieldp, potp = lg.TransformedField(field, L), lg.transformed_potential(pot, L)
    pts = lg.sample_points(rng, 30)
    h = 0.01
    lhs, rhs, _ = lg.densities(field, pot, pts, h, tau=tau)
    lhs2, rhs2, _ = lg.densities(fieldp, potp, pts @ L.matrix.T, h, tau=tau)
    assert np.abs(lhs2 - lhs).max() < 1e-3
    assert np.abs(rhs2 - rhs).max() < 1e-3


def test_frame_driven_density_matches():
    rng = np.random.default_rng(3)
    field, pot = lg.random_field(rng), lg.random_potential(rng)
    frames = lg.frame_field_of(field)
    x = lg.sample_points(rng, 1)[0]
    for h in (0.02, 0.01):
        lhs, _, _ = lg.densities(field, pot, x[None], h)
        assert lg.dirac_density_from_frames(frames, pot, x, h) == pytest.approx(lhs[0], abs=1e-10)


def test_align_sign():
    ref = np.array([1, 1j, 0, 0])
    assert np.array_equal(lg.align_sign(ref, -ref), ref)
    assert np.array_equal(lg.align_sign(ref, ref), ref)


# planar reduction


@pytest.mark.parametrize("sign", [1, -1])
def test_m3_density_matches_four_dimensional_density(sign):
    rng = np.random.default_rng(11)
    field = lg.planar_field(rng, sign)
    base = lg.random_potential(rng, dim=3)
    pot = lg.EMPotential(lambda x: base(x) * np.array([1, 1, 1, 0]), base.e)
    pts = lg.sample_points(rng, 30, dim=3)
    for h in (0.02, 0.01):
        _, rhs, ok = lg.densities(field, pot, pts, h)
        rho, D, dD = lg.dyad_stencil(field, pts[:, :3], h)
        l3 = lg.m3_density(rho, D, dD, pot(pts)[:, :3], pot.e, 1.0, sign)
        assert ok.all()
        assert np.abs(rhs + sign * l3).max() < 1e-12


def test_m3_constant_dyad():
    D = np.eye(3)
    for sign in (1, -1):
        val = lg.m3_density(2.0, D, np.zeros((3, 3, 3)), np.zeros(3), sign=sign, m=1.5)
        assert val == pytest.approx(sign * 3.0)
    with pytest.raises(ValueError):
        lg.m3_density(1.0, 2 * D, np.zeros((3, 3, 3)), np.zeros(3))


def test_swap_reverses_dyad_orientation():
    # div r is a sum over the dyad labels; the orientation shows up in f0 = [f1, f2]
    rng = np.random.default_rng(5)
    field = lg.planar_field(rng, 1)
    rho, D, dD = lg.dyad_stencil(field, lg.sample_points(rng, 5, dim=3)[:, :3], 0.01)
    Ds = np.stack([-D[:, 0], D[:, 2], D[:, 1]], axis=1)
    dDs = np.stack([-dD[:, :, 0], dD[:, :, 2], dD[:, :, 1]], axis=2)
    assert np.allclose(alg.dyad_completion(Ds[:, 1], Ds[:, 2]), Ds[:, 0])
    assert np.allclose(lg.div_r(Ds, dDs), lg.div_r(D, dD))
    A = np.array([0.4, 0.1, -0.3])
    flip = lg.m3_density(rho, Ds, dDs, A) - lg.m3_density(rho, D, dD, A)
    assert np.allclose(flip, -2 * (-1.0) * alg.minkowski3(D[:, 0], A) * rho)


@pytest.mark.parametrize("sign", [1, -1])
def test_r_equals_minus_r_star(sign):
    rng = np.random.default_rng(21 + sign)
    field = lg.planar_field(rng, sign)
    pt = lg.sample_points(rng, 1, dim=3)[:, :3]
    errs = []
    for h in (0.02, 0.01):
        _, D, dD = lg.dyad_stencil(field, pt, h)
        errs.append(np.abs(lg.rotation_vector(D[0], dD[0]) + lg.rotation_dual3(D[0], dD[0])).max())
    assert errs[1] < 1e-4
    assert 3 <= errs[0] / errs[1] <= 5
