import math

import numpy as np
import pytest

from qedkin.clifford import METRIC
from qedkin.fields import (
    HomogeneousE,
    PlaneWave,
    PotentialField,
    Tabulated1D,
    UniformField,
    de_broglie_length,
    field_tensor,
    field_tensor_from_potential,
    gauge_transform,
    tensor_from_EB,
    transverse_tensor,
    validity_ratio,
)
from qedkin.geometry import Hyperplane, pure_boost


def sample_points(rng, k=12, scale=2.0):
    return rng.uniform(-scale, scale, size=(4, k))


def test_uniform_b_tensor_and_potential():
    b = 1.7
    cfg = UniformField(B=(0, 0, b))
    x = np.array([0.3, 0.5, -1.2, 0.8])
    # A = (0, -b y/2, b x/2, 0)
    np.testing.assert_allclose(cfg.potential(x), [0, -b * x[2] / 2, b * x[1] / 2, 0], atol=1e-15)
    s = field_tensor(cfg, x)
    assert s.F[1, 2] == pytest.approx(-b)
    assert s.F_lower[1, 2] == pytest.approx(-b)
    np.testing.assert_allclose(s.B, [0, 0, b], atol=1e-15)
    np.testing.assert_allclose(field_tensor_from_potential(cfg, x), s.F, atol=1e-10)
    assert cfg.kind == "uniform-B"


def test_uniform_e_convention():
    E = np.array([0.1, -0.2, 0.3])
    cfg = UniformField(E=E)
    s = field_tensor(cfg, np.zeros(4))
    np.testing.assert_allclose(s.E, E, atol=1e-15)  # E^i = F_{0i}
    np.testing.assert_allclose(s.F[1:, 0], E, atol=1e-15)
    np.testing.assert_allclose(field_tensor_from_potential(cfg, np.ones(4)), s.F, atol=1e-10)


def test_zero_potential_gives_zero_tensor():
    cfg = PotentialField(lambda x: np.zeros_like(x))
    np.testing.assert_array_equal(cfg.tensor(np.ones((4, 3))), 0)


def test_plane_wave_closed_form_and_fd():
    rng = np.random.default_rng(0)
    a = np.array([0.0, 0.3, -0.2, 0.0])
    k = np.array([1.1, 0.0, 0.0, 1.1])
    cfg = PlaneWave(a, k)
    x = sample_points(rng)
    kx = np.einsum("m,m...->...", METRIC @ k, x)
    expected = -np.einsum("mn,k->mnk", np.outer(k, a) - np.outer(a, k), np.sin(kx))
    np.testing.assert_allclose(cfg.tensor(x), expected, atol=1e-14)
    np.testing.assert_allclose(field_tensor_from_potential(cfg, x), expected, atol=1e-10)
    fd = PotentialField(cfg.potential, h=1e-2).tensor_gradient(x, 1)
    np.testing.assert_allclose(cfg.tensor_gradient(x, 1), fd, atol=1e-6)
    assert cfg.l_em == pytest.approx(2 * math.pi / 1.1)


def test_plane_wave_rejects_non_lorenz():
    with pytest.raises(ValueError, match="k.a"):
        PlaneWave([1.0, 0, 0, 0], [1.0, 0, 0, 1.0])


@pytest.mark.parametrize("profile", ["constant", "sin2", "sauter"])
def test_homogeneous_e_potential_consistency(profile):
    cfg = HomogeneousE(0.4, profile, duration=3.0, direction=(0, 0, 2))
    t = np.linspace(0.1, 2.9, 9)
    x = np.zeros((4, t.size))
    x[0] = t
    np.testing.assert_allclose(field_tensor_from_potential(cfg, x, 1e-3), cfg.tensor(x), atol=1e-10)
    np.testing.assert_allclose(cfg.tensor(x)[3, 0], cfg.efield(t), atol=0)
    g = cfg.tensor_gradient(x, 1)
    assert np.all(g[1:] == 0)
    assert cfg.is_homogeneous()


def test_homogeneous_e_sin2_switches_off():
    cfg = HomogeneousE(1.0, "sin2", duration=2.0)
    assert cfg.efield(np.array([-0.5, 2.5])).tolist() == [0.0, 0.0]
    assert cfg.efield_integral(5.0) == pytest.approx(1.0)  # integral of sin^2 over one period T = T/2


def test_homogeneous_e_validation():
    with pytest.raises(ValueError):
        HomogeneousE(1.0, "gaussian")
    with pytest.raises(ValueError):
        HomogeneousE(1.0, "sin2", duration=0)


def test_tabulated_periodic_and_domain():
    L = 2 * np.pi
    z = np.arange(64) * L / 64
    cfg = Tabulated1D(z, np.sin(z), periodic=True, length=L)
    zq = np.array([0.123, 3.3, L + 0.5, -0.7])
    np.testing.assert_allclose(cfg.ez(zq), np.sin(zq), atol=1e-6)
    np.testing.assert_allclose(cfg.ez_derivative(zq, 1), np.cos(zq), atol=1e-5)
    np.testing.assert_allclose(cfg.ez_derivative(zq, 2), -np.sin(zq), atol=1e-4)
    open_cfg = Tabulated1D(z, np.sin(z), periodic=False)
    with pytest.raises(ValueError, match="outside"):
        open_cfg.ez(np.array([L + 1.0]))
    x = np.zeros((4, 2))
    x[3] = [0.5, 1.0]
    F = cfg.tensor(x)
    np.testing.assert_allclose(F[3, 0], np.sin([0.5, 1.0]), atol=1e-6)
    updated = cfg.with_values(2 * np.sin(z))
    assert updated.ez(0.5) == pytest.approx(2 * cfg.ez(0.5))


def test_transverse_tensor():
    h = Hyperplane.instant()
    sB = field_tensor(UniformField(B=(0.1, 0.2, 0.3)), np.zeros(4), h)
    np.testing.assert_allclose(sB.F_perp, sB.F, atol=0)  # pure B is entirely spatial
    sE = field_tensor(UniformField(E=(0.1, 0.2, 0.3)), np.zeros(4), h)
    np.testing.assert_allclose(sE.F_perp, 0, atol=1e-16)
    hb = Hyperplane.from_rapidity(0.8, (1, 2, 3))
    F = tensor_from_EB(np.array([0.3, -0.1, 0.2]), np.array([0.5, 0.1, -0.4]))
    Fp = transverse_tensor(F, hb)
    np.testing.assert_allclose(Fp @ METRIC @ hb.n, 0, atol=1e-13)
    np.testing.assert_allclose(Fp, -Fp.T, atol=1e-15)


def test_gauge_transform_examples():
    rng = np.random.default_rng(1)
    base = PlaneWave([0, 0.2, 0.1, 0], [0.7, 0, 0, 0.7])
    x = sample_points(rng)
    same = gauge_transform(base, lambda y: 3.0 + 0 * y[0])
    np.testing.assert_allclose(same.potential(x), base.potential(x), atol=1e-12)
    k = np.array([0.3, -0.1, 0.4, 0.2])
    lin = gauge_transform(base, lambda y: np.einsum("m,m...->...", k, y))
    # d^mu (k_nu x^nu) = g^{mu nu} k_nu
    np.testing.assert_allclose(lin.potential(x) - base.potential(x), np.broadcast_to((METRIC @ k)[:, None], x.shape), atol=1e-10)
    np.testing.assert_allclose(field_tensor_from_potential(lin, x), base.tensor(x), atol=1e-9)


def test_gauge_invariance_random_functions():
    rng = np.random.default_rng(2)
    base = UniformField(E=(0.1, 0, 0.2), B=(0, 0.3, 0))
    x = sample_points(rng, 8, 1.0)
    worst = 0.0
    for _ in range(10):
        c = rng.normal(size=4)
        q = rng.normal(size=4)
        chi = lambda y, c=c, q=q: np.sin(np.einsum("m,m...->...", c, y)) + 0.2 * np.einsum("m,m...->...", q, y) ** 2
        F2 = field_tensor_from_potential(gauge_transform(base, chi), x, 1e-3)
        worst = max(worst, float(np.abs(F2 - base.tensor(x)).max()))
    assert worst < 1e-8


def test_uniform_field_boost_covariance():
    F = tensor_from_EB(np.array([0.0, 0.0, 0.5]), np.array([0.3, 0.0, 0.0]))
    cfg = UniformField(E=(0, 0, 0.5), B=(0.3, 0, 0))
    B = pure_boost([0.4, 0.0, 0.0])
    Fb = B.tensor2(cfg.tensor(np.zeros(4)))
    # standard transformation for a boost along x: E_par, B_par unchanged, E_perp' = g(E + v x B)_perp
    g = 1 / np.sqrt(1 - 0.16)
    v = np.array([0.4, 0, 0])
    E = np.array([0, 0, 0.5])
    Bv = np.array([0.3, 0, 0])
    E2 = g * (E + np.cross(v, Bv))
    E2[0] = E[0]
    B2 = g * (Bv - np.cross(v, E))
    B2[0] = Bv[0]
    np.testing.assert_allclose(Fb, tensor_from_EB(E2, B2), atol=1e-14)
    assert F.shape == (4, 4)


def test_validity_ratio():
    assert validity_ratio(HomogeneousE(1.0), 0.3) == 0.0
    L = 5.0
    pw = PlaneWave([0, 1.0, 0, 0], [2 * np.pi / L, 0, 0, 2 * np.pi / L])
    assert validity_ratio(pw, L / 100) == pytest.approx(0.01)
    z = np.linspace(0, 1, 8)
    with pytest.raises(ValueError, match="l_em"):
        validity_ratio(Tabulated1D(z, z), 0.1)
    assert validity_ratio(Tabulated1D(z, z, l_em=2.0), 0.1) == pytest.approx(0.05)


def test_de_broglie_length():
    assert de_broglie_length(np.array([2.0, 2.0]), np.array([1.0, 3.0]), hbar=0.5) == pytest.approx(2 * np.pi * 0.5 / 2.0)
    assert math.isinf(de_broglie_length(np.zeros(3), np.ones(3)))
