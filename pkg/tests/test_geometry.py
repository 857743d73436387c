import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qedkin.clifford import ALPHA, GAMMA, IDENTITY, METRIC, SIGMA_BAR
from qedkin.geometry import (
    Hyperplane,
    boost_to_instant,
    gamma_split,
    longitudinal,
    minkowski_dot,
    pure_boost,
    s_matrices,
    transverse,
)

rapidities = st.floats(0.0, 2.0)
directions = st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda d: np.linalg.norm(d) > 0.1)


def random_plane(rng, max_rapidity=1.5):
    d = rng.normal(size=3)
    return Hyperplane.from_rapidity(rng.uniform(0, max_rapidity), d, tau=rng.normal())


def test_instant_frame_examples():
    h = Hyperplane.instant()
    V = np.array([5.0, 1.0, 2.0, 3.0])
    assert longitudinal(V, h) == 5.0
    np.testing.assert_array_equal(transverse(V, h), [0, 1, 2, 3])
    assert longitudinal(h.n, h) == pytest.approx(1.0)
    np.testing.assert_allclose(transverse(h.n, h), 0, atol=1e-15)


def test_boosted_longitudinal_matches_contraction():
    rng = np.random.default_rng(1)
    h = Hyperplane.from_rapidity(0.7, (0.2, -0.4, 1.0))
    V = rng.normal(size=4)
    assert longitudinal(V, h) == pytest.approx(np.einsum("mn,m,n->", METRIC, h.n, V), abs=1e-14)
    D = np.eye(4) - np.outer(h.n, METRIC @ h.n)
    np.testing.assert_allclose(transverse(V, h), D @ V, atol=1e-14)


def test_hyperplane_validation():
    with pytest.raises(ValueError, match="n.n = 1"):
        Hyperplane(np.array([1.0, 0.5, 0.0, 0.0]))
    with pytest.raises(ValueError, match="future"):
        Hyperplane(np.array([-1.0, 0.0, 0.0, 0.0]))
    # within the construction tolerance
    Hyperplane(np.array([1.0 + 4e-10, 0.0, 0.0, 0.0]))


@settings(max_examples=100, deadline=None)
@given(rapidities, directions)
def test_projector_properties(eta, d):
    h = Hyperplane.from_rapidity(eta, d)
    D = h.projector
    np.testing.assert_allclose(D @ D, D, atol=1e-10 * np.cosh(eta) ** 4)
    np.testing.assert_allclose(D @ h.n, 0, atol=1e-12 * np.cosh(eta) ** 2)
    assert minkowski_dot(h.n, h.n) == pytest.approx(1.0, abs=1e-12 * np.cosh(eta) ** 2)


@settings(max_examples=50, deadline=None)
@given(rapidities, directions, st.tuples(*[st.floats(-5, 5)] * 4))
def test_decomposition_completeness(eta, d, V):
    h = Hyperplane.from_rapidity(eta, d)
    V = np.array(V)
    perp = transverse(V, h)
    np.testing.assert_allclose(h.n * longitudinal(V, h) + perp, V, atol=1e-11 * np.cosh(eta) ** 2)
    assert abs(minkowski_dot(perp, h.n)) < 1e-10 * np.cosh(eta) ** 3


def test_gamma_split():
    g_par, g_perp = gamma_split(Hyperplane.instant())
    np.testing.assert_array_equal(g_par, GAMMA[0])
    np.testing.assert_array_equal(g_perp[0], 0)
    np.testing.assert_array_equal(g_perp[1:], GAMMA[1:])
    rng = np.random.default_rng(3)
    for _ in range(5):
        h = random_plane(rng)
        g_par, g_perp = gamma_split(h)
        np.testing.assert_allclose(g_par @ g_par, IDENTITY, atol=1e-12)
        np.testing.assert_allclose(np.einsum("m,mab->ab", h.n_lower, g_perp), 0, atol=1e-12)
        np.testing.assert_allclose(np.einsum("m,ab->mab", h.n, g_par) + g_perp, GAMMA, atol=1e-12)


def test_s_matrices():
    S = s_matrices(Hyperplane.instant())
    np.testing.assert_allclose(S[0], 0, atol=0)
    np.testing.assert_allclose(S[1:], -1j * ALPHA, atol=1e-15)
    h = Hyperplane.from_rapidity(0.9, (1.0, 1.0, 0.0))
    S = s_matrices(h)
    np.testing.assert_allclose(np.einsum("m,mab->ab", h.n_lower, S), 0, atol=1e-12)
    np.testing.assert_allclose(S, np.einsum("mnab,n->mab", SIGMA_BAR, METRIC @ h.n), atol=1e-14)


def test_boost_to_instant_examples():
    np.testing.assert_allclose(boost_to_instant(Hyperplane.instant()).matrix, np.eye(4), atol=0)
    eta = 0.5
    h = Hyperplane.from_rapidity(eta, (1.0, 0.0, 0.0))
    L = boost_to_instant(h)
    expected = np.eye(4)
    expected[0, 0] = expected[1, 1] = np.cosh(eta)
    expected[0, 1] = expected[1, 0] = -np.sinh(eta)
    np.testing.assert_allclose(L.matrix, expected, atol=1e-14)
    np.testing.assert_allclose(L.vector(h.n), [1, 0, 0, 0], atol=1e-14)
    np.testing.assert_allclose(L.matrix.T @ METRIC @ L.matrix, METRIC, atol=1e-14)
    np.testing.assert_allclose(L.invert().compose(L).matrix, np.eye(4), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(rapidities, directions)
def test_boost_is_proper_orthochronous(eta, d):
    h = Hyperplane.from_rapidity(eta, d)
    L = boost_to_instant(h)
    tol = 1e-12 * np.cosh(eta) ** 2
    np.testing.assert_allclose(L.vector(h.n), [1, 0, 0, 0], atol=tol)
    np.testing.assert_allclose(L.matrix.T @ METRIC @ L.matrix, METRIC, atol=tol)
    assert np.linalg.det(L.matrix) == pytest.approx(1.0, abs=1e-9)
    assert L.matrix[0, 0] >= 1.0
    np.testing.assert_allclose(L.matrix @ L.inverse, np.eye(4), atol=tol)


def test_pure_boost_rejects_superluminal():
    with pytest.raises(ValueError):
        pure_boost([0.6, 0.8, 0.0])


def test_tau_invariant_under_boost():
    rng = np.random.default_rng(8)
    for _ in range(10):
        h = random_plane(rng)
        x = rng.normal(size=4)
        B = pure_boost(rng.uniform(-0.5, 0.5, 3))
        h2 = B.hyperplane(h)
        assert minkowski_dot(h2.n, B.vector(x)) == pytest.approx(minkowski_dot(h.n, x), abs=1e-12)


def test_covector_and_tensor_transform_consistency():
    rng = np.random.default_rng(4)
    B = pure_boost([0.3, -0.2, 0.5])
    a, b = rng.normal(size=4), rng.normal(size=4)
    # a_mu b^mu invariant
    assert B.covector(METRIC @ a) @ B.vector(b) == pytest.approx((METRIC @ a) @ b, abs=1e-12)
    T = np.outer(a, b)
    np.testing.assert_allclose(B.tensor2(T), np.outer(B.vector(a), B.vector(b)), atol=1e-12)


def test_transverse_basis_orthonormal():
    rng = np.random.default_rng(6)
    for _ in range(5):
        h = random_plane(rng)
        E = h.transverse_basis()
        gram = np.einsum("im,mn,jn->ij", E, METRIC, E)
        np.testing.assert_allclose(gram, -np.eye(3), atol=1e-12)
        np.testing.assert_allclose(E @ METRIC @ h.n, 0, atol=1e-12)


def test_gradient_split_on_polynomial():
    """d_mu f = n_mu d f/d tau + nabla_mu f with tau = n.x along n and nabla the transverse part."""
    h = Hyperplane.from_rapidity(0.6, (0.0, 1.0, 1.0))

    def f(x):
        return x[0] ** 2 * x[1] - 3 * x[2] * x[3] + x[3] ** 3

    x0 = np.array([0.4, -0.3, 0.7, 1.1])
    step = 1e-4

    def d(direction):
        return (f(x0 + step * direction) - f(x0 - step * direction)) / (2 * step)

    grad = np.array([d(np.eye(4)[m]) for m in range(4)])  # d_mu f (lower)
    dtau = d(h.n)  # derivative along n at fixed transverse position
    nabla = np.einsum("nm,n->m", h.projector, grad)  # Delta^nu_mu d_nu f
    np.testing.assert_allclose(METRIC @ h.n * dtau + nabla, grad, atol=1e-7)
