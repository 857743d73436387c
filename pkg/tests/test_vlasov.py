import numpy as np
import pytest

from qedkin.fields import Tabulated1D, UniformField
from qedkin.geometry import Hyperplane
from qedkin.qkin import free_state, gaussian, polarization_current
from qedkin.vlasov import (
    DistributionState,
    DomainError,
    Ensemble,
    SLInfo,
    ampere_update,
    cold_pair_plasma,
    continuity_residual,
    covariant_residual,
    diagnostics_row,
    ensemble_current,
    evolve_semilagrangian,
    from_wigner,
    gauss_residual,
    invariant_current,
    oscillation_period,
    plasma_frequency,
    push_characteristics,
    quasi_classical_current,
    read_distribution_snapshot,
    sample_ensemble,
    vlasov_rhs,
    write_distribution_snapshot,
)
from qedkin.wigner import MomentumGrid, SpatialGrid, WignerState, write_snapshot


def line_state(pmax, n, f, fbar=None, space=SpatialGrid()):
    mg = MomentumGrid.line(pmax, n)
    q = mg.mesh()[2][None]
    z = space.z.reshape(-1, 1, 1, 1)
    w = np.broadcast_to(f(z, q), (space.nz,) + mg.shape).copy()
    wb = np.zeros_like(w) if fbar is None else np.broadcast_to(fbar(z, q), w.shape).copy()
    return DistributionState(w, wb, space, mg)


# ---------------------------------------------------------------- from_wigner


def test_from_wigner_free_state():
    mg = MomentumGrid.line(8.0, 161)
    ws = free_state(SpatialGrid(), mg, gaussian((0, 0, 0.7), 0.6), gaussian((0, 0, -0.3), 0.4, 0.5))
    dist, closure = from_wigner(ws)
    qz = mg.pz
    np.testing.assert_allclose(dist.w[0, 0, 0], 2 * np.exp(-((qz - 0.7) ** 2) / 0.72), atol=1e-14)
    np.testing.assert_allclose(dist.wbar[0, 0, 0], np.exp(-((qz + 0.3) ** 2) / 0.32), atol=1e-14)
    assert closure < 1e-15
    np.testing.assert_allclose(quasi_classical_current(dist), polarization_current(ws).real, atol=1e-14)


def test_from_wigner_charge_at_small_hbar():
    mg = MomentumGrid.line(6.0, 121)
    ws = free_state(SpatialGrid(), mg, gaussian((0, 0, 0.4), 0.5), hbar=0.05)
    dist, _ = from_wigner(ws)
    q_w = polarization_current(ws)[0, 0].real
    q_d = quasi_classical_current(dist)[0, 0]
    assert abs(q_d - q_w) / abs(q_w) < 1e-2


def test_from_wigner_needs_symmetric_grid():
    ws = WignerState.zeros(SpatialGrid(), MomentumGrid(np.zeros(1), np.zeros(1), np.linspace(0, 2, 5)))
    with pytest.raises(ValueError, match="symmetric"):
        from_wigner(ws)


def test_distribution_snapshot_roundtrip(tmp_path):
    st = line_state(3.0, 31, lambda z, q: np.exp(-(q**2)), lambda z, q: 0.5 * np.exp(-(q**2)))
    st.mass, st.t = 2.0, 0.75
    path = tmp_path / "d.qkws"
    write_distribution_snapshot(path, st)
    back = read_distribution_snapshot(path)
    np.testing.assert_array_equal(back.w, st.w)
    np.testing.assert_array_equal(back.wbar, st.wbar)
    assert (back.mass, back.t) == (2.0, 0.75)
    other = tmp_path / "w.qkws"
    write_snapshot(other, WignerState.zeros(SpatialGrid(), MomentumGrid.line(1.0, 3)))
    with pytest.raises(ValueError, match="not a distribution"):
        read_distribution_snapshot(other)


# ---------------------------------------------------------------- Vlasov rhs


def test_uniform_distribution_is_stationary():
    st = line_state(2.0, 21, lambda z, q: 0.3 + 0 * q, lambda z, q: 0.1 + 0 * q, SpatialGrid(8, 3.0))
    dw, dwb = vlasov_rhs(st, UniformField(E=(0, 0, 0.4)))
    assert np.abs(dw).max() < 1e-13 and np.abs(dwb).max() < 1e-13


def test_magnetic_force_sign():
    mg = MomentumGrid(np.linspace(-3, 3, 61), np.linspace(-3, 3, 61), np.zeros(1))
    q = mg.mesh()
    g = np.exp(-((q[0] - 0.5) ** 2 + (q[1] + 0.2) ** 2) / 0.5)
    st = DistributionState(g[None], g[None].copy(), SpatialGrid(), mg)
    B = 0.7
    dw, dwb = vlasov_rhs(st, UniformField(B=(0, 0, B)), e=-1.0)
    eps = np.sqrt(1 + q[0] ** 2 + q[1] ** 2)
    vx, vy = q[0] / eps, q[1] / eps
    gx, gy = -4 * (q[0] - 0.5) * g, -4 * (q[1] + 0.2) * g
    # d_t w = -q (v x B) . grad_p w with (v x B) = (vy B, -vx B, 0)
    lorentz = vy * B * gx - vx * B * gy
    np.testing.assert_allclose(dw[0], lorentz, atol=5e-4)  # particles, q = -1
    np.testing.assert_allclose(dwb[0], -lorentz, atol=5e-4)


def test_electric_force_and_streaming():
    space = SpatialGrid(16, 2 * np.pi)
    st = line_state(4.0, 81, lambda z, q: np.exp(-(q**2)) * (1 + 0.2 * np.cos(z)), space=space)
    E = 0.3
    dw, _ = vlasov_rhs(st, UniformField(E=(0, 0, E)), e=-1.0)
    z = space.z.reshape(-1, 1, 1, 1)
    q = st.momentum.mesh()[2][None]
    v = q / np.sqrt(1 + q**2)
    expected = -v * (-0.2 * np.sin(z)) * np.exp(-(q**2)) - (-1.0) * E * (-2 * q) * np.exp(-(q**2)) * (1 + 0.2 * np.cos(z))
    np.testing.assert_allclose(dw, expected, atol=1e-4)  # fourth-order differences at dp = 0.1


def test_swapping_species_and_charge():
    st = line_state(4.0, 81, lambda z, q: np.exp(-((q - 0.5) ** 2)), lambda z, q: 0.3 * np.exp(-((q + 1) ** 2)))
    swapped = st.with_values(st.wbar, st.w)
    cfg = UniformField(E=(0, 0, 0.3))
    a, b = vlasov_rhs(st, cfg, e=-1.0)
    c, d = vlasov_rhs(swapped, cfg, e=+1.0)
    np.testing.assert_array_equal(a, d)
    np.testing.assert_array_equal(b, c)
    np.testing.assert_allclose(quasi_classical_current(st, -1.0), quasi_classical_current(swapped, 1.0), atol=1e-15)


# ---------------------------------------------------------------- semi-Lagrangian


def test_sl_without_field_keeps_homogeneous_state():
    st = line_state(3.0, 61, lambda z, q: np.exp(-(q**2)))
    out = evolve_semilagrangian(st, None, 0.1)
    np.testing.assert_allclose(out.w, st.w, atol=1e-15)
    assert out.t == pytest.approx(0.1)


def test_sl_free_streaming():
    space = SpatialGrid(32, 2 * np.pi)
    shape = lambda z, q: np.exp(-(q**2)) * (1 + 0.3 * np.cos(z))
    st = line_state(3.0, 61, shape, space=space)
    for _ in range(20):
        st = evolve_semilagrangian(st, None, 0.1)
    z = space.z.reshape(-1, 1, 1, 1)
    q = st.momentum.mesh()[2][None]
    v = q / np.sqrt(1 + q**2)
    assert np.abs(st.w - shape(z - 2.0 * v, q)).max() < 1e-5


def test_sl_momentum_shift_converges_at_third_order_or_better():
    errs = []
    for n in (61, 121, 241):
        st = line_state(6.0, n, lambda z, q: np.exp(-((q - 0.5) ** 2) / 0.5))
        for _ in range(10):
            st = evolve_semilagrangian(st, UniformField(E=(0, 0, 0.3)), 0.137)
        q = st.momentum.mesh()[2][None]
        # dp/dt = e E = -0.3
        errs.append(np.abs(st.w - np.exp(-((q - 0.5 + 0.3 * 1.37) ** 2) / 0.5)).max())
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 3.0)


def test_sl_domain_error():
    st = line_state(2.0, 41, lambda z, q: np.exp(-(q**2) / 0.1))
    cfg = UniformField(E=(0, 0, -0.5))
    for _ in range(5):
        st = evolve_semilagrangian(st, cfg, 0.1)
    with pytest.raises(DomainError, match="enlarge"):
        for _ in range(40):
            st = evolve_semilagrangian(st, cfg, 0.1)


def test_sl_rejects_magnetic_fields():
    st = line_state(2.0, 41, lambda z, q: np.exp(-(q**2)))
    with pytest.raises(ValueError, match="electric"):
        evolve_semilagrangian(st, UniformField(B=(0, 0, 1.0)), 0.1)


def test_sl_continuity_with_tabulated_field():
    L = 2 * np.pi
    zt = np.arange(64) * L / 64
    fld = Tabulated1D(zt, 0.2 * np.sin(zt), True, L)
    st = line_state(
        3.0, 61,
        lambda z, q: np.exp(-((q - 0.5) ** 2) / 0.18) * (1 + 0.4 * np.cos(z)),
        lambda z, q: 0.5 * np.exp(-((q + 0.4) ** 2) / 0.18) * (1 + 0.4 * np.sin(z)),
        SpatialGrid(16, L),
    )
    hist = [st]
    info = SLInfo()
    for _ in range(10):
        hist.append(evolve_semilagrangian(hist[-1], fld, 0.1, info=info))
    assert continuity_residual(hist).max() < 5e-3
    assert info.clipped_mass < 1e-6


# ---------------------------------------------------------------- fields and diagnostics


def test_ampere_and_gauss():
    np.testing.assert_allclose(ampere_update([1.0, 2.0], [0.5, -0.5], 0.1), [0.95, 2.05])
    np.testing.assert_allclose(ampere_update([1.0], [0.5], 0.1, j_ext=0.5), [0.9])
    space = SpatialGrid(32, 2 * np.pi)
    z = space.z
    np.testing.assert_allclose(gauss_residual(np.sin(z), np.cos(z), space), 0, atol=1e-13)
    np.testing.assert_allclose(gauss_residual(np.sin(z), np.cos(z) + 1.0, space, background=1.0), 0, atol=1e-13)


def test_diagnostics_row():
    space = SpatialGrid(8, 4.0)
    st = line_state(3.0, 31, lambda z, q: np.exp(-(q**2)) + 0 * z, space=space)
    row = diagnostics_row(st, -1.0, np.zeros(8), 0.25)
    dens = st.densities()[0][0]
    assert row[1] == pytest.approx(-dens * 4.0)
    assert row[3] == 0.0 and row[5] == 0.25


def test_current_of_neutral_symmetric_state_is_zero():
    rng = np.random.default_rng(1)
    mg = MomentumGrid(np.linspace(-2, 2, 9), np.linspace(-2, 2, 9), np.linspace(-2, 2, 9))
    w = rng.uniform(size=(1, 9, 9, 9))
    st = DistributionState(w, w.copy(), SpatialGrid(), mg, Hyperplane.from_rapidity(0.5, (0, 0, 1)))
    r = invariant_current(st)
    assert np.abs(r["hyperplane"]).max() == 0.0 and r["difference"] == 0.0


def test_invariant_current_matches_hyperplane_form():
    rng = np.random.default_rng(0)
    mg = MomentumGrid(np.linspace(-2, 2, 9), np.linspace(-2, 2, 9), np.linspace(-2, 2, 9))
    for h in (Hyperplane.instant(), Hyperplane.from_rapidity(0.7, (1, 2, -1))):
        st = DistributionState(rng.uniform(size=(1, 9, 9, 9)), rng.uniform(size=(1, 9, 9, 9)), SpatialGrid(), mg, h)
        r = invariant_current(st)
        assert r["difference"] < 1e-14 * np.abs(r["hyperplane"]).max() + 1e-18


def test_cold_beam_current():
    mg = MomentumGrid.line(3.0, 301)
    st = line_state(3.0, 301, lambda z, q: np.exp(-((q - 1.0) ** 2) / (2 * 0.01**2)))
    j = quasi_classical_current(st)[:, 0]
    assert j[3] / j[0] == pytest.approx(1 / np.sqrt(2), rel=1e-4)
    assert mg.shape == st.momentum.shape


# ---------------------------------------------------------------- characteristics


def test_pusher_free_motion_and_constant_e():
    ens = Ensemble([[0, 0, 0]], [[0.3, 0, 0.4]], 1.0, 1.0)
    out = push_characteristics(ens, None, 2.0)
    np.testing.assert_allclose(out.x, [[0.3 * 2 / np.sqrt(1.25), 0, 0.4 * 2 / np.sqrt(1.25)]], atol=1e-15)
    cfg = UniformField(E=(0, 0, 0.5))
    for _ in range(10):
        ens = push_characteristics(ens, cfg, 0.1)
    np.testing.assert_allclose(ens.p, [[0.3, 0, 0.4 - 0.5]], atol=1e-14)  # dp/dt = e E, e = -1


def test_pusher_cyclotron_orbit():
    B = 2.0
    ens = Ensemble([[0, 0, 0]], [[0.8, 0, 0.1]], 1.0, 1.0)
    eps = np.sqrt(1.65)
    n = 400
    dt = 2 * np.pi * eps / B / n
    for _ in range(n):
        ens = push_characteristics(ens, UniformField(B=(0, 0, B)), dt)
    np.testing.assert_allclose(ens.p, [[0.8, 0, 0.1]], atol=1e-8)
    np.testing.assert_allclose(ens.x[0, :2], 0, atol=1e-8)
    assert abs(ens.energy()[0] - eps) < 1e-10


def test_sampled_ensemble_carries_grid_charge():
    space = SpatialGrid(8, 4.0)
    st = line_state(3.0, 31, lambda z, q: np.exp(-((q - 0.3) ** 2)), lambda z, q: 0.5 * np.exp(-(q**2)), space)
    ens = sample_ensemble(st, 500, np.random.default_rng(0))
    Q = ensemble_current(ens)[0]
    grid_q = quasi_classical_current(st)[0].sum() * space.dz
    assert Q == pytest.approx(grid_q, rel=1e-12)
    assert ens.x.shape == (1000, 3)


def test_covariant_residual_examples():
    cfg = UniformField(B=(0, 0, 1.5))

    def f(x, p):
        X = p[0] + 1.5 * x[2]
        Y = p[1] - 1.5 * x[1]
        return np.exp(-(X**2) - Y**2 - p[2] ** 2)

    rng = np.random.default_rng(2)
    x = rng.normal(size=(4, 6))
    p3 = rng.normal(size=(3, 6)) * 0.5
    p = np.vstack([np.sqrt(1 + np.sum(p3**2, axis=0)), p3])
    r = covariant_residual(f, x, p, cfg, charge=-1.0)
    assert r["max"] < 1e-9 and r["max_u_norm_error"] < 1e-14
    wrong = covariant_residual(f, x, p, cfg, charge=1.0)
    assert wrong["max"] > 1e-3
    bad = p.copy()
    bad[0] += 0.1
    with pytest.raises(ValueError, match="off-shell"):
        covariant_residual(f, x, bad, cfg)


# ---------------------------------------------------------------- plasma helpers


def test_cold_pair_plasma_and_frequency():
    space = SpatialGrid(16, 4 * np.pi)
    mg = MomentumGrid.line(0.12, 121)
    st = cold_pair_plasma(space, mg, 1.0, 0.01, 0.02)
    n_e, n_p = st.densities()
    np.testing.assert_allclose(n_e, 0.5, rtol=1e-6)
    np.testing.assert_allclose(n_p, 0.5, rtol=1e-6)
    assert plasma_frequency(1.0) == 1.0 and plasma_frequency(4.0, e=0.5, mass=0.25) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        cold_pair_plasma(space, MomentumGrid(np.linspace(-1, 1, 3), np.zeros(1), mg.pz), 1.0, 0.01, 0.02)


def test_oscillation_period():
    t = np.linspace(0, 20, 2001)
    assert oscillation_period(t, np.sin(1.3 * t + 0.2)) == pytest.approx(2 * np.pi / 1.3, rel=1e-5)
    with pytest.raises(ValueError):
        oscillation_period(t[:50], np.sin(t[:50]))
