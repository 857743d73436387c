"""Quasi-classical electron/positron distributions and their Vlasov dynamics.

``w`` describes particles of charge ``e`` and ``w_bar`` antiparticles of
charge ``-e``.  Both live on the momentum grid ``q`` of the hyperplane
(``p_perp = q_i e_i``, ``eps = sqrt(m^2 + |q|^2)``) and are normalized so
that ``sum w dq / (2 pi hbar)^k`` is a number density.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.ndimage import map_coordinates

from .clifford import METRIC
from .fields import FieldConfig
from .geometry import Hyperplane
from .wigner import (
    MomentumGrid,
    SpatialGrid,
    WignerState,
    _grid_header,
    _grids_from_header,
    momentum_derivative,
    read_container,
    spectral_derivative,
    write_container,
)

POSITIVITY_FLOOR = 0.0
INFLOW_THRESHOLD = 1e-6
_GL3_NODES, _GL3_WEIGHTS = np.polynomial.legendre.leggauss(3)


class DomainError(RuntimeError):
    """A characteristic left the momentum grid while carrying mass."""


# ---------------------------------------------------------------- grid state


@dataclass
class DistributionState:
    """``w`` and ``w_bar`` sampled on ``(z, q_x, q_y, q_z)``."""

    w: np.ndarray
    wbar: np.ndarray
    space: SpatialGrid
    momentum: MomentumGrid
    hyperplane: Hyperplane = field(default_factory=Hyperplane.instant)
    hbar: float = 1.0
    t: float = 0.0
    mass: float = 1.0

    def __post_init__(self):
        shape = (self.space.nz,) + self.momentum.shape
        self.w = np.asarray(self.w, dtype=float)
        self.wbar = np.asarray(self.wbar, dtype=float)
        if self.w.shape != shape or self.wbar.shape != shape:
            raise ValueError(f"distributions must have shape {shape}")

    def with_values(self, w, wbar, t=None) -> "DistributionState":
        return replace(self, w=w, wbar=wbar, t=self.t if t is None else t)

    @property
    def eps(self) -> np.ndarray:
        """``eps(q) = sqrt(m^2 + |q|^2)``, shape ``(1, npx, npy, npz)``; never imaginary since ``p_perp^2 <= 0``."""
        q = self.momentum.mesh()
        return np.sqrt(self.mass**2 + np.sum(q**2, axis=0))[None]

    def p_perp(self) -> np.ndarray:
        basis = self.hyperplane.transverse_basis()
        return np.einsum("im,i...->m...", basis, self.momentum.mesh())[:, None]

    def velocity(self) -> np.ndarray:
        """``v_perp^mu = p_perp^mu / eps``."""
        return self.p_perp() / self.eps[None]

    def on_shell_momentum(self) -> np.ndarray:
        """``p^mu = eps n^mu + p_perp^mu``."""
        return np.einsum("m,...->m...", self.hyperplane.n, self.eps) + self.p_perp()

    def measure(self) -> float:
        k = len(self.momentum.active)
        return self.momentum.cell_volume / (2.0 * np.pi * self.hbar) ** k

    def densities(self) -> tuple[np.ndarray, np.ndarray]:
        """Particle and antiparticle number densities per z node."""
        m = self.measure()
        return self.w.sum(axis=(1, 2, 3)) * m, self.wbar.sum(axis=(1, 2, 3)) * m


def from_wigner(state: WignerState, mass: float = 1.0) -> tuple[DistributionState, float]:
    """Distributions from the scalar and longitudinal vector channels.

    ``w(q) = (eps W / m + W_par)(q) / 2``, ``w_bar(q) = (eps W / m - W_par)(-q) / 2``.
    Also returns the closure residual ``max |W_perp - p_perp W / m| / max |W|``.
    Needs a momentum grid symmetric under ``q -> -q``.
    """
    if not state.momentum.is_symmetric():
        raise ValueError("from_wigner needs a momentum grid symmetric about zero")
    sc = state.split()
    q = state.momentum.mesh()
    eps = np.sqrt(mass**2 + np.sum(q**2, axis=0))[None]
    S = sc.scalar.real
    par = sc.par.real
    w = 0.5 * (eps * S / mass + par)
    wbar_at_q = 0.5 * (eps * S / mass - par)
    wbar = wbar_at_q[:, ::-1, ::-1, ::-1]
    pp = state.p_perp()
    closure = sc.perp - pp * sc.scalar[None] / mass
    scale = max(float(np.max(np.abs(sc.scalar), initial=0.0)), 1e-300)
    residual = float(np.max(np.abs(closure), initial=0.0)) / scale
    dist = DistributionState(w, wbar, state.space, state.momentum, state.hyperplane, state.hbar, state.t, mass)
    return dist, residual


def write_distribution_snapshot(path, state: DistributionState, extra: dict | None = None) -> None:
    """``(w, w_bar)`` stacked along a leading axis, in the shared snapshot container."""
    header = _grid_header(state.space, state.momentum, state.hyperplane, state.hbar, state.t)
    header.update(payload="distribution", mass=state.mass)
    if extra:
        header["extra"] = extra
    write_container(path, header, np.stack([state.w, state.wbar]))


def read_distribution_snapshot(path) -> DistributionState:
    header, data = read_container(path)
    if header.get("payload") != "distribution":
        raise ValueError(f"{path}: payload {header.get('payload')!r} is not a distribution")
    space, momentum, h = _grids_from_header(header)
    return DistributionState(data[0].copy(), data[1].copy(), space, momentum, h, header["hbar"], header["t"], header["mass"])


# ---------------------------------------------------------------- kinetic equation


def vlasov_kernel(grad_x, grad_p, p_perp, eps, F, h: Hyperplane, charge: float) -> np.ndarray:
    """Pointwise ``d_tau w`` of the hyperplane Vlasov equation.

    ``grad_x[mu]`` is ``nabla_mu w`` (lower), ``grad_p[nu]`` is ``grad_p^nu w``
    (upper), ``F`` is ``F^{mu nu}`` (upper).  Returns
    ``-v_perp^mu nabla_mu w + q (n^mu F_{mu nu} + v_perp^mu F_perp_{mu nu}) grad_p^nu w``.
    """
    Fl = np.einsum("ma,nb,ab...->mn...", METRIC, METRIC, F)
    Dl = h.projector.T
    Fp = np.einsum("ma,nb,ab...->mn...", Dl, Dl, Fl)
    v = p_perp / eps
    force = np.einsum("m,mn...->n...", h.n, Fl) + np.einsum("m...,mn...->n...", v, Fp)
    return -np.einsum("m...,m...->...", v, grad_x) + charge * np.einsum("n...,n...->...", force, grad_p)


def vlasov_rhs(state: DistributionState, cfg: FieldConfig | None, e: float = -1.0, t: float | None = None):
    """``(d_tau w, d_tau w_bar)`` on the grid: spectral in z, 4th-order differences in q."""
    t = state.t if t is None else t
    h = state.hyperplane
    basis = h.transverse_basis()
    e3 = basis[2]
    xi = state.space.z if not state.space.homogeneous else np.zeros(1)
    x = np.outer(h.n, np.full(xi.shape, t)) + np.outer(e3, xi)
    if cfg is None:
        F = np.zeros((4, 4, xi.size))
    else:
        F = cfg.tensor(x)
    F = F[:, :, :, None, None, None]
    pp = state.p_perp()
    eps = state.eps

    out = []
    for arr, charge in ((state.w, e), (state.wbar, -e)):
        gx = np.zeros((4,) + arr.shape)
        if not state.space.homogeneous:
            dxi = spectral_derivative(arr, state.space, axis=0).real
            gx = -(METRIC @ e3).reshape(4, 1, 1, 1, 1) * dxi[None]
        gp = np.zeros((4,) + arr.shape)
        for j in state.momentum.active:
            d = momentum_derivative(arr, state.momentum.spacing(j), axis=1 + j)
            gp -= basis[j].reshape(4, 1, 1, 1, 1) * d[None]
        out.append(vlasov_kernel(gx, gp, pp, eps, F, h, charge))
    return out[0], out[1]


# ---------------------------------------------------------------- semi-Lagrangian


def _impulse(cfg: FieldConfig, z: np.ndarray, t0: float, dt: float) -> np.ndarray:
    """``integral_t0^{t0+dt} E(t, z) dt`` by 3-point Gauss-Legendre, shape ``(3, nz)``."""
    total = np.zeros((3, z.size))
    for node, wgt in zip(_GL3_NODES, _GL3_WEIGHTS):
        t = t0 + 0.5 * dt * (node + 1.0)
        x = np.zeros((4, z.size))
        x[0] = t
        x[3] = z
        F = cfg.tensor(x)
        if np.max(np.abs(F[1:, 1:]), initial=0.0) > 0:
            raise ValueError("semi-Lagrangian stepping supports electric fields only")
        total += 0.5 * dt * wgt * F[1:, 0]  # F^{i0} = E^i
    return total


def _shift_momentum(arr: np.ndarray, momentum: MomentumGrid, shift: np.ndarray) -> np.ndarray:
    """``arr(q - shift)`` per z row, cubic spline interpolation; ``shift`` is ``(3, nz)``."""
    active = momentum.active
    for j in range(3):
        if j not in active and np.max(np.abs(shift[j]), initial=0.0) > 0:
            raise ValueError(f"force along unresolved momentum axis {'xyz'[j]}")
    if not active:
        return arr
    out = np.empty_like(arr)
    idx = np.meshgrid(*[np.arange(momentum.shape[j]) for j in active], indexing="ij")
    peak = float(np.max(np.abs(arr), initial=0.0))
    for iz in range(arr.shape[0]):
        row = arr[iz].reshape([momentum.shape[j] for j in active])
        coords = []
        outside = np.zeros(row.shape, bool)
        for k, j in enumerate(active):
            c = idx[k] - shift[j, iz] / momentum.spacing(j)
            outside |= (c < 0) | (c > momentum.shape[j] - 1)
            coords.append(c)
        if outside.any() and peak > 0:
            # inflow from beyond the cutoff is assumed empty; verify the boundary really is
            edge = 0.0
            for k in range(row.ndim):
                moved = np.moveaxis(np.abs(row), k, 0)
                edge = max(edge, float(moved[0].max()), float(moved[-1].max()))
            if edge > INFLOW_THRESHOLD * peak:
                raise DomainError("characteristic leaves the momentum domain; enlarge the grid")
        vals = map_coordinates(row, coords, order=3, mode="nearest")
        out[iz] = vals.reshape(arr.shape[1:])
    return out


def _shift_space(arr: np.ndarray, space: SpatialGrid, dz_shift: np.ndarray) -> np.ndarray:
    """``arr(z - dz_shift(q))`` on the periodic grid; ``dz_shift`` broadcasts over momentum nodes."""
    if space.homogeneous:
        return arr
    nz = space.nz
    out = np.empty_like(arr)
    flat = arr.reshape(nz, -1)
    shifts = np.broadcast_to(dz_shift, (1,) + arr.shape[1:]).reshape(-1)
    base = np.arange(nz, dtype=float)
    for k in range(flat.shape[1]):
        out.reshape(nz, -1)[:, k] = map_coordinates(flat[:, k], [base - shifts[k] / space.dz], order=3, mode="grid-wrap")
    return out


@dataclass
class SLInfo:
    clipped_mass: float = 0.0
    ez: np.ndarray | None = None


def evolve_semilagrangian(
    state: DistributionState,
    cfg: FieldConfig | None,
    dt: float,
    e: float = -1.0,
    ez: np.ndarray | None = None,
    info: SLInfo | None = None,
) -> DistributionState:
    """One Strang-split step (z half, momentum full, z half) in the instant frame.

    With ``ez`` given (self-consistent 1D run) the prescribed ``cfg`` is
    ignored: the current after the first half drift advances ``E_z`` by
    Ampere's law and the momentum kick uses the time-centred average.
    Negative values produced by interpolation are clipped and their mass is
    added to ``info.clipped_mass``.
    """
    if not state.hyperplane.is_instant:
        raise ValueError("semi-Lagrangian stepping runs in the instant frame")
    info = info if info is not None else SLInfo()
    vz = (state.momentum.mesh()[2][None] / state.eps)  # (1, npx, npy, npz)
    half = 0.5 * dt * vz

    w = _shift_space(state.w, state.space, half)
    wb = _shift_space(state.wbar, state.space, half)
    z = state.space.z if not state.space.homogeneous else np.zeros(1)

    if ez is not None:
        mid = state.with_values(w, wb)
        jz = quasi_classical_current(mid, e)[3]
        ez_new = ampere_update(ez, jz, dt)
        impulse = np.zeros((3, z.size))
        impulse[2] = 0.5 * (ez + ez_new) * dt
        info.ez = ez_new
    elif cfg is not None:
        impulse = _impulse(cfg, z, state.t, dt)
    else:
        impulse = np.zeros((3, z.size))

    # d p / dt = q E  ->  w(p, t + dt) = w(p - q * impulse, t)
    w = _shift_momentum(w, state.momentum, e * impulse)
    wb = _shift_momentum(wb, state.momentum, -e * impulse)

    w = _shift_space(w, state.space, half)
    wb = _shift_space(wb, state.space, half)

    meas = state.measure() * (state.space.dz if not state.space.homogeneous else 1.0)
    for arr in (w, wb):
        neg = arr < POSITIVITY_FLOOR
        if neg.any():
            info.clipped_mass += float(-arr[neg].sum() * meas)
            arr[neg] = POSITIVITY_FLOOR
    return state.with_values(w, wb, state.t + dt)


# ---------------------------------------------------------------- currents


def quasi_classical_current(state: DistributionState, e: float = -1.0) -> np.ndarray:
    """Hyperplane form ``j^mu = e sum (p^mu / eps)(w - w_bar) dq / (2 pi hbar)^k``, shape ``(4, nz)``."""
    p = state.on_shell_momentum()
    return e * np.sum(p / state.eps[None] * (state.w - state.wbar)[None], axis=(2, 3, 4)) * state.measure()


@dataclass
class MassShellDistribution:
    """On-shell lift: lab four-momenta ``p`` of every grid node plus ``f``, ``f_bar`` there.

    ``jacobian`` is ``|det d p_lab / d q|``; the invariant measure
    ``d^3 p_lab / p^0`` equals ``jacobian / p^0 d^3 q``.
    """

    p: np.ndarray
    f: np.ndarray
    fbar: np.ndarray
    jacobian: np.ndarray

    def __post_init__(self):
        if np.any(self.p[0] <= 0):
            raise ValueError("mass-shell lift must stay on the p^0 > 0 branch")


def mass_shell_lift(state: DistributionState) -> MassShellDistribution:
    h = state.hyperplane
    basis = h.transverse_basis()
    q = state.momentum.mesh()
    eps = state.eps[0]
    p = state.on_shell_momentum()
    # d p^i_lab / d q_j = n^i q_j / eps + e_j^i
    J = np.einsum("i,j...->ij...", h.n[1:], q / eps) + basis[:, 1:].T.reshape(3, 3, 1, 1, 1)
    det = np.abs(np.linalg.det(np.moveaxis(J, (0, 1), (-2, -1))))
    return MassShellDistribution(p, state.w, state.wbar, det[None])


def invariant_current(state: DistributionState, e: float = -1.0) -> dict[str, np.ndarray]:
    """Hyperplane and mass-shell forms of the current and their difference.

    Mass-shell form: ``j^mu = 2e integral d^4p/(2 pi hbar)^3 p^mu theta(p^0) delta(p^2 - m^2) (f - f_bar)``
    with the delta consumed as ``d^3 p_lab / (2 p^0)`` and the lab momenta
    parametrized by the grid.
    """
    hyper = quasi_classical_current(state, e)
    lift = mass_shell_lift(state)
    weight = lift.jacobian / (2.0 * lift.p[0])
    inv = 2.0 * e * np.sum(lift.p * weight[None] * (lift.f - lift.fbar)[None], axis=(2, 3, 4)) * state.measure()
    return {"hyperplane": hyper, "invariant": inv, "difference": float(np.max(np.abs(hyper - inv), initial=0.0))}


def ampere_update(ez: np.ndarray, jz: np.ndarray, dt: float, j_ext: np.ndarray | float = 0.0) -> np.ndarray:
    """``E_z <- E_z - dt (j_z + j_ext)``."""
    return np.asarray(ez, dtype=float) - dt * (np.asarray(jz, dtype=float) + j_ext)


def gauss_residual(ez: np.ndarray, charge_density: np.ndarray, space: SpatialGrid, background: float | np.ndarray = 0.0) -> np.ndarray:
    """``d_z E_z - (rho - background)`` with the spectral derivative."""
    return spectral_derivative(np.asarray(ez, dtype=complex), space, axis=0).real - (charge_density - background)


def continuity_residual(history: list[DistributionState], e: float = -1.0) -> np.ndarray:
    """``max_z |d_t j^0 + d_z j^z|`` at interior snapshots (central time differences)."""
    if len(history) < 3:
        raise ValueError("need at least three snapshots")
    j = [quasi_classical_current(s, e) for s in history]
    out = []
    for k in range(1, len(history) - 1):
        dt = history[k + 1].t - history[k - 1].t
        r = (j[k + 1][0] - j[k - 1][0]) / dt + spectral_derivative(j[k][3].astype(complex), history[k].space, axis=0).real
        out.append(float(np.max(np.abs(r))))
    return np.array(out)


VLASOV_COLUMNS = ("t", "charge", "kinetic_energy", "field_energy", "gauss_residual", "clipped_mass")


def diagnostics_row(state: DistributionState, e: float, ez: np.ndarray | None, clipped: float) -> list[float]:
    j0 = quasi_classical_current(state, e)[0]
    dz = state.space.dz if not state.space.homogeneous else 1.0
    kin = float(np.sum((state.eps - state.mass) * (state.w + state.wbar)) * state.measure() * dz)
    fe = 0.0 if ez is None else float(0.5 * np.sum(ez**2) * dz)
    gres = 0.0
    if ez is not None and not state.space.homogeneous:
        gres = float(np.max(np.abs(gauss_residual(ez, j0, state.space, float(j0.mean())))))
    return [state.t, float(j0.sum() * dz), kin, fe, gres, clipped]


# ---------------------------------------------------------------- particle ensemble


@dataclass
class Ensemble:
    """Weighted macro-particles in the instant frame.

    ``species`` is +1 for particles (charge ``e``) and -1 for antiparticles.
    """

    x: np.ndarray
    p: np.ndarray
    weight: np.ndarray
    species: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        self.p = np.atleast_2d(np.asarray(self.p, dtype=float))
        n = self.x.shape[0]
        self.weight = np.broadcast_to(np.asarray(self.weight, dtype=float), (n,)).copy()
        self.species = np.broadcast_to(np.asarray(self.species, dtype=float), (n,)).copy()
        if self.x.shape != (n, 3) or self.p.shape != (n, 3):
            raise ValueError("positions and momenta must have shape (N, 3)")

    def energy(self, mass: float = 1.0) -> np.ndarray:
        return np.sqrt(mass**2 + np.sum(self.p**2, axis=1))

    def velocity(self, mass: float = 1.0) -> np.ndarray:
        return self.p / self.energy(mass)[:, None]


def _lorentz_force(cfg: FieldConfig | None, t: float, x: np.ndarray, v: np.ndarray, q: np.ndarray) -> np.ndarray:
    if cfg is None:
        return np.zeros_like(v)
    X = np.vstack([np.full(x.shape[0], t), x.T])
    F = cfg.tensor(X)
    E = F[1:, 0].T  # F^{i0} = E^i
    B = -0.5 * np.einsum("ijk,ij...->k...", _EPS3, F[1:, 1:]).T
    return q[:, None] * (E + np.cross(v, B))


_EPS3 = np.zeros((3, 3, 3))
_EPS3[0, 1, 2] = _EPS3[1, 2, 0] = _EPS3[2, 0, 1] = 1.0
_EPS3[0, 2, 1] = _EPS3[2, 1, 0] = _EPS3[1, 0, 2] = -1.0


def push_characteristics(ens: Ensemble, cfg: FieldConfig | None, dt: float, e: float = -1.0, mass: float = 1.0) -> Ensemble:
    """RK4 step of ``dx/dt = p/eps``, ``dp/dt = q (E + v x B)`` with ``q = e * species``."""
    q = e * ens.species

    def f(t, x, p):
        v = p / np.sqrt(mass**2 + np.sum(p**2, axis=1))[:, None]
        return v, _lorentz_force(cfg, t, x, v, q)

    t, x, p = ens.t, ens.x, ens.p
    k1 = f(t, x, p)
    k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1[0], p + 0.5 * dt * k1[1])
    k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2[0], p + 0.5 * dt * k2[1])
    k4 = f(t + dt, x + dt * k3[0], p + dt * k3[1])
    x_new = x + (dt / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    p_new = p + (dt / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return Ensemble(x_new, p_new, ens.weight, ens.species, t + dt)


def sample_ensemble(state: DistributionState, n: int, rng: np.random.Generator) -> Ensemble:
    """Draw ``n`` particles and ``n`` antiparticles from the grid distributions (instant frame).

    Nodes are chosen with probability proportional to their mass and jittered
    uniformly within the cell; weights carry the total number per species.
    """
    z = state.space.z if not state.space.homogeneous else np.zeros(1)
    q = state.momentum.mesh()
    dz = state.space.dz if not state.space.homogeneous else 0.0
    meas = state.measure() * (state.space.dz if not state.space.homogeneous else 1.0)
    parts = []
    for arr, sp in ((state.w, 1.0), (state.wbar, -1.0)):
        total = float(arr.sum())
        if total <= 0:
            continue
        flat = arr.reshape(-1) / total
        idx = rng.choice(flat.size, size=n, p=flat)
        iz, ix, iy, ip = np.unravel_index(idx, arr.shape)
        x = np.zeros((n, 3))
        x[:, 2] = z[iz] + (rng.uniform(-0.5, 0.5, n) * dz)
        p = np.stack([q[0][ix, iy, ip], q[1][ix, iy, ip], q[2][ix, iy, ip]], axis=1)
        for j in state.momentum.active:
            p[:, j] += rng.uniform(-0.5, 0.5, n) * state.momentum.spacing(j)
        parts.append((x, p, np.full(n, total * meas / n), np.full(n, sp)))
    if not parts:
        return Ensemble(np.zeros((0, 3)), np.zeros((0, 3)), np.zeros(0), np.zeros(0), state.t)
    return Ensemble(*(np.concatenate(a) for a in zip(*parts)), t=state.t)


def ensemble_current(ens: Ensemble, e: float = -1.0, mass: float = 1.0) -> np.ndarray:
    """Total ``(Q, J)`` carried by the ensemble."""
    v = ens.velocity(mass)
    q = e * ens.species * ens.weight
    return np.concatenate([[q.sum()], (q[:, None] * v).sum(axis=0)])


# ---------------------------------------------------------------- covariant residual


def covariant_residual(
    f,
    x: np.ndarray,
    p: np.ndarray,
    cfg: FieldConfig | None,
    charge: float = -1.0,
    mass: float = 1.0,
    h: float = 1e-4,
    shell_tol: float = 1e-9,
) -> dict[str, float]:
    """``p^mu (d_mu - q F_{mu nu} d_p^nu) f`` at sample points by central differences.

    ``f(x, p3)`` is an on-shell function of lab position ``x`` (shape ``(4, K)``)
    and 3-momentum; ``p`` holds the samples' four-momenta (shape ``(4, K)``)
    and must satisfy ``p^2 = m^2``, ``p^0 > 0``.  ``d_p^nu = d/dp_nu`` acts on
    the spatial components (``d/dp_j = -d/dp^j``).  Also reports the
    deviation of ``u = p/m`` from unit norm.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    p2 = p[0] ** 2 - np.sum(p[1:] ** 2, axis=0)
    off = np.abs(p2 - mass**2)
    if np.any(off > shell_tol * max(1.0, mass**2)) or np.any(p[0] <= 0):
        raise ValueError(f"off-shell sample detected (max |p^2 - m^2| = {off.max():.3e})")
    p3 = p[1:]
    weights = (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)
    offsets = (-2, -1, 1, 2)

    dx = np.zeros_like(x)
    for mu in range(4):
        acc = 0.0
        for o, wgt in zip(offsets, weights):
            xs = x.copy()
            xs[mu] += o * h
            acc = acc + wgt * f(xs, p3)
        dx[mu] = acc / h
    dp = np.zeros_like(p3)  # d f / d p^j
    for j in range(3):
        acc = 0.0
        for o, wgt in zip(offsets, weights):
            ps = p3.copy()
            ps[j] += o * h
            acc = acc + wgt * f(x, ps)
        dp[j] = acc / h

    stream = np.einsum("m...,m...->...", p, dx)
    force_term = 0.0
    if cfg is not None:
        Fl = np.einsum("ma,nb,ab...->mn...", METRIC, METRIC, cfg.tensor(x))
        pF = np.einsum("m...,mn...->n...", p, Fl)  # p^mu F_{mu nu}
        # d_p^j = -d/dp^j on spatial components
        force_term = -charge * np.einsum("j...,j...->...", pF[1:], -dp)
    res = stream + force_term
    u = p / mass
    u_norm = np.abs(u[0] ** 2 - np.sum(u[1:] ** 2, axis=0) - 1.0)
    pFp = 0.0
    if cfg is not None:
        pFp = float(np.max(np.abs(np.einsum("m...,mn...,n...->...", p, Fl, p))))
    return {
        "max": float(np.max(np.abs(res))),
        "mean": float(np.mean(np.abs(res))),
        "max_off_shell": float(off.max()),
        "max_u_norm_error": float(u_norm.max()),
        "max_pFp": pFp,
    }


# ---------------------------------------------------------------- plasma set-ups


def cold_pair_plasma(
    space: SpatialGrid,
    momentum: MomentumGrid,
    density: float,
    width: float,
    drift: float,
    mode: int = 1,
    mass: float = 1.0,
    hbar: float = 1.0,
) -> DistributionState:
    """Neutral electron/positron plasma of total density ``density`` with a drift perturbation.

    Each species carries half the density in a narrow Gaussian of momentum
    width ``width`` centred on ``+-drift sin(2 pi mode z / L)`` (particles and
    antiparticles drift oppositely, so both add to the current).  With
    charge ``e`` the cold-plasma frequency is ``omega_p^2 = density e^2 / m``.
    """
    if momentum.active != (2,):
        raise ValueError("the pair-plasma set-up uses a p_z line")
    z = space.z.reshape(-1, 1, 1, 1)
    q = momentum.mesh()[2][None]
    u = drift * np.sin(2.0 * np.pi * mode * z / space.length) if not space.homogeneous else drift
    norm = 0.5 * density * (2.0 * np.pi * hbar) / (np.sqrt(2.0 * np.pi) * width)
    w = norm * np.exp(-0.5 * ((q - u) / width) ** 2)
    wbar = norm * np.exp(-0.5 * ((q + u) / width) ** 2)
    return DistributionState(w, wbar, space, momentum, Hyperplane.instant(), hbar, 0.0, mass)


def plasma_frequency(density: float, e: float = -1.0, mass: float = 1.0) -> float:
    return float(np.sqrt(density * e * e / mass))


def oscillation_period(t: np.ndarray, signal: np.ndarray) -> float:
    """Mean period from linearly interpolated upward zero crossings."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(signal, dtype=float)
    idx = np.nonzero((s[:-1] < 0) & (s[1:] >= 0))[0]
    if idx.size < 2:
        raise ValueError("signal has fewer than two upward zero crossings")
    crossings = t[idx] - s[idx] * (t[idx + 1] - t[idx]) / (s[idx + 1] - s[idx])
    return float((crossings[-1] - crossings[0]) / (crossings.size - 1))
