"""Brute-force reference: evolve the density matrix itself, then Wigner-transform."""

from __future__ import annotations

import numpy as np

from ..clifford import ALPHA, BETA
from ..fields import FieldConfig
from ..wigner import DensityMatrixLattice, WignerState, wigner_transform

MAX_ORACLE_SITES = 64


def _lattice_derivative(values: np.ndarray, length: float, axis: int) -> np.ndarray:
    N = values.shape[axis]
    k = 2.0 * np.pi * np.fft.fftfreq(N, d=length / N)
    if N % 2 == 0:
        k[N // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = N
    return np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(values, axis=axis), axis=axis)


def density_matrix_rhs(values: np.ndarray, length: float, t: float, cfg: FieldConfig | None, e: float, mass: float, hbar: float) -> np.ndarray:
    """``d_t rho(z, z')`` from the Dirac equation in both arguments.

    ``i hbar d_t rho = H_z rho - rho~H_z'`` with ``H = alpha.(-i hbar grad - e A) + beta m + e A^0``;
    acting from the right on ``rho = psi psi-bar`` flips the sign of the
    alpha terms through ``gamma^0 alpha gamma^0 = -alpha``.
    """
    N = values.shape[0]
    dz = _lattice_derivative(values, length, 0)
    dzp = _lattice_derivative(values, length, 1)
    a3 = ALPHA[2]
    out = -1j * hbar * np.einsum("ab,ijbc->ijac", a3, dz) + 1j * hbar * np.einsum("ijab,bc->ijac", dzp, a3)
    out += mass * (np.einsum("ab,ijbc->ijac", BETA, values) - np.einsum("ijab,bc->ijac", values, BETA))
    if cfg is not None:
        z = np.arange(N) * length / N
        x = np.zeros((4, N))
        x[0] = t
        x[3] = z
        A = cfg.potential(x)  # (4, N)
        for i in range(3):
            ai = ALPHA[i]
            out -= e * (
                np.einsum("i,ab,ijbc->ijac", A[1 + i], ai, values)
                + np.einsum("j,ijab,bc->ijac", A[1 + i], values, ai)
            )
        out += e * (A[0][:, None] - A[0][None, :])[:, :, None, None] * values
    return out / (1j * hbar)


def evolve_density_matrix(
    rho0: DensityMatrixLattice,
    t_end: float,
    cfg: FieldConfig | None = None,
    e: float = -1.0,
    mass: float = 1.0,
    hbar: float = 1.0,
    dt: float = 5e-3,
) -> DensityMatrixLattice:
    """RK4 integration of the lattice density matrix from ``rho0.tau`` to ``rho0.tau + t_end``."""
    N = rho0.n_sites
    if N > MAX_ORACLE_SITES:
        raise ValueError(f"oracle lattice too large: N = {N} > {MAX_ORACLE_SITES}")
    if t_end == 0:
        return rho0
    steps = max(1, int(np.ceil(t_end / dt - 1e-9)))
    h = t_end / steps
    v, t, L = rho0.values.copy(), rho0.tau, rho0.length
    f = lambda y, s: density_matrix_rhs(y, L, s, cfg, e, mass, hbar)
    for _ in range(steps):
        k1 = f(v, t)
        k2 = f(v + 0.5 * h * k1, t + 0.5 * h)
        k3 = f(v + 0.5 * h * k2, t + 0.5 * h)
        k4 = f(v + h * k3, t + h)
        v = v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return DensityMatrixLattice(v, L, t)


def density_matrix_oracle(
    rho0: DensityMatrixLattice,
    cfg: FieldConfig | None,
    t_end: float,
    e: float = -1.0,
    mass: float = 1.0,
    hbar: float = 1.0,
    dt: float = 5e-3,
) -> WignerState:
    """Evolve ``rho0`` directly and return the gauge-invariant Wigner transform at ``t_end``."""
    rho = evolve_density_matrix(rho0, t_end, cfg, e, mass, hbar, dt)
    return wigner_transform(rho, cfg, e=e, hbar=hbar)


def random_conforming_lattice(
    n_sites: int,
    length: float,
    rng: np.random.Generator,
    n_states: int = 3,
    kmax: int | None = None,
) -> DensityMatrixLattice:
    """Mixture of random band-limited spinor fields (wavenumber index ``|k| <= kmax < N/4``)."""
    kmax = n_sites // 4 - 1 if kmax is None else kmax
    if kmax >= n_sites / 4:
        raise ValueError("band limit must stay below N/4 for an alias-free transform")
    z = np.arange(n_sites) * length / n_sites
    psi = np.zeros((n_states, n_sites, 4), complex)
    for s in range(n_states):
        for k in range(-kmax, kmax + 1):
            amp = rng.normal(size=4) + 1j * rng.normal(size=4)
            psi[s] += np.exp(2j * np.pi * k * z / length)[:, None] * amp / (1 + k * k)
    weights = rng.uniform(0.2, 1.0, n_states)
    return DensityMatrixLattice.from_spinors(psi, weights, length)
