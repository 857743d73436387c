"""Gauge-invariant Wigner transform, phase-space grids and the channel container.

Lattice transform conventions
-----------------------------
The density matrix lives on a periodic lattice of ``N`` (even) sites,
spacing ``a``, length ``L = N a``.  Wigner positions ``X`` sit on the
half-lattice ``X_l = l a / 2`` (``l = 0 .. 2N-1``) and relative separations
are ``y = j a`` with ``j = l (mod 2)``, so ``X +- y/2`` always hits a site.
Momenta are ``p_s = pi hbar s / L`` for ``s = -N/2 .. N/2-1``::

    W(X, p) = 2a * sum_j exp(-i p y / hbar) exp(i e Lambda / hbar) rho(X + y/2, X - y/2)

with ``j`` running over ``[-N, N]`` and half weight on ``j = +-N``.  For
density matrices whose plane-wave content is restricted to wavenumber
indices ``|k| < N/4`` the transform is free of aliasing and
``sum_p W dp / (2 pi hbar)`` returns ``rho(X, X)``.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .clifford import BETA, GAMMA, METRIC, WignerChannels, assemble, decompose
from .fields import FieldConfig
from .geometry import BoostMap, Hyperplane, minkowski_dot

CHANNEL_NAMES = (
    "S", "V0", "V1", "V2", "V3", "P", "A0", "A1", "A2", "A3",
    "T01", "T02", "T03", "T12", "T13", "T23",
)
SNAPSHOT_MAGIC = b"QKWS"
SNAPSHOT_VERSION = 1
BOUNDARY_THRESHOLD = 1e-6
ON_PLANE_TOL = 1e-9


class BoundaryError(RuntimeError):
    """Channel data reached the momentum cutoff."""


# ---------------------------------------------------------------- grids


def _is_uniform(a: np.ndarray) -> bool:
    if a.size < 3:
        return True
    d = np.diff(a)
    return bool(np.allclose(d, d[0], rtol=1e-10, atol=0.0))


@dataclass(frozen=True)
class MomentumGrid:
    """Tensor-product grid of transverse momentum components.

    ``axes[i]`` holds the values of ``q_i``, the component of ``p_perp``
    along the i-th transverse basis vector of the hyperplane (the lab axes
    x, y, z in the instant frame).  Single-point axes are frozen: no
    derivative is ever taken along them.
    """

    px: np.ndarray
    py: np.ndarray
    pz: np.ndarray

    def __post_init__(self):
        for name in ("px", "py", "pz"):
            a = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if a.ndim != 1:
                raise ValueError(f"{name} must be one-dimensional")
            if a.size > 1 and (not np.all(np.diff(a) > 0) or not _is_uniform(a)):
                raise ValueError(f"{name} must be uniform and increasing")
            object.__setattr__(self, name, a)

    @classmethod
    def line(cls, pmax: float, n: int, transverse=(0.0, 0.0)) -> "MomentumGrid":
        """``n`` nodes on ``[-pmax, pmax]`` along z at fixed ``(p_x, p_y)``."""
        return cls(np.array([transverse[0]]), np.array([transverse[1]]), np.linspace(-pmax, pmax, n))

    @property
    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.px, self.py, self.pz)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.px.size, self.py.size, self.pz.size)

    @property
    def active(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.axes) if a.size > 1)

    def spacing(self, axis: int) -> float:
        a = self.axes[axis]
        return float(a[1] - a[0]) if a.size > 1 else 0.0

    @property
    def cell_volume(self) -> float:
        """Product of spacings over active axes (1 if none is active)."""
        return float(np.prod([self.spacing(i) for i in self.active])) if self.active else 1.0

    def mesh(self) -> np.ndarray:
        """``q`` components, shape ``(3, npx, npy, npz)``."""
        return np.stack(np.meshgrid(*self.axes, indexing="ij"))

    def is_symmetric(self) -> bool:
        return all(np.allclose(a, -a[::-1], atol=1e-12 * max(1.0, np.abs(a).max())) for a in self.axes)

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("px", "py", "pz")}


@dataclass(frozen=True)
class SpatialGrid:
    """Periodic z grid (``nz`` nodes, length ``length``) or a homogeneous point."""

    nz: int = 1
    length: float = 1.0

    def __post_init__(self):
        if self.nz < 1:
            raise ValueError("nz must be positive")
        if self.length <= 0:
            raise ValueError("spatial length must be positive")

    @property
    def homogeneous(self) -> bool:
        return self.nz == 1

    @property
    def dz(self) -> float:
        return self.length / self.nz

    @property
    def z(self) -> np.ndarray:
        return np.arange(self.nz) * self.dz

    def wavenumbers(self) -> np.ndarray:
        k = 2.0 * np.pi * np.fft.fftfreq(self.nz, d=self.dz)
        if self.nz % 2 == 0:
            k[self.nz // 2] = 0.0  # drop the unpaired Nyquist mode
        return k


def spectral_derivative(f: np.ndarray, grid: SpatialGrid, axis: int) -> np.ndarray:
    """Periodic Fourier derivative along ``axis``."""
    if grid.homogeneous:
        return np.zeros_like(f)
    k = grid.wavenumbers()
    shape = [1] * f.ndim
    shape[axis] = k.size
    return np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(f, axis=axis), axis=axis)


_INTERIOR = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_EDGE0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_EDGE1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0


def momentum_derivative(f: np.ndarray, spacing: float, axis: int) -> np.ndarray:
    """Fourth-order finite difference with one-sided closures at both ends."""
    f = np.moveaxis(np.asarray(f), axis, 0)
    n = f.shape[0]
    if n < 5:
        raise ValueError("momentum derivative needs at least 5 nodes along the axis")
    out = np.empty_like(f)
    out[2:-2] = sum(c * f[k : n - 4 + k] for k, c in enumerate(_INTERIOR) if c != 0.0)
    out[0] = sum(c * f[k] for k, c in enumerate(_EDGE0))
    out[1] = sum(c * f[k] for k, c in enumerate(_EDGE1))
    out[-1] = -sum(c * f[n - 1 - k] for k, c in enumerate(_EDGE0))
    out[-2] = -sum(c * f[n - 1 - k] for k, c in enumerate(_EDGE1))
    return np.moveaxis(out / spacing, 0, axis)


# ---------------------------------------------------------------- state


@dataclass
class WignerState:
    """Sixteen Wigner channels on a ``(z, p_x, p_y, p_z)`` grid.

    ``data`` has shape ``(16, nz, npx, npy, npz)`` in the order of
    :data:`CHANNEL_NAMES` (tensor components with upper indices).
    """

    data: np.ndarray
    space: SpatialGrid
    momentum: MomentumGrid
    hyperplane: Hyperplane = field(default_factory=Hyperplane.instant)
    hbar: float = 1.0
    t: float = 0.0

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        expected = (16, self.space.nz) + self.momentum.shape
        if self.data.shape != expected:
            raise ValueError(f"channel array has shape {self.data.shape}, expected {expected}")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")

    @classmethod
    def zeros(cls, space: SpatialGrid, momentum: MomentumGrid, **kw) -> "WignerState":
        return cls(np.zeros((16, space.nz) + momentum.shape, complex), space, momentum, **kw)

    @property
    def channels(self) -> WignerChannels:
        return WignerChannels.unpack(self.data)

    def with_data(self, data: np.ndarray, t: float | None = None) -> "WignerState":
        return replace(self, data=data, t=self.t if t is None else t)

    def copy(self) -> "WignerState":
        return self.with_data(self.data.copy())

    def p_perp(self) -> np.ndarray:
        """Four-vector ``p_perp^mu`` at every momentum node, shape ``(4, 1, npx, npy, npz)``."""
        basis = self.hyperplane.transverse_basis()  # (3, 4)
        q = self.momentum.mesh()
        return np.einsum("im,i...->m...", basis, q)[:, None]

    def momentum_measure(self) -> float:
        """Weight turning a momentum sum into ``integral d^k p / (2 pi hbar)^k`` over active axes."""
        k = len(self.momentum.active)
        return self.momentum.cell_volume / (2.0 * np.pi * self.hbar) ** k

    def split(self) -> "SplitChannels":
        return split_channels(self.channels, self.hyperplane)

    def matrix(self) -> np.ndarray:
        """Assembled 4x4 Wigner matrix, shape ``(4, 4, nz, npx, npy, npz)``."""
        return assemble(self.channels)


# ---------------------------------------------------------------- split


@dataclass
class SplitChannels:
    """Longitudinal/transverse parts of the sixteen channels.

    ``vector = n * par + perp``; ``tensor = U n - n U + tensor_perp``.
    """

    scalar: np.ndarray
    par: np.ndarray
    perp: np.ndarray
    pseudoscalar: np.ndarray
    axial_par: np.ndarray
    axial_perp: np.ndarray
    U: np.ndarray
    tensor_perp: np.ndarray

    def astuple(self):
        return (self.scalar, self.par, self.perp, self.pseudoscalar, self.axial_par, self.axial_perp, self.U, self.tensor_perp)

    def unsplit(self, h: Hyperplane) -> WignerChannels:
        n = h.n
        vec = np.einsum("m,...->m...", n, self.par) + self.perp
        ax = np.einsum("m,...->m...", n, self.axial_par) + self.axial_perp
        Un = np.einsum("m...,n->mn...", self.U, n)
        ten = Un - np.swapaxes(Un, 0, 1) + self.tensor_perp
        return WignerChannels(self.scalar, vec, self.pseudoscalar, ax, ten)


def boost_channels(boost: BoostMap, data: np.ndarray) -> np.ndarray:
    """Lorentz-transform packed channels (leading axis 16): scalars stay, vectors and the tensor rotate."""
    c = WignerChannels.unpack(np.asarray(data))
    out = WignerChannels(c.scalar, boost.vector(c.vector), c.pseudoscalar, boost.vector(c.axial), boost.tensor2(c.tensor))
    return out.pack()


def split_channels(ch: WignerChannels, h: Hyperplane) -> SplitChannels:
    n_low = h.n_lower
    D = h.projector
    return SplitChannels(
        scalar=ch.scalar,
        par=np.einsum("m,m...->...", n_low, ch.vector),
        perp=np.einsum("ma,a...->m...", D, ch.vector),
        pseudoscalar=ch.pseudoscalar,
        axial_par=np.einsum("m,m...->...", n_low, ch.axial),
        axial_perp=np.einsum("ma,a...->m...", D, ch.axial),
        U=np.einsum("a,ma...->m...", n_low, ch.tensor),
        tensor_perp=np.einsum("ma,nb,ab...->mn...", D, D, ch.tensor),
    )


# ---------------------------------------------------------------- hermiticity


def modified_matrix(state: WignerState) -> np.ndarray:
    """``W~ = W gamma^0`` (instant frame), shape ``(4, 4, ...)``."""
    return np.einsum("ab...,bc->ac...", state.matrix(), BETA)


def hermiticity_residual(state: WignerState) -> float:
    """``max |W~ - W~^dagger| / max |W~|`` (0 for a zero state)."""
    Wt = modified_matrix(state)
    scale = np.max(np.abs(Wt), initial=0.0)
    if scale == 0.0:
        return 0.0
    diff = Wt - np.conj(np.swapaxes(Wt, 0, 1))
    return float(np.max(np.abs(diff)) / scale)


def reality_pattern(state: WignerState, rtol: float = 1e-10) -> dict[str, str]:
    """Classify each channel as real, imaginary, zero or complex."""
    scale = max(float(np.max(np.abs(state.data), initial=0.0)), 1e-300)
    out = {}
    for name, c in zip(CHANNEL_NAMES, state.data):
        re = float(np.max(np.abs(c.real), initial=0.0)) / scale
        im = float(np.max(np.abs(c.imag), initial=0.0)) / scale
        if re <= rtol and im <= rtol:
            out[name] = "zero"
        elif im <= rtol:
            out[name] = "real"
        elif re <= rtol:
            out[name] = "imaginary"
        else:
            out[name] = "complex"
    return out


def check_boundary(state: WignerState, threshold: float = BOUNDARY_THRESHOLD) -> float:
    """Largest channel magnitude on the momentum cutoff relative to the global maximum.

    Raises :class:`BoundaryError` above ``threshold``.
    """
    d = np.abs(state.data)
    peak = float(d.max(initial=0.0))
    if peak == 0.0:
        return 0.0
    edge = 0.0
    for ax in state.momentum.active:
        moved = np.moveaxis(d, 2 + ax, 0)
        edge = max(edge, float(moved[0].max()), float(moved[-1].max()))
    ratio = edge / peak
    if ratio > threshold:
        raise BoundaryError(f"channel magnitude at the momentum cutoff is {ratio:.3e} of the maximum")
    return ratio


# ---------------------------------------------------------------- lattice + transform


@dataclass
class DensityMatrixLattice:
    """``values[i, j, a, b] = rho_ab(z_i, z_j)`` on a periodic z lattice."""

    values: np.ndarray
    length: float
    tau: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        N = self.values.shape[0]
        if self.values.shape != (N, N, 4, 4):
            raise ValueError(f"density matrix must have shape (N, N, 4, 4), got {self.values.shape}")
        if self.length <= 0:
            raise ValueError("lattice length must be positive")

    @property
    def n_sites(self) -> int:
        return self.values.shape[0]

    @property
    def spacing(self) -> float:
        return self.length / self.n_sites

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.n_sites) * self.spacing

    @classmethod
    def from_spinors(cls, spinors: np.ndarray, weights, length: float, tau: float = 0.0) -> "DensityMatrixLattice":
        """``rho(z, z') = sum_k w_k psi_k(z) psi_k(z')^dagger gamma^0`` from ``spinors[k, site, a]``."""
        psi = np.asarray(spinors, dtype=complex)
        w = np.asarray(weights, dtype=float)
        vals = np.einsum("k,kia,kjc,cb->ijab", w, psi, psi.conj(), BETA)
        return cls(vals, length, tau)

    def conjugation_residual(self) -> float:
        """``max |gamma^0 rho(z', z) gamma^0 - rho(z, z')^dagger|``."""
        lhs = np.einsum("ab,jibc,cd->ijad", BETA, self.values, BETA)
        rhs = np.conj(np.swapaxes(self.values, 2, 3))
        return float(np.max(np.abs(lhs - rhs), initial=0.0))

    def site_density(self) -> np.ndarray:
        """``tr(gamma^0 rho(z, z))`` for every site."""
        diag = self.values[np.arange(self.n_sites), np.arange(self.n_sites)]
        return np.einsum("ab,iba->i", BETA, diag)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def wilson_phase(x1, x2, cfg: FieldConfig, h: Hyperplane, panels: int = 1) -> np.ndarray:
    """``Lambda(x1, x2) = integral_0^1 ds (x1 - x2)_perp . A_perp(x2 + s (x1 - x2))``.

    Composite 8-point Gauss-Legendre rule with ``panels`` equal panels.
    ``x1``/``x2`` may carry trailing batch axes.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    tau1 = np.atleast_1d(minkowski_dot(h.n, x1))
    tau2 = np.atleast_1d(minkowski_dot(h.n, x2))
    if np.max(np.abs(tau1 - tau2)) > ON_PLANE_TOL * max(1.0, float(np.max(np.abs(tau1)))):
        raise ValueError("points do not lie on a common hyperplane")
    D = h.projector
    dx_perp = np.einsum("ma,a...->m...", D, x1 - x2)
    dx_low = np.einsum("mn,n...->m...", METRIC, dx_perp)
    edges = np.linspace(0.0, 1.0, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        for node, wgt in zip(_GL_NODES, _GL_WEIGHTS):
            s = lo + half * (node + 1.0)
            A = cfg.potential(x2 + s * (x1 - x2))
            A_perp = np.einsum("ma,a...->m...", D, A)
            total = total + half * wgt * np.einsum("m...,m...->...", dx_low, A_perp)
    return total


def wigner_transform(
    rho: DensityMatrixLattice,
    cfg: FieldConfig | None = None,
    h: Hyperplane | None = None,
    e: float = -1.0,
    hbar: float = 1.0,
) -> WignerState:
    """Gauge-invariant lattice Wigner transform (see module docstring)."""
    h = Hyperplane.instant(rho.tau) if h is None else h
    if not h.is_instant:
        raise ValueError("the lattice transform is defined in the instant frame only")
    N = rho.n_sites
    if N % 2:
        raise ValueError("the lattice needs an even number of sites for the half-shift sublattice")
    a, L = rho.spacing, rho.length
    s = np.arange(-N // 2, N // 2)
    p = np.pi * hbar * s / L
    X = 0.5 * a * np.arange(2 * N)

    W = np.zeros((4, 4, 2 * N, p.size), dtype=complex)
    for l in range(2 * N):
        js = np.arange(-N + ((l + N) % 2), N + 1, 2)
        i1 = ((l + js) // 2) % N
        i2 = ((l - js) // 2) % N
        y = js * a
        blocks = rho.values[i1, i2]  # (len(js), 4, 4)
        wts = np.where(np.abs(js) == N, 0.5, 1.0)
        if cfg is not None:
            x1 = np.zeros((4, js.size))
            x2 = np.zeros((4, js.size))
            x1[0] = x2[0] = rho.tau
            x1[3] = X[l] + 0.5 * y
            x2[3] = X[l] - 0.5 * y
            panels = max(1, int(np.ceil(np.max(np.abs(js)))))
            lam = wilson_phase(x1, x2, cfg, h, panels=panels)
            wts = wts * np.exp(1j * e * lam / hbar)
        phase = np.exp(-1j * np.outer(p, y) / hbar)  # (np, nj)
        W[:, :, l, :] = 2.0 * a * np.einsum("sj,j,jab->abs", phase, wts, blocks)

    ch = decompose(W).pack()  # (16, 2N, np)
    data = ch[:, :, None, None, :]
    space = SpatialGrid(2 * N, L)
    momentum = MomentumGrid(np.zeros(1), np.zeros(1), p)
    return WignerState(data, space, momentum, h, hbar, rho.tau)


# ---------------------------------------------------------------- I/O


def write_container(path, header: dict, array: np.ndarray) -> None:
    """Binary container: magic, uint32 version, uint32 header length, JSON
    header, then ``array`` little-endian in C order (dtype recorded in the header)."""
    arr = np.ascontiguousarray(array)
    kind = "<c16" if np.iscomplexobj(arr) else "<f8"
    header = dict(header, shape=list(arr.shape), dtype=kind)
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<II", SNAPSHOT_VERSION, len(blob)))
        fh.write(blob)
        fh.write(arr.astype(kind).tobytes())


def read_container(path) -> tuple[dict, np.ndarray]:
    raw = Path(path).read_bytes()
    if raw[:4] != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: not a qedkin snapshot")
    version, hlen = struct.unpack("<II", raw[4:12])
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"{path}: unsupported snapshot version {version}")
    header = json.loads(raw[12 : 12 + hlen])
    data = np.frombuffer(raw[12 + hlen :], dtype=header["dtype"]).reshape(header["shape"])
    return header, data


def _grid_header(space: SpatialGrid, momentum: MomentumGrid, h: Hyperplane, hbar: float, t: float) -> dict:
    return {
        "nz": space.nz,
        "length": space.length,
        "momentum": momentum.to_dict(),
        "n": h.n.tolist(),
        "tau": h.tau,
        "hbar": hbar,
        "t": t,
    }


def _grids_from_header(header: dict):
    mom = header["momentum"]
    return (
        SpatialGrid(header["nz"], header["length"]),
        MomentumGrid(np.array(mom["px"]), np.array(mom["py"]), np.array(mom["pz"])),
        Hyperplane(np.array(header["n"]), header["tau"]),
    )


def write_snapshot(path, state: WignerState, extra: dict | None = None) -> None:
    """Channel snapshot (``payload = "wigner"``) in the shared container."""
    header = _grid_header(state.space, state.momentum, state.hyperplane, state.hbar, state.t)
    header.update(payload="wigner", channels=list(CHANNEL_NAMES))
    if extra:
        header["extra"] = extra
    write_container(path, header, state.data.astype(complex))


def read_snapshot(path) -> WignerState:
    header, data = read_container(path)
    if header.get("payload") != "wigner":
        raise ValueError(f"{path}: payload {header.get('payload')!r} is not a Wigner state")
    space, momentum, h = _grids_from_header(header)
    return WignerState(data.astype(complex), space, momentum, h, header["hbar"], header["t"])


MOMENT_COLUMNS = ("z", "S", "V0", "V1", "V2", "V3", "P_im", "A0", "A1", "A2", "A3")


def moments(state: WignerState) -> np.ndarray:
    """Momentum integrals of the scalar, vector, pseudoscalar and axial channels.

    Rows are z nodes; columns follow :data:`MOMENT_COLUMNS`.  The scalar,
    vector and axial moments are real for hermitian ``W~``; the pseudoscalar
    is reported through its imaginary part.
    """
    integ = state.data[:10].sum(axis=(2, 3, 4)) * state.momentum_measure()  # (10, nz)
    cols = [state.space.z, integ[0].real, *integ[1:5].real, integ[5].imag, *integ[6:10].real]
    return np.column_stack(cols)


def write_moments_csv(path, state: WignerState) -> None:
    header = "\n".join(
        [
            f"t = {state.t!r}",
            f"hbar = {state.hbar!r}",
            "columns: " + ",".join(MOMENT_COLUMNS),
        ]
    )
    np.savetxt(path, moments(state), delimiter=",", fmt="%.17g", header=header, comments="# ")
