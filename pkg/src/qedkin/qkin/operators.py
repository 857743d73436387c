"""Grid realizations of the local kinetic operators and their hbar^2 corrections."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..clifford import METRIC
from ..fields import FieldConfig
from ..geometry import Hyperplane
from ..wigner import WignerState, momentum_derivative, spectral_derivative
from .equations import local_P, rhs_covariant, rhs_split

FIELD_TOL = 1e-14
GEOMETRY_RTOL = 1e-6


class FieldGeometryError(ValueError):
    """The field pushes momentum along an axis the grid does not resolve."""


def sample_points(state: WignerState, t: float) -> np.ndarray:
    """Space-time points ``x = tau n + xi e_3`` of the spatial nodes, shape ``(4, nz)``."""
    h = state.hyperplane
    e3 = h.transverse_basis()[2]
    xi = state.space.z if not state.space.homogeneous else np.zeros(1)
    # tau = n.x; the plane's origin is tau * n
    return np.outer(h.n, np.full(xi.shape, t)) + np.outer(e3, xi)


def _gridded(f: np.ndarray) -> np.ndarray:
    """Reshape a per-z array ``(..., nz)`` for broadcasting against ``(16, nz, npx, npy, npz)``."""
    return f[..., None, :, None, None, None]


@dataclass
class KineticOperators:
    """Local ``D_tau``, ``D_perp`` and ``P`` on a state's grid for one field snapshot.

    ``e`` is the signed fermion charge; ``mass`` and ``hbar`` enter the kernels.
    """

    field: FieldConfig | None
    e: float = -1.0
    mass: float = 1.0
    hbar: float = 1.0
    hbar2: bool = False
    form: str = "split"

    def _field_lower(self, state: WignerState, t: float) -> tuple[np.ndarray, np.ndarray]:
        """``n^mu F_{mu nu}`` and ``F_perp_{mu nu}`` at each z node."""
        h = state.hyperplane
        nz = state.space.nz
        if self.field is None:
            return np.zeros((4, nz)), np.zeros((4, 4, nz))
        F = self.field.tensor(sample_points(state, t))
        Fl = np.einsum("ma,nb,ab...->mn...", METRIC, METRIC, F)
        nF = np.einsum("m,mn...->n...", h.n, Fl)
        Dl = h.projector.T  # Delta_mu^nu
        Fp = np.einsum("ma,nb,ab...->mn...", Dl, Dl, Fl)
        return nF, Fp

    def momentum_gradient(self, state: WignerState, data: np.ndarray, coeff: np.ndarray) -> np.ndarray:
        """``sum_nu coeff[..., nu] grad_p^nu data`` with ``coeff`` shape ``(K, 4, nz)``."""
        basis = state.hyperplane.transverse_basis()  # e_j^nu
        # grad_p^nu = -sum_j e_j^nu d/dq_j
        cj = -np.einsum("kn...,jn->kj...", coeff, basis)  # (K, 3, nz)
        out = np.zeros((coeff.shape[0],) + data.shape, dtype=complex)
        for j in range(3):
            cmax = float(np.max(np.abs(cj[:, j]), initial=0.0))
            if cmax <= FIELD_TOL:
                continue
            if j not in state.momentum.active:
                raise FieldGeometryError(
                    f"field couples to momentum axis {'xyz'[j]} which has a single grid point"
                )
            d = momentum_derivative(data, state.momentum.spacing(j), axis=2 + j)
            out += _gridded(cj[:, j]) * d[None]
        return out

    def spatial_gradient(self, state: WignerState, data: np.ndarray) -> np.ndarray:
        """``nabla_mu data`` (lower index), shape ``(4,) + data.shape``."""
        out = np.zeros((4,) + data.shape, dtype=complex)
        if state.space.homogeneous:
            return out
        e3 = state.hyperplane.transverse_basis()[2]
        e3_low = METRIC @ e3
        dxi = spectral_derivative(data, state.space, axis=1)
        # f depends on xi = -e_3 . x, so nabla_mu f = -e_{3,mu} df/dxi
        return -e3_low.reshape((4,) + (1,) * data.ndim) * dxi[None]

    def apply(self, state: WignerState, data: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(drift, DX, PX)`` where ``D_tau = d_tau + drift``."""
        nF, Fp = self._field_lower(state, t)
        grad = self.momentum_gradient(state, data, np.concatenate([nF[None], Fp]))
        drift = -self.e * grad[0]
        DX = self.spatial_gradient(state, data) - self.e * grad[1:]
        PX = local_P(data, state.p_perp())
        return drift, DX, PX

    def kernel(self, state, C, DX, PX):
        fn = rhs_split if self.form == "split" else rhs_covariant
        return fn(C, DX, PX, state.hyperplane, self.mass, self.hbar)

    def rhs(self, state: WignerState, data: np.ndarray | None = None, t: float | None = None) -> np.ndarray:
        """``d_tau`` of the packed channel array."""
        data = state.data if data is None else data
        t = state.t if t is None else t
        drift, DX, PX = self.apply(state, data, t)
        out = self.kernel(state, data, DX, PX) - drift
        if self.hbar2:
            out = out + hbar2_corrections(state, self.field, self.e, self.hbar, data, t, self).rhs
        return out


@dataclass
class Hbar2Correction:
    """Second-order gradient corrections to the three operators and their net effect.

    ``dtau`` (16, ...), ``dperp`` and ``p`` (4, 16, ...) are the operator
    corrections applied to the data; ``rhs`` is the resulting change of
    ``d_tau C``.
    """

    dtau: np.ndarray
    dperp: np.ndarray
    p: np.ndarray
    rhs: np.ndarray

    def magnitude(self) -> float:
        return max(float(np.max(np.abs(a), initial=0.0)) for a in (self.dtau, self.dperp, self.p))


def _momentum_derivatives(state: WignerState, data: np.ndarray, order: int) -> dict:
    """Mixed ``d/dq`` derivatives of exactly ``order`` along active axes, keyed by sorted axis tuples."""
    layer = {(): data}
    for _ in range(order):
        nxt = {}
        for key, arr in layer.items():
            for j in state.momentum.active:
                k = tuple(sorted(key + (j,)))
                if k not in nxt:
                    nxt[k] = momentum_derivative(arr, state.momentum.spacing(j), axis=2 + j)
        layer = nxt
    return layer


def _contract(Tq: np.ndarray, derivs: dict, shape) -> np.ndarray:
    """``sum_{j..} Tq[j.., z] d_j.. C`` for a basis-projected coefficient tensor."""
    out = np.zeros(shape, complex)
    rank = Tq.ndim - 1
    # finite-difference field gradients leave roundoff in components that vanish analytically
    noise = max(FIELD_TOL, GEOMETRY_RTOL * float(np.max(np.abs(Tq), initial=0.0)))
    for js in itertools.product(range(3), repeat=rank):
        w = Tq[js]
        key = tuple(sorted(js))
        if key in derivs:
            out += _gridded(w) * derivs[key]
        elif np.max(np.abs(w), initial=0.0) > noise:
            raise FieldGeometryError("correction needs a derivative along an unresolved momentum axis")
    return out


def hbar2_corrections(
    state: WignerState,
    field: FieldConfig,
    e: float = -1.0,
    hbar: float | None = None,
    data: np.ndarray | None = None,
    t: float | None = None,
    ops: KineticOperators | None = None,
) -> Hbar2Correction:
    """Gradient corrections of order ``hbar^2`` for a field varying along the hyperplane.

    With ``G = nabla_a grad_p^a`` acting on the field only::

        delta D_tau  = +(e hbar^2/24) n^mu (G^2 F_{mu nu}) grad_p^nu
        delta D_perp = +(e hbar^2/24) (G^2 F_perp_{mu nu}) grad_p^nu
        delta P_mu   = -(e hbar^2/12) (G F_perp_{mu nu}) grad_p^nu

    Because ``grad_p^a = -e_j^a d/dq_j`` only sees transverse directions,
    contracting field derivatives with the basis ``e_j`` projects them.
    """
    if field is None:
        raise ValueError("hbar^2 corrections need a field")
    if getattr(field, "smoothness", 3) < 3:
        raise ValueError(f"field {field.kind!r} is not declared three times differentiable")
    hbar = state.hbar if hbar is None else hbar
    data = state.data if data is None else data
    t = state.t if t is None else t
    ops = ops or KineticOperators(field, e, hbar=hbar)
    h = state.hyperplane
    shape = data.shape
    zero4 = np.zeros((4,) + shape, complex)
    if field.is_homogeneous() and h.is_instant:
        return Hbar2Correction(zero4[0], zero4, zero4.copy(), zero4[0].copy())

    x = sample_points(state, t)
    E = h.transverse_basis()  # E[j, a] = e_j^a
    Dl = h.projector.T  # Delta_mu^nu
    lower = lambda g: np.einsum("ma,nb,...abz->...mnz", METRIC, METRIC, g)
    g1 = lower(field.tensor_gradient(x, 1))  # d_a F_{mu nu}
    g2 = lower(field.tensor_gradient(x, 2))  # d_a d_b F_{mu nu}
    nF2 = np.einsum("m,abmnz->abnz", h.n, g2)
    Fp1 = np.einsum("mc,nd,acdz->amnz", Dl, Dl, g1)
    Fp2 = np.einsum("mc,nd,abcdz->abmnz", Dl, Dl, g2)

    d2 = _momentum_derivatives(state, data, 2)
    d3 = _momentum_derivatives(state, data, 3)
    pref = e * hbar**2
    # three factors of grad_p -> (-1)^3, two -> (+1)
    dtau = -(pref / 24.0) * _contract(np.einsum("abnz,ja,kb,ln->jklz", nF2, E, E, E), d3, shape)
    dperp = np.stack(
        [-(pref / 24.0) * _contract(np.einsum("abnz,ja,kb,ln->jklz", Fp2[:, :, mu], E, E, E), d3, shape) for mu in range(4)]
    )
    dp = np.stack(
        [-(pref / 12.0) * _contract(np.einsum("anz,ja,kn->jkz", Fp1[:, mu], E, E), d2, shape) for mu in range(4)]
    )
    rhs = ops.kernel(state, np.zeros(shape, complex), dperp, dp) - dtau
    return Hbar2Correction(dtau, dperp, dp, rhs)
