"""Current, charge and consistency diagnostics of Wigner-channel states."""

from __future__ import annotations

import numpy as np

from ..wigner import WignerState, hermiticity_residual, spectral_derivative

DIAGNOSTIC_COLUMNS = (
    "t", "Q", "max_div_j", "norm_S", "norm_V", "norm_P", "norm_A", "norm_T", "hermiticity",
)
_GROUPS = {"S": slice(0, 1), "V": slice(1, 5), "P": slice(5, 6), "A": slice(6, 10), "T": slice(10, 16)}


def polarization_current(state: WignerState, e: float = -1.0) -> np.ndarray:
    """``j^mu(z) = e * sum_p W^mu dp / (2 pi hbar)^k``, shape ``(4, nz)``.

    ``k`` counts the resolved momentum axes; frozen axes carry unit weight,
    so a reduced grid yields the corresponding reduced density.
    """
    return e * state.data[1:5].sum(axis=(2, 3, 4)) * state.momentum_measure()


def total_charge(state: WignerState, e: float = -1.0) -> float:
    """``integral j^0 dz`` (or ``j^0`` itself for a homogeneous state)."""
    j0 = polarization_current(state, e)[0].real
    if state.space.homogeneous:
        return float(j0[0])
    return float(j0.sum() * state.space.dz)


def divergence_now(state: WignerState, drho_dt: np.ndarray, e: float = -1.0) -> np.ndarray:
    """``d_t j^0 + d_z j^z`` using the exact channel time derivative ``drho_dt``."""
    dj0 = e * drho_dt[1].sum(axis=(1, 2, 3)) * state.momentum_measure()
    jz = polarization_current(state, e)[3]
    return dj0 + spectral_derivative(jz, state.space, axis=0)


def charge_conservation_residual(history: list[WignerState], e: float = -1.0, order: int = 2) -> np.ndarray:
    """Continuity residual over stored snapshots.

    Homogeneous states: ``|Q(t_k) - Q(t_0)|`` for every snapshot.
    One spatial dimension: ``max_z |d_t j^0 + d_z j^z|`` at interior snapshots,
    with ``d_t`` a central difference of the given ``order`` (2 or 4; the
    latter needs equally spaced snapshots) and the solver's spectral ``d_z``.
    """
    if len(history) < 2:
        raise ValueError("need at least two snapshots")
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    ref = history[0]
    for s in history[1:]:
        if s.space != ref.space or s.data.shape != ref.data.shape:
            raise ValueError("snapshots live on different grids")
        if not all(np.array_equal(a, b) for a, b in zip(s.momentum.axes, ref.momentum.axes)):
            raise ValueError("snapshots live on different momentum grids")
    if ref.space.homogeneous:
        q0 = total_charge(ref, e)
        return np.array([abs(total_charge(s, e) - q0) for s in history])
    half = order // 2
    if len(history) < 2 * half + 1:
        raise ValueError(f"the order-{order} continuity residual needs at least {2 * half + 1} snapshots")
    t = np.array([s.t for s in history])
    if order == 4 and not np.allclose(np.diff(t), t[1] - t[0], rtol=1e-9, atol=0.0):
        raise ValueError("the fourth-order residual needs equally spaced snapshots")
    j = [polarization_current(s, e) for s in history]
    out = []
    for k in range(half, len(history) - half):
        if order == 2:
            dj0 = (j[k + 1][0] - j[k - 1][0]) / (t[k + 1] - t[k - 1])
        else:
            h = t[1] - t[0]
            dj0 = (-j[k + 2][0] + 8 * j[k + 1][0] - 8 * j[k - 1][0] + j[k - 2][0]) / (12 * h)
        r = dj0 + spectral_derivative(j[k][3], ref.space, axis=0)
        out.append(float(np.max(np.abs(r))))
    return np.array(out)


def channel_norms(state: WignerState) -> dict[str, float]:
    w = state.momentum_measure() * (state.space.dz if not state.space.homogeneous else 1.0)
    return {g: float(np.sqrt(w * np.sum(np.abs(state.data[sl]) ** 2))) for g, sl in _GROUPS.items()}


def diagnostics_row(state: WignerState, e: float, drho_dt: np.ndarray | None = None) -> list[float]:
    """One row in :data:`DIAGNOSTIC_COLUMNS` order."""
    div = 0.0
    if drho_dt is not None:
        div = float(np.max(np.abs(divergence_now(state, drho_dt, e))))
    norms = channel_norms(state)
    return [state.t, total_charge(state, e), div, *(norms[g] for g in "SVPAT"), hermiticity_residual(state)]


def small_hbar_record(state: WignerState) -> dict[str, float]:
    """Peak magnitudes of the pseudoscalar and axial channels (recorded, never asserted)."""
    d = np.abs(state.data)
    return {
        "hbar": state.hbar,
        "max_P": float(d[5].max()),
        "max_A": float(d[6:10].max()),
        "max_T": float(d[10:].max()),
    }

