"""Pointwise right-hand sides of the Wigner-channel equations.

All kernels are linear in their three data arguments:

* ``C``   packed channels, shape ``(16, ...)``;
* ``DX``  ``D_perp_mu`` applied to every channel, shape ``(4, 16, ...)``,
  Lorentz index lower;
* ``PX``  ``P_mu`` applied to every channel, shape ``(4, 16, ...)``, index
  lower.  In the local approximation ``PX[mu] = p_perp_mu * C``.

They return ``D_tau C`` (packed), the covariant time derivative along the
hyperplane normal.  ``hbar`` multiplies nothing but divides the mass and
momentum couplings.
"""

from __future__ import annotations

import numpy as np

from ..clifford import (
    ALPHA,
    BETA,
    LEVI_CIVITA,
    LEVI_CIVITA_LOWER,
    LEVI_CIVITA_MIXED,
    METRIC,
    WignerChannels,
)
from ..geometry import Hyperplane
from ..wigner import SplitChannels, split_channels


def _unpack_op(X: np.ndarray) -> WignerChannels:
    """Unpack ``(4, 16, ...)`` into channels carrying a leading operator index."""
    X = np.moveaxis(np.asarray(X), 1, 0)
    ch = WignerChannels.unpack(X)
    # vector/axial come out as (4_channel, 4_op, ...); tensor as (4, 4, 4_op, ...)
    return WignerChannels(
        ch.scalar,
        np.swapaxes(ch.vector, 0, 1),
        ch.pseudoscalar,
        np.swapaxes(ch.axial, 0, 1),
        np.moveaxis(ch.tensor, 2, 0),
    )


def _raise(op: np.ndarray) -> np.ndarray:
    return np.einsum("mn,n...->m...", METRIC, op)


def rhs_covariant(C, DX, PX, h: Hyperplane, mass: float = 1.0, hbar: float = 1.0) -> np.ndarray:
    """``D_tau`` of all channels from the five covariant channel equations."""
    n, nl = h.n, h.n_lower
    c = WignerChannels.unpack(np.asarray(C))
    D = _unpack_op(DX)
    P = _unpack_op(PX)
    eps_mixed = LEVI_CIVITA_MIXED
    m, hb = mass, hbar

    # scalar: (2/hbar)(n_a P_b - n_b P_a) W^{ab}
    s = (2.0 / hb) * (
        np.einsum("a,bab...->...", nl, P.tensor)  # n_a P_b W^{ab}
        - np.einsum("b,aab...->...", nl, P.tensor)  # n_b P_a W^{ab}
    )

    def transport(Dv):
        # -(n^mu D_a - n_a D^mu) X^a, with Dv[op, a] = D_op X^a
        trace = np.einsum("aa...->...", Dv)
        return -(np.einsum("m,...->m...", n, trace) - _raise(np.einsum("a,ma...->m...", nl, Dv)))

    PV_up = _raise(P.vector)  # [beta_up, lam]
    PA_up = _raise(P.axial)
    vec = (
        transport(D.vector)
        - (2.0 / hb) * np.einsum("mabl,a,bl...->m...", eps_mixed, n, PA_up)
        - (4.0 * m / hb) * np.einsum("ma...,a->m...", c.tensor, nl)
    )
    PT_up = _raise(P.tensor)  # [beta_up, lam, rho]
    ps = (2j * m / hb) * np.einsum("a,a...->...", nl, c.axial) + (2j / hb) * np.einsum(
        "ablr,a,blr...->...", LEVI_CIVITA_LOWER, n, PT_up
    )
    ax = (
        -(2.0 / hb) * np.einsum("mabl,a,bl...->m...", eps_mixed, n, PV_up)
        + (2j * m / hb) * np.einsum("m,...->m...", n, c.pseudoscalar)
        + transport(D.axial)
    )

    PS_up = _raise(P.scalar)
    nP = np.einsum("m,n...->mn...", n, PS_up)
    nV = np.einsum("m,n...->mn...", n, c.vector)
    # (n^mu D_a - n_a D^mu) W^{nu a}; Dt[op, nu, a]
    Dt = D.tensor
    first = np.einsum("m,n...->mn...", n, np.einsum("ana...->n...", Dt))
    second = _raise(np.einsum("a,mna...->mn...", nl, Dt))  # n_a D^mu W^{nu a} -> [mu, nu]
    grad = first - second
    ten = (
        (nP - np.swapaxes(nP, 0, 1)) / hb
        - (m / hb) * (nV - np.swapaxes(nV, 0, 1))
        + (1j / hb) * np.einsum("mnab,a,b...->mn...", LEVI_CIVITA, nl, P.pseudoscalar)
        + grad
        - np.swapaxes(grad, 0, 1)
    )
    return WignerChannels(s, vec, ps, ax, ten).pack()


def _split_op(X: np.ndarray, h: Hyperplane) -> SplitChannels:
    ch = _unpack_op(X)
    # split acts on channel indices; move the operator index to the end
    moved = WignerChannels(
        np.moveaxis(ch.scalar, 0, -1),
        np.moveaxis(ch.vector, 0, -1),
        np.moveaxis(ch.pseudoscalar, 0, -1),
        np.moveaxis(ch.axial, 0, -1),
        np.moveaxis(ch.tensor, 0, -1),
    )
    sp = split_channels(moved, h)
    return SplitChannels(*(np.moveaxis(a, -1, 0) for a in sp.astuple()))


def rhs_split_channels(sc: SplitChannels, Ds: SplitChannels, Ps: SplitChannels, h: Hyperplane, mass=1.0, hbar=1.0) -> SplitChannels:
    """The eight longitudinal/transverse equations.

    ``Ds``/``Ps`` carry the operator index first (lower), e.g. ``Ds.U[mu, a]``
    is ``D_perp_mu U^a``.
    """
    n, nl = h.n, h.n_lower
    m, hb = mass, hbar
    eps_mixed = LEVI_CIVITA_MIXED

    d_scalar = -(4.0 / hb) * np.einsum("aa...->...", Ps.U)
    d_par = -np.einsum("aa...->...", Ds.perp)
    d_perp = (
        _raise(Ds.par)
        - (2.0 / hb) * np.einsum("mabl,a,bl...->m...", eps_mixed, n, _raise(Ps.axial_perp))
        - (4.0 * m / hb) * sc.U
    )
    d_ps = (2j * m / hb) * sc.axial_par + (2j / hb) * np.einsum(
        "ablr,a,blr...->...", LEVI_CIVITA_LOWER, n, _raise(Ps.tensor_perp)
    )
    d_axpar = (2j * m / hb) * sc.pseudoscalar - np.einsum("aa...->...", Ds.axial_perp)
    d_axperp = -(2.0 / hb) * np.einsum("mabl,a,bl...->m...", eps_mixed, n, _raise(Ps.perp)) + _raise(Ds.axial_par)
    d_U = -(1.0 / hb) * _raise(Ps.scalar) + (m / hb) * sc.perp - np.einsum("ama...->m...", Ds.tensor_perp)
    DU_up = _raise(Ds.U)  # [mu_op_up, nu]
    d_tperp = (
        (1j / hb) * np.einsum("mnab,a,b...->mn...", LEVI_CIVITA, nl, Ps.pseudoscalar)
        - DU_up
        + np.swapaxes(DU_up, 0, 1)
    )
    return SplitChannels(d_scalar, d_par, d_perp, d_ps, d_axpar, d_axperp, d_U, d_tperp)


def rhs_split(C, DX, PX, h: Hyperplane, mass: float = 1.0, hbar: float = 1.0) -> np.ndarray:
    """Packed-array front end to :func:`rhs_split_channels`."""
    sc = split_channels(WignerChannels.unpack(np.asarray(C)), h)
    out = rhs_split_channels(sc, _split_op(DX, h), _split_op(PX, h), h, mass, hbar)
    return out.unsplit(h).pack()


def local_P(C: np.ndarray, p_perp: np.ndarray) -> np.ndarray:
    """``P_mu C = p_perp_mu C`` with ``p_perp`` upper, shape ``(4, ...)`` broadcastable to ``C[0]``."""
    pl = np.einsum("mn,n...->m...", METRIC, p_perp)
    return pl[:, None] * np.asarray(C)[None]


# ------------------------------------------------------------- instant-frame matrix form


def bgr_rhs(Wt, grad_x, grad_p, E, B, p, mass=1.0, e=-1.0, hbar=1.0):
    """``d_t W~`` of the instant-frame matrix equation for ``W~ = W gamma^0``.

    ``d_t W~ = -e E.d_p W~ - (i m/hbar)[beta, W~] - 1/2 D.{alpha, W~} - (i/hbar) p.[alpha, W~]``
    with ``D = grad_x + e B x d_p``.  ``grad_x[i]`` and ``grad_p[i]`` are the
    ordinary derivatives ``d/dx^i`` and ``d/dp^i`` of ``W~`` (shape ``(3, 4, 4, ...)``).
    """
    Wt = np.asarray(Wt)
    E = np.asarray(E, dtype=float)
    B = np.asarray(B, dtype=float)
    p = np.asarray(p, dtype=float)
    BxDp = np.stack(
        [
            B[1] * grad_p[2] - B[2] * grad_p[1],
            B[2] * grad_p[0] - B[0] * grad_p[2],
            B[0] * grad_p[1] - B[1] * grad_p[0],
        ]
    )
    Dvec = grad_x + e * BxDp
    out = -e * np.einsum("i,i...->...", E, grad_p)
    out = out - (1j * mass / hbar) * (np.einsum("ab,bc...->ac...", BETA, Wt) - np.einsum("ab...,bc->ac...", Wt, BETA))
    for i in range(3):
        aW = np.einsum("ab,bc...->ac...", ALPHA[i], Dvec[i])
        Wa = np.einsum("ab...,bc->ac...", Dvec[i], ALPHA[i])
        out = out - 0.5 * (aW + Wa)
        aW = np.einsum("ab,bc...->ac...", ALPHA[i], Wt)
        Wa = np.einsum("ab...,bc->ac...", Wt, ALPHA[i])
        out = out - (1j / hbar) * p[i] * (aW - Wa)
    return out
