"""Initial Wigner-channel states and per-mode linear algebra."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..clifford import ALPHA, BETA, decompose
from ..geometry import Hyperplane
from ..wigner import MomentumGrid, SpatialGrid, WignerState
from .equations import local_P, rhs_split

Distribution = Callable[..., np.ndarray]


def vacuum(space: SpatialGrid, momentum: MomentumGrid, hbar: float = 1.0, h: Hyperplane | None = None) -> WignerState:
    """All channels zero (the vacuum-subtracted vacuum)."""
    return WignerState.zeros(space, momentum, hyperplane=h or Hyperplane.instant(), hbar=hbar)


def free_projectors(p: np.ndarray, mass: float = 1.0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Energy projectors ``Lambda_+-(p) = (eps +- H)/(2 eps)``, ``H = alpha.p + beta m``.

    ``p`` has shape ``(3, ...)``; returns ``(Lambda_+, Lambda_-, eps)`` with the
    matrices shaped ``(4, 4, ...)``.
    """
    p = np.asarray(p, dtype=float)
    eps = np.sqrt(mass**2 + np.sum(p**2, axis=0))
    H = np.einsum("iab,i...->ab...", ALPHA, p) + mass * np.einsum("ab,...->ab...", BETA, np.ones_like(eps))
    eye = np.einsum("ab,...->ab...", np.eye(4), eps)
    return (eye + H) / (2 * eps), (eye - H) / (2 * eps), eps


def free_state(
    space: SpatialGrid,
    momentum: MomentumGrid,
    f: Distribution,
    fbar: Distribution | None = None,
    mass: float = 1.0,
    hbar: float = 1.0,
    t: float = 0.0,
) -> WignerState:
    """Free electron/positron gas: ``W~ = f(p) Lambda_+(p) - fbar(-p) Lambda_-(p)``, ``W = W~ gamma^0``.

    ``f(z, px, py, pz)`` and ``fbar`` are occupation densities per spin state
    (broadcasting over a ``(nz, npx, npy, npz)`` mesh).  The resulting
    distributions are ``w = 2 f`` and ``w_bar = 2 fbar``.  Instant frame only.
    """
    q = momentum.mesh()[:, None]  # (3, 1, npx, npy, npz)
    z = space.z.reshape(-1, 1, 1, 1)
    lp, lm, _ = free_projectors(q, mass)
    fp = np.broadcast_to(f(z, q[0], q[1], q[2]), (space.nz,) + momentum.shape)
    if fbar is None:
        fm = np.zeros_like(fp)
    else:
        fm = np.broadcast_to(fbar(z, -q[0], -q[1], -q[2]), fp.shape)
    Wt = lp * fp - lm * fm
    W = np.einsum("ab...,bc->ac...", Wt, BETA)
    return WignerState(decompose(W).pack(), space, momentum, Hyperplane.instant(t), hbar, t)


def gaussian(center=(0.0, 0.0, 0.0), width: float = 0.5, amplitude: float = 1.0) -> Distribution:
    """Isotropic Gaussian occupation ``amplitude * exp(-|p - center|^2 / (2 width^2))``."""
    c = np.asarray(center, dtype=float)

    def f(z, px, py, pz):
        r2 = (px - c[0]) ** 2 + (py - c[1]) ** 2 + (pz - c[2]) ** 2
        return amplitude * np.exp(-0.5 * r2 / width**2) + 0.0 * z

    return f


def free_mode_matrix(q, mass: float = 1.0, hbar: float = 1.0, h: Hyperplane | None = None) -> np.ndarray:
    """16x16 matrix ``M`` of ``d_tau C = M C`` for a homogeneous free mode at momentum ``q``.

    ``q`` are the components of ``p_perp`` along the hyperplane's transverse basis.
    """
    h = h or Hyperplane.instant()
    p_perp = np.einsum("im,i->m", h.transverse_basis(), np.asarray(q, dtype=float))
    eye = np.eye(16, dtype=complex)
    DX = np.zeros((4, 16, 16), complex)
    return rhs_split(eye, DX, local_P(eye, p_perp[:, None]), h, mass, hbar)
