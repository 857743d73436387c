"""Space-like hyperplanes, longitudinal/transverse splittings and boosts.

A hyperplane is fixed by a unit time-like normal ``n`` (``n.n = 1``,
``n^0 > 0``) and the invariant time ``tau = n.x``.  Every four-vector splits
as ``V = n (n.V) + V_perp`` with the projector
``Delta^mu_nu = delta^mu_nu - n^mu n_nu``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clifford import GAMMA, METRIC, SIGMA_BAR

UNIT_NORM_TOL = 1e-9


def minkowski_dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``g_{mu nu} a^mu b^nu`` over the leading axis."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]


@dataclass(frozen=True)
class Hyperplane:
    n: np.ndarray
    tau: float = 0.0

    def __post_init__(self):
        n = np.asarray(self.n, dtype=float).reshape(4)
        norm = float(minkowski_dot(n, n))
        if n[0] <= 0.0:
            raise ValueError(f"hyperplane normal must be future-oriented, got n^0 = {n[0]}")
        if abs(norm - 1.0) > UNIT_NORM_TOL:
            raise ValueError(f"hyperplane normal must satisfy n.n = 1 (got {norm:.12g})")
        object.__setattr__(self, "n", n)

    @classmethod
    def instant(cls, tau: float = 0.0) -> "Hyperplane":
        return cls(np.array([1.0, 0.0, 0.0, 0.0]), tau)

    @classmethod
    def from_rapidity(cls, rapidity: float, direction=(1.0, 0.0, 0.0), tau: float = 0.0) -> "Hyperplane":
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        return cls(np.concatenate([[np.cosh(rapidity)], np.sinh(rapidity) * d]), tau)

    @property
    def n_lower(self) -> np.ndarray:
        return METRIC @ self.n

    @property
    def projector(self) -> np.ndarray:
        """``Delta^mu_nu`` as a 4x4 array (row: upper index)."""
        return np.eye(4) - np.outer(self.n, self.n_lower)

    @property
    def is_instant(self) -> bool:
        return bool(np.allclose(self.n, [1.0, 0.0, 0.0, 0.0], atol=1e-14))

    def transverse_basis(self) -> np.ndarray:
        """Three orthonormal space-like vectors ``e_i`` spanning the hyperplane.

        They are the images of the lab unit vectors under the inverse of
        :func:`boost_to_instant`, so ``e_i . e_j = -delta_ij`` and ``n.e_i = 0``.
        """
        inv = boost_to_instant(self).inverse
        return inv[:, 1:].T.copy()


def longitudinal(V: np.ndarray, h: Hyperplane) -> np.ndarray:
    """``V_par = n.V``."""
    return minkowski_dot(h.n, V)


def transverse(V: np.ndarray, h: Hyperplane) -> np.ndarray:
    """``V_perp^mu = Delta^mu_nu V^nu``."""
    return np.einsum("mn,n...->m...", h.projector, np.asarray(V))


def gamma_split(h: Hyperplane) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(gamma_par, gamma_perp)`` with ``gamma_par = n_mu gamma^mu``."""
    g_par = np.einsum("m,mab->ab", h.n_lower, GAMMA)
    g_perp = np.einsum("mn,nab->mab", h.projector, GAMMA)
    return g_par, g_perp


def s_matrices(h: Hyperplane) -> np.ndarray:
    """``S^mu = sigma_bar^{mu nu} n_nu``; shape ``(4, 4, 4)``."""
    return np.einsum("mnab,n->mab", SIGMA_BAR, h.n_lower)


@dataclass(frozen=True)
class BoostMap:
    """Proper orthochronous Lorentz matrix ``Lambda^mu_nu`` with cached inverse."""

    matrix: np.ndarray
    inverse: np.ndarray = field(repr=False)

    def vector(self, V: np.ndarray) -> np.ndarray:
        """Transform contravariant index(es) on the leading axis."""
        return np.einsum("mn,n...->m...", self.matrix, V)

    def covector(self, V: np.ndarray) -> np.ndarray:
        """Transform a covariant leading index: ``V'_mu = V_nu (Lambda^-1)^nu_mu``."""
        return np.einsum("nm,n...->m...", self.inverse, V)

    def tensor2(self, T: np.ndarray) -> np.ndarray:
        """Transform a rank-2 contravariant tensor on the two leading axes."""
        return np.einsum("ma,nb,ab...->mn...", self.matrix, self.matrix, T)

    def compose(self, other: "BoostMap") -> "BoostMap":
        """``self o other`` (apply ``other`` first)."""
        return BoostMap(self.matrix @ other.matrix, other.inverse @ self.inverse)

    def invert(self) -> "BoostMap":
        return BoostMap(self.inverse, self.matrix)

    def hyperplane(self, h: Hyperplane) -> Hyperplane:
        """Image of a hyperplane; ``tau`` is invariant."""
        return Hyperplane(self.matrix @ h.n, h.tau)


def pure_boost(velocity: np.ndarray) -> BoostMap:
    """Standard boost into the frame moving with 3-velocity ``velocity`` (c = 1)."""
    beta = np.asarray(velocity, dtype=float).reshape(3)
    b2 = float(beta @ beta)
    if b2 >= 1.0:
        raise ValueError("boost velocity must satisfy |v| < 1")

    def build(b):
        g = 1.0 / np.sqrt(1.0 - b2)
        L = np.empty((4, 4))
        L[0, 0] = g
        L[0, 1:] = -g * b
        L[1:, 0] = -g * b
        outer = np.outer(b, b)
        L[1:, 1:] = np.eye(3) + ((g - 1.0) / b2 * outer if b2 > 0 else 0.0)
        return L

    return BoostMap(build(beta), build(-beta))


def boost_to_instant(h: Hyperplane) -> BoostMap:
    """Pure boost ``Lambda`` with ``Lambda n = (1, 0, 0, 0)``."""
    n = np.asarray(h.n, dtype=float)
    if minkowski_dot(n, n) <= 0.0 or n[0] <= 0.0:
        raise ValueError("normal must be future time-like")
    return pure_boost(n[1:] / n[0])
