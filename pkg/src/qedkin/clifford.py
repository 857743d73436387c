"""Numeric Dirac algebra in the standard (Dirac) representation.

Conventions
-----------
Metric ``g = diag(+1, -1, -1, -1)``, Levi-Civita ``eps^{0123} = +1`` (so
``eps_{0123} = -1``), ``gamma5 = i gamma^0 gamma^1 gamma^2 gamma^3`` and
``sigma_bar^{mu nu} = (i/2) [gamma^mu, gamma^nu]``.  In the Dirac
representation::

    gamma^0 = beta = [[1, 0], [0, -1]]      gamma^k = [[0, s_k], [-s_k, 0]]
    alpha^k = gamma^0 gamma^k = [[0, s_k], [s_k, 0]]
    gamma5  = [[0, 1], [1, 0]]

with ``s_k`` the Pauli matrices.

A 4x4 spinor matrix ``W`` is expanded as::

    W = (1/4) (I S + gamma_mu V^mu + gamma5 P + gamma5 gamma_mu A^mu
               + sigma_bar_{mu nu} T^{mu nu})

and the channels are recovered by traces, ``S = tr W``, ``V^mu = tr(gamma^mu W)``,
``P = tr(gamma5 W)``, ``A^mu = tr(gamma^mu gamma5 W)``,
``T^{mu nu} = tr(sigma_bar^{mu nu} W) / 2``.  All channel vectors carry upper
indices; the lowered gamma in the expansion is what makes the pair an exact
inverse (``tr(gamma^mu gamma_nu) = 4 delta^mu_nu``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])

_I2 = np.eye(2, dtype=complex)
_Z2 = np.zeros((2, 2), dtype=complex)
PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

IDENTITY = np.eye(4, dtype=complex)

# gamma^mu, upper index
GAMMA = np.array(
    [np.block([[_I2, _Z2], [_Z2, -_I2]])]
    + [np.block([[_Z2, s], [-s, _Z2]]) for s in PAULI]
)
GAMMA5 = 1j * GAMMA[0] @ GAMMA[1] @ GAMMA[2] @ GAMMA[3]
BETA = GAMMA[0]
ALPHA = np.array([BETA @ GAMMA[k] for k in (1, 2, 3)])

# gamma_mu, lower index
GAMMA_LOWER = np.einsum("mn,nab->mab", METRIC, GAMMA)

SIGMA_BAR = 0.5j * (
    np.einsum("mab,nbc->mnac", GAMMA, GAMMA) - np.einsum("nab,mbc->mnac", GAMMA, GAMMA)
)
SIGMA_BAR_LOWER = np.einsum("mi,nj,ijab->mnab", METRIC, METRIC, SIGMA_BAR)

# (mu, nu) pairs for packed antisymmetric storage
TENSOR_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def _levi_civita() -> np.ndarray:
    eps = np.zeros((4, 4, 4, 4))
    for perm in itertools.permutations(range(4)):
        inversions = sum(1 for i, j in itertools.combinations(perm, 2) if i > j)
        eps[perm] = -1.0 if inversions % 2 else 1.0
    return eps


LEVI_CIVITA = _levi_civita()
LEVI_CIVITA_LOWER = np.einsum("abcd,ai,bj,ck,dl->ijkl", LEVI_CIVITA, METRIC, METRIC, METRIC, METRIC)
# eps^mu_{alpha beta lambda}: first index up, rest down
LEVI_CIVITA_MIXED = np.einsum("mi,iabc->mabc", METRIC, LEVI_CIVITA_LOWER)


def _check_index(*indices: int) -> None:
    for i in indices:
        if not (isinstance(i, (int, np.integer)) and 0 <= i <= 3):
            raise IndexError(f"Lorentz index must be in 0..3, got {i!r}")


def gamma(mu: int) -> np.ndarray:
    """Return a copy of ``gamma^mu``."""
    _check_index(mu)
    return GAMMA[mu].copy()


def gamma5() -> np.ndarray:
    return GAMMA5.copy()


def sigma_bar(mu: int, nu: int) -> np.ndarray:
    """Return ``sigma_bar^{mu nu} = (i/2)[gamma^mu, gamma^nu]``."""
    _check_index(mu, nu)
    return SIGMA_BAR[mu, nu].copy()


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def lower(vector: np.ndarray) -> np.ndarray:
    """Lower the leading Lorentz index of an array of shape ``(4, ...)``."""
    return np.einsum("mn,n...->m...", METRIC, vector)


raise_index = lower  # the metric is its own inverse


@dataclass
class WignerChannels:
    """The sixteen spinor channels of a 4x4 matrix field.

    Every attribute may carry trailing grid axes (``...``); ``vector`` and
    ``axial`` have a leading Lorentz axis of length 4 and ``tensor`` two
    leading axes (full antisymmetric storage, upper indices).
    """

    scalar: np.ndarray
    vector: np.ndarray
    pseudoscalar: np.ndarray
    axial: np.ndarray
    tensor: np.ndarray

    @classmethod
    def zeros(cls, shape: tuple[int, ...] = (), dtype=complex) -> "WignerChannels":
        return cls(
            np.zeros(shape, dtype),
            np.zeros((4,) + shape, dtype),
            np.zeros(shape, dtype),
            np.zeros((4,) + shape, dtype),
            np.zeros((4, 4) + shape, dtype),
        )

    def __add__(self, other: "WignerChannels") -> "WignerChannels":
        return WignerChannels(*(a + b for a, b in zip(self.astuple(), other.astuple())))

    def __sub__(self, other: "WignerChannels") -> "WignerChannels":
        return WignerChannels(*(a - b for a, b in zip(self.astuple(), other.astuple())))

    def __mul__(self, factor) -> "WignerChannels":
        return WignerChannels(*(factor * a for a in self.astuple()))

    __rmul__ = __mul__

    def astuple(self) -> tuple[np.ndarray, ...]:
        return (self.scalar, self.vector, self.pseudoscalar, self.axial, self.tensor)

    def pack(self) -> np.ndarray:
        """Stack into the canonical 16-component layout, channel axis first.

        Order: S, V^0..V^3, P, A^0..A^3, T^{01}, T^{02}, T^{03}, T^{12}, T^{13}, T^{23}.
        """
        t = self.tensor
        return np.stack(
            [self.scalar, *self.vector, self.pseudoscalar, *self.axial]
            + [t[i, j] for i, j in TENSOR_PAIRS]
        )

    @classmethod
    def unpack(cls, packed: np.ndarray) -> "WignerChannels":
        packed = np.asarray(packed)
        if packed.shape[0] != 16:
            raise ValueError(f"packed channel axis must have length 16, got {packed.shape[0]}")
        tensor = np.zeros((4, 4) + packed.shape[1:], dtype=packed.dtype)
        for k, (i, j) in enumerate(TENSOR_PAIRS):
            tensor[i, j] = packed[10 + k]
            tensor[j, i] = -packed[10 + k]
        return cls(packed[0], packed[1:5], packed[5], packed[6:10], tensor)

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(a), initial=0.0)) for a in self.astuple())


def decompose(W: np.ndarray) -> WignerChannels:
    """Trace projections of ``W`` (shape ``(4, 4, ...)``) onto the Clifford basis."""
    W = np.asarray(W, dtype=complex)
    return WignerChannels(
        scalar=np.einsum("aa...->...", W),
        vector=np.einsum("mab,ba...->m...", GAMMA, W),
        pseudoscalar=np.einsum("ab,ba...->...", GAMMA5, W),
        axial=np.einsum("mab,bc,ca...->m...", GAMMA, GAMMA5, W),
        tensor=0.5 * np.einsum("mnab,ba...->mn...", SIGMA_BAR, W),
    )


def assemble(channels: WignerChannels, atol: float = 1e-12) -> np.ndarray:
    """Inverse of :func:`decompose`; returns ``W`` with shape ``(4, 4, ...)``."""
    t = np.asarray(channels.tensor)
    asym = np.max(np.abs(t + np.swapaxes(t, 0, 1)), initial=0.0)
    scale = max(1.0, float(np.max(np.abs(t), initial=0.0)))
    if asym > atol * scale:
        raise ValueError(f"tensor channel is not antisymmetric (residual {asym:.3e})")
    g5g = np.einsum("ab,mbc->mac", GAMMA5, GAMMA_LOWER)
    W = (
        np.einsum("ab,...->ab...", IDENTITY, channels.scalar)
        + np.einsum("mab,m...->ab...", GAMMA_LOWER, channels.vector)
        + np.einsum("ab,...->ab...", GAMMA5, channels.pseudoscalar)
        + np.einsum("mab,m...->ab...", g5g, channels.axial)
        + np.einsum("mnab,mn...->ab...", SIGMA_BAR_LOWER, t)
    )
    return 0.25 * W


def _identity_table(gammas: np.ndarray):
    """Yield ``(name, lhs, rhs)`` for every relation of the channel algebra table."""
    g = METRIC
    GAMMA = gammas
    gl = np.einsum("mn,nab->mab", METRIC, gammas)
    SIGMA_BAR = 0.5j * (
        np.einsum("mab,nbc->mnac", gammas, gammas) - np.einsum("nab,mbc->mnac", gammas, gammas)
    )
    sl = np.einsum("mi,nj,ijab->mnab", METRIC, METRIC, SIGMA_BAR)
    g5 = 1j * gammas[0] @ gammas[1] @ gammas[2] @ gammas[3]
    eps = LEVI_CIVITA_LOWER
    C, A = commutator, anticommutator
    g5_up = np.einsum("ab,xbc->xac", g5, GAMMA)  # gamma5 gamma^alpha
    r4 = range(4)

    for mu, nu in itertools.product(r4, r4):
        yield "clifford {g^mu,g^nu}=2g^{mu nu}", A(GAMMA[mu], GAMMA[nu]), 2 * g[mu, nu] * IDENTITY
        yield "[g_mu,g_nu]=-2i s_{mu nu}", C(gl[mu], gl[nu]), -2j * sl[mu, nu]
        yield "[g_mu,g5 g_nu]=-2g_{mu nu} g5", C(gl[mu], g5 @ gl[nu]), -2 * g[mu, nu] * g5
        yield "[s_{mu nu},I]=0", C(sl[mu, nu], IDENTITY), 0 * IDENTITY
        yield "[s_{mu nu},g5]=0", C(sl[mu, nu], g5), 0 * IDENTITY
        yield "{s_{mu nu},I}=2s_{mu nu}", A(sl[mu, nu], IDENTITY), 2 * sl[mu, nu]
        yield (
            "{s_{mu nu},g5}=i eps s^{..}",
            A(sl[mu, nu], g5),
            1j * np.einsum("xy,xyab->ab", eps[mu, nu], SIGMA_BAR),
        )
    for mu in r4:
        yield "[g_mu,I]=0", C(gl[mu], IDENTITY), 0 * IDENTITY
        yield "[g_mu,g5]=-2g5 g_mu", C(gl[mu], g5), -2 * g5 @ gl[mu]
        yield "{g5,g^mu}=0", A(g5, GAMMA[mu]), 0 * IDENTITY
    yield "g5^2=I", g5 @ g5, IDENTITY
    for mu, nu, a in itertools.product(r4, r4, r4):
        yield (
            "[s_{mu nu},g5 g_a]",
            C(sl[mu, nu], g5 @ gl[a]),
            2j * (g[nu, a] * g5 @ gl[mu] - g[mu, a] * g5 @ gl[nu]),
        )
        yield (
            "{s_{mu nu},g_a}=2eps g5 g^alpha",
            A(sl[mu, nu], gl[a]),
            2 * np.einsum("x,xab->ab", eps[mu, nu, a], g5_up),
        )
        yield (
            "{s_{mu nu},g5 g_a}=2eps g^alpha",
            A(sl[mu, nu], g5 @ gl[a]),
            2 * np.einsum("x,xab->ab", eps[mu, nu, a], GAMMA),
        )
        yield (
            "[g_mu,s_{nu a}]",
            C(gl[mu], sl[nu, a]),
            2j * (g[mu, nu] * gl[a] - g[mu, a] * gl[nu]),
        )
    for mu, nu, a, b in itertools.product(r4, r4, r4, r4):
        yield (
            "[s_{mu nu},s_{a b}]",
            C(sl[mu, nu], sl[a, b]),
            -2j * (g[mu, a] * sl[nu, b] + g[nu, b] * sl[mu, a] - g[mu, b] * sl[nu, a] - g[nu, a] * sl[mu, b]),
        )
        yield (
            "{s_{mu nu},s_{a b}}",
            A(sl[mu, nu], sl[a, b]),
            2 * (g[mu, a] * g[nu, b] - g[mu, b] * g[nu, a]) * IDENTITY + 2j * eps[mu, nu, a, b] * g5,
        )


def verify_channel_identities(unitary: np.ndarray | None = None) -> dict[str, float]:
    """Evaluate every commutator/anticommutator relation over all index values.

    Returns the maximum elementwise residual ``|lhs - rhs|`` per identity.  If
    ``unitary`` is given, the relations are checked for the conjugated
    representation ``U gamma^mu U^dagger`` instead.
    """
    gammas = GAMMA
    if unitary is not None:
        U = np.asarray(unitary, dtype=complex)
        gammas = np.einsum("ab,mbc,dc->mad", U, GAMMA, U.conj())
    report: dict[str, float] = {}
    for name, lhs, rhs in _identity_table(gammas):
        report[name] = max(report.get(name, 0.0), float(np.max(np.abs(lhs - rhs))))
    return report
