"""Prescribed and self-consistent mean electromagnetic fields.

Units are natural (hbar = c = 1 unless hbar is passed explicitly, fermion
mass 1).  Field tensors are returned with upper indices,
``F^{mu nu} = d^mu A^nu - d^nu A^mu``; in the lab frame ``E^i = F_{0i}``
(so ``F^{0i} = -E^i``) and ``F^{ij} = -eps^{ijk} B^k``.

Positions are four-vectors ``x = (t, x, y, z)`` with the Lorentz index on the
leading axis; any trailing axes are broadcast.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .clifford import METRIC
from .geometry import Hyperplane

_EPS3 = np.zeros((3, 3, 3))
_EPS3[0, 1, 2] = _EPS3[1, 2, 0] = _EPS3[2, 0, 1] = 1.0
_EPS3[0, 2, 1] = _EPS3[2, 1, 0] = _EPS3[1, 0, 2] = -1.0

# 4th-order central first-derivative stencil
_D1_OFFSETS = (-2, -1, 1, 2)
_D1_WEIGHTS = (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)


def tensor_from_EB(E: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Contravariant ``F^{mu nu}`` from lab-frame 3-vectors (leading axis 3)."""
    E = np.asarray(E, dtype=float)
    B = np.asarray(B, dtype=float)
    shape = np.broadcast_shapes(E.shape[1:], B.shape[1:])
    F = np.zeros((4, 4) + shape)
    F[0, 1:] = -E
    F[1:, 0] = E
    F[1:, 1:] = -np.einsum("ijk,k...->ij...", _EPS3, np.broadcast_to(B, (3,) + shape))
    return F


@dataclass
class FieldSample:
    """Field tensor (upper indices) at one or many space-time points.

    ``F_perp`` is filled in when the sample was taken relative to a hyperplane.
    """

    F: np.ndarray
    F_perp: np.ndarray | None = None

    @property
    def F_lower(self) -> np.ndarray:
        return np.einsum("ma,nb,ab...->mn...", METRIC, METRIC, self.F)

    @property
    def E(self) -> np.ndarray:
        return self.F_lower[0, 1:]

    @property
    def B(self) -> np.ndarray:
        return -0.5 * np.einsum("ijk,ij...->k...", _EPS3, self.F[1:, 1:])


def transverse_tensor(sample: FieldSample | np.ndarray, h: Hyperplane) -> np.ndarray:
    """``F_perp^{mu nu} = Delta^mu_a Delta^nu_b F^{ab}`` (upper indices)."""
    F = sample.F if isinstance(sample, FieldSample) else np.asarray(sample)
    D = h.projector
    return np.einsum("ma,nb,ab...->mn...", D, D, F)


class FieldConfig(ABC):
    """A mean field given through its potential and/or tensor.

    ``l_em`` is the characteristic variation length used by
    :func:`validity_ratio`; ``None`` means "not configured".
    """

    kind: str = "generic"
    l_em: float | None = None

    def potential(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} does not provide a potential")

    @abstractmethod
    def tensor(self, x: np.ndarray) -> np.ndarray:
        """``F^{mu nu}(x)`` with shape ``(4, 4) + x.shape[1:]``."""

    def field_tensor(self, x: np.ndarray, h: Hyperplane | None = None) -> FieldSample:
        F = self.tensor(np.asarray(x, dtype=float))
        return FieldSample(F, None if h is None else transverse_tensor(F, h))

    def tensor_gradient(self, x: np.ndarray, order: int = 1, h: float = 1e-2) -> np.ndarray:
        """``d_{a1} ... d_{ak} F^{mu nu}`` (lower derivative indices first).

        Generic fallback: nested 4th-order central differences of :meth:`tensor`.
        """
        x = np.asarray(x, dtype=float)
        if order == 0:
            return self.tensor(x)
        out = []
        for a in range(4):
            acc = 0.0
            for off, wgt in zip(_D1_OFFSETS, _D1_WEIGHTS):
                xs = x.copy()
                xs[a] = xs[a] + off * h
                acc = acc + wgt * self.tensor_gradient(xs, order - 1, h)
            out.append(acc / h)
        return np.stack(out)

    def is_homogeneous(self) -> bool:
        return False


class UniformField(FieldConfig):
    """Constant E and B; potential ``A^0 = -E.r``, ``A = (B x r)/2``."""

    def __init__(self, E=(0.0, 0.0, 0.0), B=(0.0, 0.0, 0.0)):
        self.E = np.asarray(E, dtype=float).reshape(3)
        self.B = np.asarray(B, dtype=float).reshape(3)
        self.kind = "uniform-B" if np.any(self.B) and not np.any(self.E) else "uniform-E"
        self.l_em = math.inf
        self._F = tensor_from_EB(self.E, self.B)

    def potential(self, x):
        x = np.asarray(x, dtype=float)
        r = x[1:]
        A = np.empty_like(x)
        A[0] = -np.einsum("i,i...->...", self.E, r)
        A[1:] = 0.5 * np.einsum("ijk,j,k...->i...", _EPS3, self.B, r)
        return A

    def tensor(self, x):
        x = np.asarray(x)
        return np.broadcast_to(self._F.reshape((4, 4) + (1,) * (x.ndim - 1)), (4, 4) + x.shape[1:]).copy()

    def tensor_gradient(self, x, order=1, h=None):
        x = np.asarray(x)
        if order == 0:
            return self.tensor(x)
        return np.zeros((4,) * order + (4, 4) + x.shape[1:])

    def is_homogeneous(self):
        return True


class PlaneWave(FieldConfig):
    """``A^mu = a^mu cos(k.x)`` with ``k.a = 0``."""

    kind = "plane-wave"

    def __init__(self, amplitude, wavevector):
        self.a = np.asarray(amplitude, dtype=float).reshape(4)
        self.k = np.asarray(wavevector, dtype=float).reshape(4)
        if abs(self.k @ METRIC @ self.a) > 1e-12 * max(1.0, np.abs(self.k).max() * np.abs(self.a).max()):
            raise ValueError("plane wave requires k.a = 0 (Lorenz gauge)")
        kspatial = float(np.linalg.norm(self.k[1:]))
        self.l_em = 2.0 * math.pi / kspatial if kspatial > 0 else math.inf

    def _phase(self, x):
        return np.einsum("m,m...->...", METRIC @ self.k, np.asarray(x, dtype=float))

    def potential(self, x):
        return np.einsum("m,...->m...", self.a, np.cos(self._phase(x)))

    def tensor(self, x):
        kw = np.outer(self.k, self.a) - np.outer(self.a, self.k)
        return -np.einsum("mn,...->mn...", kw, np.sin(self._phase(x)))

    def tensor_gradient(self, x, order=1, h=None):
        # d_a sin(k.x) = k_a cos(k.x); repeated derivatives cycle sin -> cos -> -sin -> -cos
        phase = self._phase(x)
        cycle = (np.sin, np.cos, lambda u: -np.sin(u), lambda u: -np.cos(u))
        kl = METRIC @ self.k
        kw = np.outer(self.k, self.a) - np.outer(self.a, self.k)
        coeff = kw
        for _ in range(order):
            coeff = np.multiply.outer(kl, coeff)
        return -np.multiply.outer(coeff, cycle[order % 4](phase))


class HomogeneousE(FieldConfig):
    """Spatially homogeneous, time-dependent electric field along ``direction``.

    Temporal gauge: ``A^0 = 0``, ``A(t) = -direction * integral_0^t E``.
    Profiles: ``constant`` (E0), ``sin2`` (``E0 sin^2(pi t / T)`` on ``[0, T]``,
    zero outside) and ``sauter`` (``E0 / cosh^2(t / T)``).
    """

    kind = "homogeneous-E-of-t"

    def __init__(self, amplitude: float, profile: str = "constant", duration: float = 1.0, direction=(0.0, 0.0, 1.0)):
        if profile not in ("constant", "sin2", "sauter"):
            raise ValueError(f"unknown field profile {profile!r}")
        if duration <= 0:
            raise ValueError("duration must be positive")
        self.E0 = float(amplitude)
        self.profile = profile
        self.duration = float(duration)
        d = np.asarray(direction, dtype=float).reshape(3)
        self.direction = d / np.linalg.norm(d)
        self.l_em = math.inf

    def efield(self, t):
        t = np.asarray(t, dtype=float)
        T = self.duration
        if self.profile == "constant":
            return self.E0 * np.ones_like(t)
        if self.profile == "sin2":
            return np.where((t >= 0) & (t <= T), self.E0 * np.sin(np.pi * t / T) ** 2, 0.0)
        return self.E0 / np.cosh(t / T) ** 2

    def efield_integral(self, t):
        """``integral_0^t E(t') dt'``."""
        t = np.asarray(t, dtype=float)
        T = self.duration
        if self.profile == "constant":
            return self.E0 * t
        if self.profile == "sin2":
            tc = np.clip(t, 0.0, T)
            return self.E0 * (tc / 2 - T * np.sin(2 * np.pi * tc / T) / (4 * np.pi))
        return self.E0 * T * np.tanh(t / T)

    def potential(self, x):
        x = np.asarray(x, dtype=float)
        A = np.zeros_like(x)
        A[1:] = -np.einsum("i,...->i...", self.direction, self.efield_integral(x[0]))
        return A

    def tensor(self, x):
        x = np.asarray(x, dtype=float)
        E = np.einsum("i,...->i...", self.direction, self.efield(x[0]))
        return tensor_from_EB(E, np.zeros_like(E))

    def tensor_gradient(self, x, order=1, h=1e-3):
        x = np.asarray(x, dtype=float)
        if order == 0:
            return self.tensor(x)
        out = np.zeros((4,) * order + (4, 4) + x.shape[1:])
        # only time derivatives are nonzero
        dt = super().tensor_gradient(x, order, h)
        idx = (0,) * order
        out[idx] = dt[idx]
        return out

    def is_homogeneous(self):
        return True


class Tabulated1D(FieldConfig):
    """Longitudinal field ``E_z(z)`` from a table, optionally periodic.

    Off-grid values use cubic-spline interpolation; derivatives use
    4th-order central differences of the interpolant with the table spacing.
    Instances are immutable: the self-consistent update produces a new
    snapshot through :meth:`with_values`.
    """

    kind = "tabulated-1D"

    def __init__(self, z, values, periodic: bool = True, length: float | None = None, l_em: float | None = None):
        z = np.asarray(z, dtype=float)
        values = np.asarray(values, dtype=float)
        if z.ndim != 1 or z.shape != values.shape or z.size < 4:
            raise ValueError("tabulated field needs matching 1D arrays with at least 4 points")
        self.z = z
        self.values = values
        self.periodic = periodic
        self.dz = float(z[1] - z[0])
        self.length = float(length) if length is not None else (z.size * self.dz if periodic else float(z[-1] - z[0]))
        self.l_em = l_em
        if periodic:
            self._spline = CubicSpline(np.append(z, z[0] + self.length), np.append(values, values[0]), bc_type="periodic")
        else:
            self._spline = CubicSpline(z, values)

    def with_values(self, values) -> "Tabulated1D":
        return Tabulated1D(self.z, values, self.periodic, self.length, self.l_em)

    def ez(self, zq) -> np.ndarray:
        zq = np.asarray(zq, dtype=float)
        if self.periodic:
            zq = self.z[0] + np.mod(zq - self.z[0], self.length)
        else:
            lo, hi = self.z[0], self.z[-1]
            if np.any(zq < lo - 1e-12) or np.any(zq > hi + 1e-12):
                raise ValueError(f"position outside tabulated domain [{lo}, {hi}]")
        return self._spline(zq)

    def ez_derivative(self, zq, order: int) -> np.ndarray:
        if order == 0:
            return self.ez(zq)
        h = self.dz
        zq = np.asarray(zq, dtype=float)
        if not self.periodic:
            margin = 2 * h * order
            zq_c = np.clip(zq, self.z[0] + margin, self.z[-1] - margin)
            if np.any(np.abs(zq_c - zq) > 0):
                raise ValueError("derivative stencil leaves the tabulated domain")
        return sum(w * self.ez_derivative(zq + o * h, order - 1) for o, w in zip(_D1_OFFSETS, _D1_WEIGHTS)) / h

    def tensor(self, x):
        x = np.asarray(x, dtype=float)
        ez = self.ez(x[3])
        E = np.zeros((3,) + ez.shape)
        E[2] = ez
        return tensor_from_EB(E, np.zeros_like(E))

    def tensor_gradient(self, x, order=1, h=None):
        x = np.asarray(x, dtype=float)
        if order == 0:
            return self.tensor(x)
        out = np.zeros((4,) * order + (4, 4) + x.shape[1:])
        d = self.ez_derivative(x[3], order)
        idx = (3,) * order
        out[idx + (0, 3)] = -d
        out[idx + (3, 0)] = d
        return out


class PotentialField(FieldConfig):
    """Field from an arbitrary potential callable; tensor by central differences."""

    def __init__(self, potential: Callable[[np.ndarray], np.ndarray], h: float = 1e-3, l_em: float | None = None, kind: str = "generic"):
        self._potential = potential
        self.h = h
        self.l_em = l_em
        self.kind = kind

    def potential(self, x):
        return np.asarray(self._potential(np.asarray(x, dtype=float)), dtype=float)

    def potential_gradient(self, x):
        """``d_mu A^nu`` (derivative index first, lower)."""
        x = np.asarray(x, dtype=float)
        out = []
        for a in range(4):
            acc = 0.0
            for off, wgt in zip(_D1_OFFSETS, _D1_WEIGHTS):
                xs = x.copy()
                xs[a] = xs[a] + off * self.h
                acc = acc + wgt * self.potential(xs)
            out.append(acc / self.h)
        return np.stack(out)

    def tensor(self, x):
        return field_tensor_from_potential(self, x, self.h)


def field_tensor_from_potential(cfg: FieldConfig, x: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """``F^{mu nu}`` by 4th-order central differences of ``cfg.potential``."""
    x = np.asarray(x, dtype=float)
    grads = []
    for a in range(4):
        acc = 0.0
        for off, wgt in zip(_D1_OFFSETS, _D1_WEIGHTS):
            xs = x.copy()
            xs[a] = xs[a] + off * h
            acc = acc + wgt * cfg.potential(xs)
        grads.append(acc / h)
    dA = np.stack(grads)  # d_a A^nu
    dA_up = np.einsum("ma,an...->mn...", METRIC, dA)  # d^mu A^nu
    return dA_up - np.swapaxes(dA_up, 0, 1)


class GaugeTransformed(FieldConfig):
    """``A'^mu = A^mu + d^mu chi``; the tensor is that of the base field."""

    def __init__(self, base: FieldConfig, chi: Callable, chi_gradient: Callable | None = None, h: float = 1e-3):
        self.base = base
        self.chi = chi
        self.chi_gradient = chi_gradient
        self.h = h
        self.kind = base.kind
        self.l_em = base.l_em

    def _dchi_lower(self, x):
        if self.chi_gradient is not None:
            return np.asarray(self.chi_gradient(x), dtype=float)
        out = []
        for a in range(4):
            acc = 0.0
            for off, wgt in zip(_D1_OFFSETS, _D1_WEIGHTS):
                xs = x.copy()
                xs[a] = xs[a] + off * self.h
                acc = acc + wgt * np.asarray(self.chi(xs), dtype=float)
            out.append(acc / self.h)
        return np.stack(out)

    def potential(self, x):
        x = np.asarray(x, dtype=float)
        return self.base.potential(x) + np.einsum("mn,n...->m...", METRIC, self._dchi_lower(x))

    def tensor(self, x):
        return self.base.tensor(x)

    def tensor_gradient(self, x, order=1, h=1e-2):
        return self.base.tensor_gradient(x, order, h)

    def is_homogeneous(self):
        return self.base.is_homogeneous()


def field_tensor(cfg: FieldConfig, x: np.ndarray, h: Hyperplane | None = None) -> FieldSample:
    return cfg.field_tensor(x, h)


def gauge_transform(cfg: FieldConfig, chi: Callable, chi_gradient: Callable | None = None) -> GaugeTransformed:
    return GaugeTransformed(cfg, chi, chi_gradient)


def de_broglie_length(momentum_magnitude: np.ndarray, weights: np.ndarray, hbar: float = 1.0) -> float:
    """Mean de Broglie length ``2 pi hbar / p_rms`` of a weighted momentum sample."""
    w = np.abs(np.asarray(weights, dtype=float))
    p2 = float(np.sum(w * np.asarray(momentum_magnitude, dtype=float) ** 2) / np.sum(w))
    if p2 <= 0:
        return math.inf
    return 2.0 * math.pi * hbar / math.sqrt(p2)


def validity_ratio(cfg: FieldConfig, de_broglie: float) -> float:
    """``lambda_B / l_EM``; the local-field approximation wants this well below 0.1."""
    if de_broglie <= 0:
        raise ValueError("de Broglie length must be positive")
    if cfg.l_em is None:
        raise ValueError(f"field {cfg.kind!r} has no l_em configured")
    if cfg.l_em <= 0:
        raise ValueError("l_em must be positive")
    if math.isinf(cfg.l_em):
        return 0.0
    return de_broglie / cfg.l_em
