"""Classic RK4 time stepping of the channel equations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..fields import Tabulated1D
from ..wigner import WignerState, check_boundary
from .diagnostics import polarization_current
from .operators import KineticOperators, sample_points

SCENARIOS = ("homogeneous-E(t)", "uniform-B", "1D-selfconsistent", "prescribed")
CFL_FACTOR = 0.25
# classic RK4 is stable on the imaginary axis up to |lambda dt| = 2*sqrt(2)
RK4_OSCILLATION_LIMIT = 2.5


class CFLError(ValueError):
    pass


class NumericalAbort(RuntimeError):
    pass


@dataclass
class EvolutionConfig:
    dt: float
    t_end: float
    scenario: str = "prescribed"
    boundary_every: int = 0  # 0 disables the momentum-cutoff monitor
    boundary_threshold: float = 1e-6
    store_every: int = 0  # 0 keeps no history
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


def max_force(state: WignerState, ops: KineticOperators, t0: float, t1: float, samples: int = 65) -> float:
    """Largest ``|e F|`` entry seen by the grid over ``[t0, t1]``."""
    if ops.field is None:
        return 0.0
    peak = 0.0
    for t in np.linspace(t0, t1, samples):
        F = ops.field.tensor(sample_points(state, t))
        peak = max(peak, float(np.max(np.abs(F), initial=0.0)))
    return abs(ops.e) * peak


def check_cfl(state: WignerState, ops: KineticOperators, cfg: EvolutionConfig) -> dict:
    """Enforce ``dt <= 0.25 min(dp/|eF|, dx)`` and RK4 stability of the mass oscillation."""
    spacings = [state.momentum.spacing(j) for j in state.momentum.active]
    limits = {}
    force = max_force(state, ops, state.t, state.t + cfg.t_end)
    if force > 0 and spacings:
        limits["momentum"] = CFL_FACTOR * min(spacings) / force
    if not state.space.homogeneous:
        limits["space"] = CFL_FACTOR * state.space.dz
    pmax2 = sum(float(np.max(a**2)) for a in state.momentum.axes)
    eps_max = np.sqrt(ops.mass**2 + pmax2)
    limits["oscillation"] = RK4_OSCILLATION_LIMIT * ops.hbar / (2.0 * eps_max)
    for name, lim in limits.items():
        if cfg.dt > lim * (1 + 1e-12):
            raise CFLError(f"dt = {cfg.dt:g} exceeds the {name} bound {lim:.6g}")
    return limits


def _guard(data: np.ndarray, t: float) -> None:
    if not np.all(np.isfinite(data)):
        raise NumericalAbort(f"non-finite channel values at t = {t:g}")


def step(state: WignerState, ops: KineticOperators, cfg: EvolutionConfig) -> WignerState:
    """Advance one RK4 step of size ``cfg.dt`` with a prescribed field."""
    dt, t = cfg.dt, state.t
    y = state.data
    k1 = ops.rhs(state, y, t)
    k2 = ops.rhs(state, y + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = ops.rhs(state, y + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = ops.rhs(state, y + dt * k3, t + dt)
    out = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    _guard(out, t + dt)
    return state.with_data(out, t + dt)


def step_selfconsistent(state: WignerState, ez: np.ndarray, ops: KineticOperators, cfg: EvolutionConfig):
    """RK4 step of channels and ``E_z(z)`` together, ``dE_z/dt = -j_z``."""
    if not state.hyperplane.is_instant:
        raise ValueError("the self-consistent field is defined in the instant frame")
    base = ops.field if isinstance(ops.field, Tabulated1D) else Tabulated1D(state.space.z, ez, True, state.space.length)

    def f(y, e_vals, t):
        o = KineticOperators(base.with_values(e_vals), ops.e, ops.mass, ops.hbar, ops.hbar2, ops.form)
        dy = o.rhs(state, y, t)
        jz = polarization_current(state.with_data(y), ops.e)[3].real
        return dy, -jz

    dt, t = cfg.dt, state.t
    y = state.data
    k1 = f(y, ez, t)
    k2 = f(y + 0.5 * dt * k1[0], ez + 0.5 * dt * k1[1], t + 0.5 * dt)
    k3 = f(y + 0.5 * dt * k2[0], ez + 0.5 * dt * k2[1], t + 0.5 * dt)
    k4 = f(y + dt * k3[0], ez + dt * k3[1], t + dt)
    y_new = y + (dt / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    e_new = ez + (dt / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    _guard(y_new, t + dt)
    return state.with_data(y_new, t + dt), e_new


def evolve(
    state: WignerState,
    ops: KineticOperators,
    cfg: EvolutionConfig,
    callback: Callable[[int, WignerState], None] | None = None,
    ez: np.ndarray | None = None,
) -> tuple[WignerState, list[WignerState]]:
    """Run ``cfg.n_steps`` steps; returns the final state and the stored history.

    ``history[0]`` is the initial state when ``cfg.store_every > 0``.  In the
    ``1D-selfconsistent`` scenario the latest ``E_z(z)`` is kept in
    ``cfg.extra["ez"]``.
    """
    check_cfl(state, ops, cfg)
    history = [state] if cfg.store_every else []
    if callback:
        callback(0, state)
    selfc = cfg.scenario == "1D-selfconsistent"
    if selfc and ez is None:
        ez = np.zeros(state.space.nz)
    for k in range(1, cfg.n_steps + 1):
        if selfc:
            state, ez = step_selfconsistent(state, ez, ops, cfg)
            cfg.extra["ez"] = ez
        else:
            state = step(state, ops, cfg)
        if cfg.boundary_every and k % cfg.boundary_every == 0:
            check_boundary(state, cfg.boundary_threshold)
        if cfg.store_every and k % cfg.store_every == 0:
            history.append(state)
        if callback:
            callback(k, state)
    return state, history
