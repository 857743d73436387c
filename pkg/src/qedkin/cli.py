"""Batch scenario runner.

Usage::

    qedkin run CONFIG [-o OUTDIR]
    qedkin verify
    qedkin version

A config is an INI-style file (``[section]`` headers, ``key = value`` lines,
``#`` or ``;`` comments).  See :data:`SCHEMA` for the accepted keys.  Exit
codes: 0 success, 1 identity check failed, 2 configuration error,
3 numerical abort, 4 I/O error.

``QEDKIN_NUM_THREADS`` caps the BLAS/OpenMP thread pools; it has to be
applied before numpy loads, hence the environment handling at import time.
"""

from __future__ import annotations

import os

_threads = os.environ.get("QEDKIN_NUM_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse  # noqa: E402
import configparser  # noqa: E402
import json  # noqa: E402
import re  # noqa: E402
import sys  # noqa: E402
import time  # noqa: E402
from dataclasses import dataclass, field  # noqa: E402
from pathlib import Path  # noqa: E402

import numpy as np  # noqa: E402

from . import __version__  # noqa: E402
from .clifford import verify_channel_identities  # noqa: E402
from .fields import FieldConfig, HomogeneousE, PlaneWave, Tabulated1D, UniformField  # noqa: E402
from .qkin import (  # noqa: E402
    DIAGNOSTIC_COLUMNS,
    CFLError,
    EvolutionConfig,
    KineticOperators,
    NumericalAbort,
    density_matrix_oracle,
    diagnostics_row,
    evolve,
    free_state,
    gaussian,
    random_conforming_lattice,
    vacuum,
)
from .vlasov import (  # noqa: E402
    VLASOV_COLUMNS,
    DistributionState,
    DomainError,
    SLInfo,
    cold_pair_plasma,
    ensemble_current,
    evolve_semilagrangian,
    push_characteristics,
    sample_ensemble,
    write_distribution_snapshot,
)
from .vlasov import diagnostics_row as vlasov_row  # noqa: E402
from .wigner import CHANNEL_NAMES, BoundaryError, MomentumGrid, SpatialGrid, WignerState, wigner_transform, write_snapshot  # noqa: E402

MODES = ("qkin-homogeneous", "qkin-1d", "vlasov-1d", "vlasov-ensemble", "verify-algebra", "oracle-compare")
FIELD_KINDS = ("none", "uniform", "homogeneous-E", "plane-wave", "tabulated", "self-consistent")
STATE_KINDS = ("vacuum", "free", "lattice", "pair-plasma")
ENSEMBLE_COLUMNS = ("t", "Q", "Jx", "Jy", "Jz", "kinetic_energy")
IDENTITY_TOL = 1e-13

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3, 4


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def _vec(n):
    def parse(text: str):
        parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
        if len(parts) != n:
            raise ValueError(f"expected {n} comma-separated numbers")
        return tuple(float(p) for p in parts)

    parse.__name__ = f"vector{n}"
    return parse


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true/false")


def _choice(options):
    def parse(text: str):
        t = text.strip()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return t

    parse.__name__ = "choice"
    return parse


def _positive(kind):
    def parse(text: str):
        v = kind(text)
        if v <= 0:
            raise ValueError("must be positive")
        return v

    parse.__name__ = f"positive {kind.__name__}"
    return parse


_vec3, _vec4 = _vec(3), _vec(4)
_pos_float, _pos_int = _positive(float), _positive(int)


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise ValueError("must be non-negative")
    return v


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return v


# section -> key -> (parser, default); a default of ... marks a key some modes require
SCHEMA: dict[str, dict[str, tuple]] = {
    "run": {"mode": (_choice(MODES), ...), "seed": (_seed, 0), "output": (str, "qedkin-out")},
    "physics": {
        "hbar": (_pos_float, 1.0),
        "e": (float, -1.0),
        "mass": (_pos_float, 1.0),
        "hbar2": (_bool, False),
        "form": (_choice(("split", "covariant")), "split"),
    },
    "grid": {
        "nz": (_pos_int, 1),
        "length": (_pos_float, 1.0),
        **{f"p{a}_max": (_pos_float, 1.0) for a in "xyz"},
        **{f"p{a}_points": (_pos_int, 1) for a in "xyz"},
        **{f"p{a}": (float, 0.0) for a in "xy"},
    },
    "field": {
        "kind": (_choice(FIELD_KINDS), "none"),
        "E": (_vec3, (0.0, 0.0, 0.0)),
        "B": (_vec3, (0.0, 0.0, 0.0)),
        "amplitude": (float, 0.0),
        "profile": (_choice(("constant", "sin2", "sauter")), "constant"),
        "duration": (_pos_float, 1.0),
        "direction": (_vec3, (0.0, 0.0, 1.0)),
        "potential_amplitude": (_vec4, (0.0, 0.0, 0.0, 0.0)),
        "wavevector": (_vec4, (0.0, 0.0, 0.0, 0.0)),
        "file": (str, ""),
        "periodic": (_bool, True),
        "l_em": (_pos_float, None),
    },
    "state": {
        "kind": (_choice(STATE_KINDS), "vacuum"),
        "electron_center": (_vec3, (0.0, 0.0, 0.0)),
        "electron_width": (_pos_float, 0.5),
        "electron_amplitude": (float, 0.0),
        "positron_center": (_vec3, (0.0, 0.0, 0.0)),
        "positron_width": (_pos_float, 0.5),
        "positron_amplitude": (float, 0.0),
        "modulation": (float, 0.0),
        "mode": (_pos_int, 1),
        "sites": (_pos_int, 16),
        "states": (_pos_int, 3),
        "density": (_pos_float, 1.0),
        "width": (_pos_float, 0.01),
        "drift": (float, 0.0),
        "particles": (_pos_int, 1000),
    },
    "time": {
        "dt": (_pos_float, ...),
        "t_end": (float, ...),
        "diagnostics_every": (_pos_int, 1),
        "snapshot_every": (_nonneg_int, 0),
        "boundary_every": (_nonneg_int, 0),
        "oracle_dt": (_pos_float, 0.005),
    },
    "output": {"snapshots": (_bool, True), "probe_index": (int, -1)},
}
_NEEDS_TIME = {"qkin-homogeneous", "qkin-1d", "vlasov-1d", "vlasov-ensemble", "oracle-compare"}


@dataclass
class ScenarioConfig:
    """Validated configuration.  ``values[section][key]`` holds parsed values;
    ``lines`` maps ``(section, key)`` to the source line."""

    path: Path
    values: dict[str, dict[str, object]]
    lines: dict[tuple[str, str], int] = field(default_factory=dict)
    text: str = ""

    def __getitem__(self, item):
        return self.values[item]

    @property
    def mode(self) -> str:
        return self.values["run"]["mode"]

    def line(self, section: str, key: str | None = None) -> int | None:
        return self.lines.get((section, key.lower() if key else None)) or self.lines.get((section, None))

    def error(self, section: str, key: str | None, message: str) -> ConfigError:
        return ConfigError(f"[{section}] {key + ': ' if key else ''}{message}", self.line(section, key))


_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^([^\s=:#;][^=:]*?)\s*[=:]")


def _line_index(text: str) -> dict[tuple[str, str | None], int]:
    index: dict[tuple[str, str | None], int] = {}
    section = None
    for no, raw in enumerate(text.splitlines(), 1):
        m = _SECTION_RE.match(raw)
        if m:
            section = m.group(1).strip()
            index.setdefault((section, None), no)
            continue
        m = _KEY_RE.match(raw)
        if m and section is not None:
            index.setdefault((section, m.group(1).strip().lower()), no)
    return index


def parse_config(text: str, path: Path | str = "<string>") -> ScenarioConfig:
    """Parse and validate config text; raises :class:`ConfigError` with a line number."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text, source=str(path))
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("text before the first [section] header", exc.lineno) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigError(exc.message.split(": ", 1)[-1], exc.lineno) from None
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line (expected 'key = value')", line) from None

    lines = _line_index(text)
    values: dict[str, dict[str, object]] = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]", lines.get((section, None)))
    for section, keys in SCHEMA.items():
        lower = {k.lower(): k for k in keys}
        got = parser[section] if parser.has_section(section) else {}
        out: dict[str, object] = {}
        for raw_key, raw in got.items():
            if raw_key not in lower:
                raise ConfigError(f"[{section}] unknown key {raw_key!r}", lines.get((section, raw_key)))
            key = lower[raw_key]
            conv = keys[key][0]
            try:
                out[key] = conv(raw)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}", lines.get((section, raw_key))) from None
        for key, (_, default) in keys.items():
            out.setdefault(key, default)
        values[section] = out

    cfg = ScenarioConfig(Path(path), values, lines, text)
    _validate(cfg)
    return cfg


def _validate(cfg: ScenarioConfig) -> None:
    run, grid, fld, st, tm = cfg["run"], cfg["grid"], cfg["field"], cfg["state"], cfg["time"]
    mode = run["mode"]
    if mode is ...:
        raise cfg.error("run", None, "missing required key 'mode'")
    if mode in _NEEDS_TIME:
        for key in ("dt", "t_end"):
            if tm[key] is ...:
                raise cfg.error("time", None, f"mode {mode} requires '{key}'")
        if tm["t_end"] < 0:
            raise cfg.error("time", "t_end", "must be non-negative")
    if mode == "qkin-homogeneous" and grid["nz"] != 1:
        raise cfg.error("grid", "nz", "qkin-homogeneous requires nz = 1")
    if mode == "qkin-1d" and grid["nz"] < 4 and st["kind"] != "lattice":
        raise cfg.error("grid", "nz", "qkin-1d requires nz >= 4")
    if mode in ("qkin-1d", "oracle-compare") and st["kind"] == "lattice" and st["sites"] % 2:
        raise cfg.error("state", "sites", "lattice needs an even number of sites")
    if mode == "oracle-compare":
        if st["kind"] != "lattice":
            raise cfg.error("state", "kind", "oracle-compare needs kind = lattice")
        if fld["kind"] not in ("none", "uniform", "homogeneous-E", "plane-wave"):
            raise cfg.error("field", "kind", "oracle-compare needs a field with a potential")
    if mode.startswith("vlasov") and st["kind"] not in ("free", "pair-plasma", "vacuum"):
        raise cfg.error("state", "kind", f"{mode} needs a free or pair-plasma state")
    if mode == "vlasov-ensemble" and fld["kind"] == "self-consistent":
        raise cfg.error("field", "kind", "the ensemble pusher takes prescribed fields only")
    if st["kind"] == "pair-plasma" and (grid["px_points"] != 1 or grid["py_points"] != 1):
        raise cfg.error("state", "kind", "pair-plasma runs on a p_z line (px_points = py_points = 1)")
    if fld["kind"] == "tabulated" and not fld["file"]:
        raise cfg.error("field", "file", "tabulated field requires 'file'")
    if fld["kind"] == "self-consistent" and mode not in ("qkin-1d", "vlasov-1d"):
        raise cfg.error("field", "kind", "self-consistent fields need qkin-1d or vlasov-1d")
    if fld["kind"] == "plane-wave" and not any(fld["wavevector"]):
        raise cfg.error("field", "wavevector", "plane-wave requires a nonzero wavevector")


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text, path)


# ---------------------------------------------------------------- construction


def build_grids(cfg: ScenarioConfig) -> tuple[SpatialGrid, MomentumGrid]:
    g = cfg["grid"]
    axes = []
    for a in "xyz":
        n = g[f"p{a}_points"]
        if n == 1:
            axes.append(np.array([g.get(f"p{a}", 0.0)]))
        else:
            axes.append(np.linspace(-g[f"p{a}_max"], g[f"p{a}_max"], n))
    return SpatialGrid(g["nz"], g["length"]), MomentumGrid(*axes)


def build_field(cfg: ScenarioConfig, space: SpatialGrid | None = None) -> FieldConfig | None:
    f = cfg["field"]
    kind = f["kind"]
    if kind in ("none", "self-consistent"):
        return None
    if kind == "uniform":
        out = UniformField(f["E"], f["B"])
    elif kind == "homogeneous-E":
        out = HomogeneousE(f["amplitude"], f["profile"], f["duration"], f["direction"])
    elif kind == "plane-wave":
        try:
            out = PlaneWave(f["potential_amplitude"], f["wavevector"])
        except ValueError as exc:
            raise cfg.error("field", "wavevector", str(exc)) from None
    else:
        src = Path(f["file"])
        if not src.is_absolute():
            src = cfg.path.parent / src
        try:
            table = np.loadtxt(src, delimiter=",", comments="#", ndmin=2)
        except OSError as exc:
            raise OSError(f"cannot read field table {src}: {exc.strerror}") from exc
        except ValueError as exc:
            raise cfg.error("field", "file", f"unreadable table: {exc}") from None
        if table.shape[1] != 2:
            raise cfg.error("field", "file", "table needs two columns: z, E_z")
        try:
            out = Tabulated1D(table[:, 0], table[:, 1], f["periodic"], space.length if space and f["periodic"] else None)
        except ValueError as exc:
            raise cfg.error("field", "file", str(exc)) from None
    if f["l_em"] is not None:
        out.l_em = f["l_em"]
    return out


def _free_distributions(cfg: ScenarioConfig):
    s = cfg["state"]
    L = cfg["grid"]["length"]
    mod, k = s["modulation"], s["mode"]

    def with_modulation(g):
        return lambda z, px, py, pz: g(z, px, py, pz) * (1.0 + mod * np.cos(2 * np.pi * k * z / L))

    fe = with_modulation(gaussian(s["electron_center"], s["electron_width"], s["electron_amplitude"]))
    fp = with_modulation(gaussian(s["positron_center"], s["positron_width"], s["positron_amplitude"]))
    return fe, fp


def build_wigner_state(cfg: ScenarioConfig, rng: np.random.Generator) -> WignerState:
    space, momentum = build_grids(cfg)
    phys = cfg["physics"]
    kind = cfg["state"]["kind"]
    if kind == "vacuum":
        return vacuum(space, momentum, phys["hbar"])
    if kind == "free":
        fe, fp = _free_distributions(cfg)
        return free_state(space, momentum, fe, fp, phys["mass"], phys["hbar"])
    if kind == "lattice":
        rho = build_lattice(cfg, rng)
        return wigner_transform(rho, build_field(cfg), e=phys["e"], hbar=phys["hbar"])
    raise cfg.error("state", "kind", "pair-plasma is a quasi-classical state; use a vlasov mode")


def build_lattice(cfg: ScenarioConfig, rng: np.random.Generator):
    s = cfg["state"]
    try:
        return random_conforming_lattice(s["sites"], cfg["grid"]["length"], rng, s["states"])
    except ValueError as exc:
        raise cfg.error("state", "sites", str(exc)) from None


def build_distribution(cfg: ScenarioConfig) -> DistributionState:
    space, momentum = build_grids(cfg)
    phys, s = cfg["physics"], cfg["state"]
    if s["kind"] == "pair-plasma":
        return cold_pair_plasma(space, momentum, s["density"], s["width"], s["drift"], s["mode"], phys["mass"], phys["hbar"])
    shape = (space.nz,) + momentum.shape
    if s["kind"] == "vacuum":
        w = wb = np.zeros(shape)
    else:
        fe, fp = _free_distributions(cfg)
        z = space.z.reshape(-1, 1, 1, 1)
        q = momentum.mesh()
        w = np.broadcast_to(2.0 * fe(z, *q), shape).copy()
        wb = np.broadcast_to(2.0 * fp(z, *q), shape).copy()
    return DistributionState(w, wb, space, momentum, hbar=phys["hbar"], mass=phys["mass"])


# ---------------------------------------------------------------- output


def _csv_header(cfg: ScenarioConfig, columns, extra: dict | None = None) -> str:
    lines = [
        f"qedkin {__version__}",
        f"mode = {cfg.mode}",
        f"seed = {cfg['run']['seed']}",
    ]
    for k, v in (extra or {}).items():
        lines.append(f"{k} = {v}")
    lines.append("columns: " + ",".join(columns))
    return "\n".join(lines)


def write_table(path: Path, rows, columns, header: str) -> None:
    arr = np.asarray(rows, dtype=float).reshape(-1, len(columns))
    np.savetxt(path, arr, delimiter=",", fmt="%.17g", header=header, comments="# ")


# ---------------------------------------------------------------- modes


def _kinetic_operators(cfg: ScenarioConfig, fld) -> KineticOperators:
    p = cfg["physics"]
    return KineticOperators(fld, p["e"], p["mass"], p["hbar"], p["hbar2"], p["form"])


def _scenario(cfg: ScenarioConfig, fld) -> str:
    kind = cfg["field"]["kind"]
    if kind == "self-consistent":
        return "1D-selfconsistent"
    if kind == "homogeneous-E":
        return "homogeneous-E(t)"
    if isinstance(fld, UniformField) and fld.kind == "uniform-B":
        return "uniform-B"
    return "prescribed"


def run_qkin(cfg: ScenarioConfig, out: Path, rng: np.random.Generator) -> dict:
    state = build_wigner_state(cfg, rng)
    fld = build_field(cfg, state.space)
    ops = _kinetic_operators(cfg, fld)
    tm, e = cfg["time"], cfg["physics"]["e"]
    ecfg = EvolutionConfig(tm["dt"], tm["t_end"], _scenario(cfg, fld), tm["boundary_every"])
    snap_every = tm["snapshot_every"]
    snapshots = cfg["output"]["snapshots"]
    rows = []

    def callback(k: int, s: WignerState) -> None:
        last = k == ecfg.n_steps
        if k % tm["diagnostics_every"] == 0 or last:
            o = ops
            if ecfg.scenario == "1D-selfconsistent":
                ez = ecfg.extra.get("ez", np.zeros(s.space.nz))
                o = _kinetic_operators(cfg, Tabulated1D(s.space.z, ez, True, s.space.length))
            rows.append(diagnostics_row(s, e, o.rhs(s, s.data, s.t)))
        if snapshots and ((snap_every and k % snap_every == 0) or last):
            write_snapshot(out / f"snapshot_{k:06d}.qkws", s)

    try:
        final, _ = evolve(state, ops, ecfg, callback)
    except CFLError as exc:
        raise cfg.error("time", "dt", str(exc)) from None
    write_table(out / "diagnostics.csv", rows, DIAGNOSTIC_COLUMNS, _csv_header(cfg, DIAGNOSTIC_COLUMNS))
    return {"steps": ecfg.n_steps, "final_t": final.t}


def run_vlasov_grid(cfg: ScenarioConfig, out: Path, rng: np.random.Generator) -> dict:
    state = build_distribution(cfg)
    fld = build_field(cfg, state.space)
    tm, e = cfg["time"], cfg["physics"]["e"]
    dt, n = tm["dt"], int(round(tm["t_end"] / tm["dt"]))
    selfc = cfg["field"]["kind"] == "self-consistent"
    ez = np.zeros(state.space.nz) if selfc else None
    probe = cfg["output"]["probe_index"]
    probe = state.space.nz // 4 if probe < 0 else probe
    if probe >= state.space.nz:
        raise cfg.error("output", "probe_index", f"must be below nz = {state.space.nz}")
    columns = VLASOV_COLUMNS + ("ez_probe",)
    info = SLInfo()
    rows = []
    snap_every, snapshots = tm["snapshot_every"], cfg["output"]["snapshots"]

    def record(k: int) -> None:
        row = vlasov_row(state, e, ez, info.clipped_mass)
        rows.append(row + [0.0 if ez is None else float(ez[probe])])
        if snapshots and ((snap_every and k % snap_every == 0) or k == n):
            write_distribution_snapshot(out / f"snapshot_{k:06d}.qkws", state)

    record(0)
    for k in range(1, n + 1):
        state = evolve_semilagrangian(state, fld, dt, e, ez=ez, info=info)
        if selfc:
            ez = info.ez
        if not np.all(np.isfinite(state.w)) or not np.all(np.isfinite(state.wbar)):
            raise NumericalAbort(f"non-finite distribution at t = {state.t:g}")
        if k % tm["diagnostics_every"] == 0 or k == n:
            record(k)
    extra = {"probe_z": repr(float(state.space.z[probe]))}
    write_table(out / "diagnostics.csv", rows, columns, _csv_header(cfg, columns, extra))
    return {"steps": n, "final_t": state.t, "clipped_mass": info.clipped_mass}


def run_ensemble(cfg: ScenarioConfig, out: Path, rng: np.random.Generator) -> dict:
    state = build_distribution(cfg)
    fld = build_field(cfg, state.space)
    tm, phys = cfg["time"], cfg["physics"]
    ens = sample_ensemble(state, cfg["state"]["particles"], rng)
    dt, n = tm["dt"], int(round(tm["t_end"] / tm["dt"]))
    rows = []

    def record(en) -> None:
        kin = float(np.sum(en.weight * (en.energy(phys["mass"]) - phys["mass"])))
        rows.append([en.t, *ensemble_current(en, phys["e"], phys["mass"]), kin])

    record(ens)
    for k in range(1, n + 1):
        ens = push_characteristics(ens, fld, dt, phys["e"], phys["mass"])
        if not (np.all(np.isfinite(ens.x)) and np.all(np.isfinite(ens.p))):
            raise NumericalAbort(f"non-finite particle data at t = {ens.t:g}")
        if k % tm["diagnostics_every"] == 0 or k == n:
            record(ens)
    write_table(out / "diagnostics.csv", rows, ENSEMBLE_COLUMNS, _csv_header(cfg, ENSEMBLE_COLUMNS))
    if cfg["output"]["snapshots"]:
        np.savetxt(
            out / "particles.csv",
            np.column_stack([ens.x, ens.p, ens.weight, ens.species]),
            delimiter=",",
            fmt="%.17g",
            header="columns: x,y,z,px,py,pz,weight,species",
            comments="# ",
        )
    return {"steps": n, "final_t": ens.t, "particles": int(ens.x.shape[0])}


def identity_report() -> dict[str, float]:
    return verify_channel_identities()


def run_verify(cfg: ScenarioConfig | None, out: Path | None) -> tuple[dict, bool]:
    report = identity_report()
    ok = all(v < IDENTITY_TOL for v in report.values())
    if out is not None:
        with open(out / "identities.csv", "w") as fh:
            fh.write(f"# qedkin {__version__}\n# tolerance = {IDENTITY_TOL!r}\n# columns: identity,max_residual,pass\n")
            for name, val in report.items():
                fh.write(f"{name},{val:.17g},{int(val < IDENTITY_TOL)}\n")
    return {"identities": len(report), "max_residual": max(report.values()), "passed": ok}, ok


def run_oracle(cfg: ScenarioConfig, out: Path, rng: np.random.Generator) -> dict:
    phys, tm = cfg["physics"], cfg["time"]
    rho = build_lattice(cfg, rng)
    fld = build_field(cfg)
    ref = density_matrix_oracle(rho, fld, tm["t_end"], phys["e"], phys["mass"], phys["hbar"], tm["oracle_dt"])
    start = wigner_transform(rho, fld, e=phys["e"], hbar=phys["hbar"])
    ops = _kinetic_operators(cfg, fld)
    try:
        final, _ = evolve(start, ops, EvolutionConfig(tm["dt"], tm["t_end"], _scenario(cfg, fld)))
    except CFLError as exc:
        raise cfg.error("time", "dt", str(exc)) from None
    scale = np.abs(ref.data).max(axis=(1, 2, 3, 4))
    diff = np.abs(final.data - ref.data).max(axis=(1, 2, 3, 4))
    rel = np.where(scale > 0, diff / np.where(scale > 0, scale, 1.0), diff)
    header = _csv_header(cfg, ("channel", "max_abs", "max_rel_error"))
    with open(out / "oracle_errors.csv", "w") as fh:
        fh.write("".join(f"# {line}\n" for line in header.splitlines()))
        for name, s, r in zip(CHANNEL_NAMES, scale, rel):
            fh.write(f"{name},{s:.17g},{r:.17g}\n")
    return {"max_rel_error": float(rel.max()), "sites": rho.n_sites}


RUNNERS = {
    "qkin-homogeneous": run_qkin,
    "qkin-1d": run_qkin,
    "vlasov-1d": run_vlasov_grid,
    "vlasov-ensemble": run_ensemble,
    "oracle-compare": run_oracle,
}


def run(config_path, output: str | None = None) -> int:
    """Execute one scenario; returns the process exit code."""
    t0 = time.perf_counter()
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        print(f"{config_path}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    out = Path(output or cfg["run"]["output"])
    summary: dict = {}
    code = EXIT_OK
    try:
        out.mkdir(parents=True, exist_ok=True)
        rng = np.random.default_rng(cfg["run"]["seed"])
        if cfg.mode == "verify-algebra":
            summary, ok = run_verify(cfg, out)
            code = EXIT_OK if ok else EXIT_CHECK
        else:
            summary = RUNNERS[cfg.mode](cfg, out, rng)
        manifest = {
            "version": __version__,
            "mode": cfg.mode,
            "seed": cfg["run"]["seed"],
            "config_path": str(cfg.path),
            "config": cfg.text,
            "wall_time_s": time.perf_counter() - t0,
            "started": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "summary": summary,
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=float) + "\n")
    except ConfigError as exc:
        print(f"{config_path}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalAbort, DomainError, BoundaryError, FloatingPointError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(json.dumps(summary, default=float))
    return code


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="qedkin", description="Mean-field QED kinetic scenarios.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the scenario described by a config file")
    p_run.add_argument("config")
    p_run.add_argument("-o", "--output", help="output directory (overrides [run] output)")
    sub.add_parser("verify", help="check the Dirac-algebra identity table")
    sub.add_parser("version", help="print the package version")
    args = parser.parse_args(argv)

    if args.command == "version":
        print(__version__)
        return EXIT_OK
    if args.command == "verify":
        summary, ok = run_verify(None, None)
        print(f"{summary['identities']} identities, max residual {summary['max_residual']:.3e}: {'ok' if ok else 'FAILED'}")
        return EXIT_OK if ok else EXIT_CHECK
    return run(args.config, args.output)


if __name__ == "__main__":
    sys.exit(main())
