import json
from pathlib import Path

import numpy as np
import pytest

from qedkin import __version__
from qedkin.cli import ConfigError, main, parse_config
from qedkin.wigner import read_snapshot

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

HOMOGENEOUS = """\
[run]
mode = qkin-homogeneous
seed = 5
[physics]
hbar = 1.0
[grid]
pz_max = 4.0
pz_points = 41
[field]
kind = homogeneous-E
amplitude = 0.3
profile = sin2
duration = 1.0
[state]
kind = free
electron_center = 0, 0, 0.3
electron_width = 0.5
electron_amplitude = 0.5
[time]
dt = 0.02
t_end = 0.4
diagnostics_every = 5
snapshot_every = 10
"""

VLASOV = """\
[run]
mode = vlasov-1d
[grid]
nz = 8
length = 6.283185307179586
pz_max = 3.0
pz_points = 31
[state]
kind = free
electron_center = 0, 0, 0.5
electron_width = 0.3
electron_amplitude = 1.0
modulation = 0.2
[time]
dt = 0.1
t_end = 0.5
"""

ENSEMBLE = """\
[run]
mode = vlasov-ensemble
seed = {seed}
[grid]
px_max = 1.0
px_points = 11
py_max = 1.0
py_points = 11
[field]
kind = uniform
B = 0, 0, 1.5
[state]
kind = free
electron_center = 0.5, 0, 0
electron_width = 0.2
electron_amplitude = 1.0
particles = 20
[time]
dt = 0.05
t_end = 0.5
diagnostics_every = 2
"""

ORACLE = """\
[run]
mode = oracle-compare
seed = 1
[grid]
length = 8.0
[state]
kind = lattice
sites = 8
states = 2
[time]
dt = 0.01
t_end = 0.2
oracle_dt = 0.01
"""


def run_cfg(tmp_path, text, name="cfg.ini", out="out"):
    path = tmp_path / name
    path.write_text(text)
    code = main(["run", str(path), "-o", str(tmp_path / out)])
    return code, tmp_path / out


def table(path):
    return np.loadtxt(path, delimiter=",", ndmin=2)


def test_version_and_verify(capsys):
    assert main(["version"]) == 0
    assert capsys.readouterr().out.strip() == __version__
    assert main(["verify"]) == 0
    assert "17 identities" in capsys.readouterr().out


def test_verify_algebra_mode(tmp_path):
    code, out = run_cfg(tmp_path, "[run]\nmode = verify-algebra\n")
    assert code == 0
    rows = [l for l in (out / "identities.csv").read_text().splitlines() if not l.startswith("#")]
    assert len(rows) == 17 and all(r.endswith(",1") for r in rows)


def test_qkin_homogeneous_run(tmp_path):
    code, out = run_cfg(tmp_path, HOMOGENEOUS)
    assert code == 0
    d = table(out / "diagnostics.csv")
    assert d.shape == (5, 9)
    np.testing.assert_allclose(d[:, 0], [0, 0.1, 0.2, 0.3, 0.4], atol=1e-12)
    np.testing.assert_allclose(d[:, 1], d[0, 1], rtol=1e-8)  # homogeneous charge; tail flux at the cutoff
    snaps = sorted(out.glob("snapshot_*.qkws"))
    assert [s.name for s in snaps] == ["snapshot_000000.qkws", "snapshot_000010.qkws", "snapshot_000020.qkws"]
    assert read_snapshot(snaps[-1]).t == pytest.approx(0.4)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["mode"] == "qkin-homogeneous" and manifest["seed"] == 5
    assert manifest["config"] == HOMOGENEOUS and manifest["version"] == __version__
    assert manifest["summary"]["steps"] == 20


def test_vlasov_grid_run(tmp_path):
    code, out = run_cfg(tmp_path, VLASOV)
    assert code == 0
    d = table(out / "diagnostics.csv")
    assert d.shape == (6, 7)
    np.testing.assert_allclose(d[:, 1], d[0, 1], rtol=1e-10)
    assert "probe_z" in (out / "diagnostics.csv").read_text()


def test_ensemble_is_reproducible(tmp_path):
    code1, out1 = run_cfg(tmp_path, ENSEMBLE.format(seed=11), "a.ini", "a")
    code2, out2 = run_cfg(tmp_path, ENSEMBLE.format(seed=11), "b.ini", "b")
    code3, out3 = run_cfg(tmp_path, ENSEMBLE.format(seed=12), "c.ini", "c")
    assert code1 == code2 == code3 == 0
    strip = lambda p: [l for l in p.read_text().splitlines() if not l.startswith("#")]
    assert strip(out1 / "diagnostics.csv") == strip(out2 / "diagnostics.csv")
    assert (out1 / "particles.csv").read_bytes() == (out2 / "particles.csv").read_bytes()
    assert (out1 / "particles.csv").read_bytes() != (out3 / "particles.csv").read_bytes()
    d = table(out1 / "diagnostics.csv")
    assert np.ptp(d[:, 5]) < 1e-7 * d[0, 5]  # kinetic energy in a pure B field (RK4, dt = 0.05)


def test_oracle_mode(tmp_path):
    code, out = run_cfg(tmp_path, ORACLE)
    assert code == 0
    rows = [l.split(",") for l in (out / "oracle_errors.csv").read_text().splitlines() if not l.startswith("#")]
    assert len(rows) == 16
    assert max(float(r[2]) for r in rows) < 1e-6


@pytest.mark.parametrize(
    "text,line,fragment",
    [
        ("[run]\nmode = qkin-homogeneous\n[time]\ndt = -1\nt_end = 1\n", 4, "dt"),
        ("[run]\nmode = vlasov-1d\njunk line\n", 3, "malformed"),
        ("stray = 1\n[run]\nmode = vlasov-1d\n", 1, "before the first"),
        ("[run]\nmode = warp\n", 2, "mode"),
        ("[run]\nmode = vlasov-1d\n[grdi]\nnz = 4\n", 3, "unknown section"),
        ("[run]\nmode = vlasov-1d\n[grid]\nnz = 4\nwidth = 2\n", 5, "unknown key"),
        ("[run]\nmode = qkin-homogeneous\n[grid]\nnz = 8\n[time]\ndt = 0.1\nt_end = 1\n", 4, "nz = 1"),
        ("[run]\nmode = vlasov-1d\n[time]\ndt = 0.1\n", 3, "t_end"),
        ("[run]\nmode = vlasov-1d\nseed = -3\n[time]\ndt = 0.1\nt_end = 1\n", 3, "seed"),
    ],
)
def test_config_errors_carry_line_numbers(tmp_path, capsys, text, line, fragment):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert fragment in str(info.value)
    code, _ = run_cfg(tmp_path, text)
    assert code == 2
    assert f"line {line}" in capsys.readouterr().err


def test_cfl_violation_is_a_config_error(tmp_path, capsys):
    code, _ = run_cfg(tmp_path, HOMOGENEOUS.replace("dt = 0.02", "dt = 0.5"))
    assert code == 2
    assert "exceeds" in capsys.readouterr().err


def test_numerical_abort_exit_code(tmp_path, capsys):
    text = VLASOV.replace("[state]", "[field]\nkind = uniform\nE = 0, 0, 3.0\n[state]").replace("t_end = 0.5", "t_end = 3.0")
    code, _ = run_cfg(tmp_path, text)
    assert code == 3
    assert "numerical abort" in capsys.readouterr().err


def test_io_errors(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.ini")]) == 4
    text = VLASOV.replace("[state]", "[field]\nkind = tabulated\nfile = nowhere.csv\n[state]")
    code, _ = run_cfg(tmp_path, text)
    assert code == 4
    assert "nowhere.csv" in capsys.readouterr().err


def test_shipped_configs_parse():
    names = sorted(p.name for p in CONFIGS.glob("*.ini"))
    assert len(names) >= 12
    for p in CONFIGS.glob("*.ini"):
        parse_config(p.read_text(), p)
