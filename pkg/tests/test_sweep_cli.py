import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from fsnoma import capacity_noma as cn
from fsnoma import capacity_oma as co
from fsnoma import cli, sweep
from fsnoma.model import NumericsPolicy
from fsnoma.oracles import McSettings
from fsnoma.sweep import COLUMNS, SpecError

from conftest import default_config

RECIPES = Path(__file__).resolve().parent.parent / "recipes"

A2_SPEC = """
[system]
snr_db = 20.0
[monte_carlo]
n_samples = 20000
seed = 11
[[sweep]]
name = "a2grid"
axis = "a2"
values = [0.05, 0.1, 0.2, 0.3, 0.45]
methods = ["oma_exact", "noma_exact"]
output = "a2.csv"
[[sweep]]
name = "mc"
axis = "snr_db"
values = [0, 10, 20]
methods = ["noma_mc", "oma_mc", "noma_exact"]
output = "mc.csv"
"""


@pytest.fixture
def spec_file(tmp_path):
    p = tmp_path / "spec.toml"
    p.write_text(A2_SPEC)
    return p


def run(argv, capsys=None):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr() if capsys else None
    return code, out


def test_cardinality_columns_and_order(spec_file, tmp_path, capsys):
    code, _ = run(["sweep", spec_file, "--out-dir", tmp_path, "--only", "a2grid"], capsys)
    assert code == 0
    text = (tmp_path / "a2.csv").read_text()
    lines = text.splitlines()
    assert lines[0] == ",".join(COLUMNS)
    rows = sweep.read_csv(tmp_path / "a2.csv")
    assert len(rows) == 10
    keys = [(r["axis_value"], r["method"]) for r in rows]
    assert keys == sorted(keys)
    assert all(r["status"] == "ok" and r["wall_ms"] is None for r in rows)
    # library values are reproduced exactly
    r = next(r for r in rows if r["axis_value"] == 0.2 and r["method"] == "noma_exact")
    assert r["capacity_bits_s_hz"] == cn.c_noma_exact(default_config(20, 0.2)).value


def test_byte_identical_reruns(spec_file, tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["sweep", spec_file, "--out-dir", a], capsys)[0] == 0
    assert run(["sweep", spec_file, "--out-dir", b], capsys)[0] == 0
    for name in ("a2.csv", "mc.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_parallel_equals_serial(spec_file, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(sweep.WORKERS_ENV, "1")
    assert run(["sweep", spec_file, "--out-dir", tmp_path / "s"], capsys)[0] == 0
    monkeypatch.setenv(sweep.WORKERS_ENV, "3")
    assert run(["sweep", spec_file, "--out-dir", tmp_path / "p"], capsys)[0] == 0
    for name in ("a2.csv", "mc.csv"):
        assert (tmp_path / "s" / name).read_bytes() == (tmp_path / "p" / name).read_bytes()


def test_worker_env_parsing(monkeypatch):
    monkeypatch.delenv(sweep.WORKERS_ENV, raising=False)
    assert sweep.worker_count(2) == 2
    monkeypatch.setenv(sweep.WORKERS_ENV, "5")
    assert sweep.worker_count(2) == 5
    for bad in ("0", "x", "-2"):
        monkeypatch.setenv(sweep.WORKERS_ENV, bad)
        with pytest.raises(SpecError):
            sweep.worker_count()


def test_timing_flag(spec_file, tmp_path, capsys):
    run(["sweep", spec_file, "--out-dir", tmp_path, "--only", "a2grid", "--timing"], capsys)
    rows = sweep.read_csv(tmp_path / "a2.csv")
    assert all(r["wall_ms"] is not None and r["wall_ms"] >= 0 for r in rows)


def test_csv_round_trip(spec_file, tmp_path, capsys):
    run(["sweep", spec_file, "--out-dir", tmp_path, "--only", "mc"], capsys)
    src = tmp_path / "mc.csv"
    again = tmp_path / "again.csv"
    sweep.write_csv(sweep.read_csv(src), again)
    assert src.read_bytes() == again.read_bytes()


def test_atomic_write_keeps_old_file(tmp_path, monkeypatch):
    target = tmp_path / "out.csv"
    target.write_text("old\n")

    def boom(*a, **k):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(OSError):
        sweep.write_csv([], target)
    assert target.read_text() == "old\n"
    assert list(tmp_path.iterdir()) == [target]


def test_usage_errors(tmp_path, capsys):
    assert run(["sweep", tmp_path / "missing.toml"], capsys)[0] == 1
    with pytest.raises(SystemExit) as ex:
        cli.main([])
    assert ex.value.code == 1
    with pytest.raises(SystemExit) as ex:
        cli.main(["frobnicate"])
    assert ex.value.code == 1
    bad = {
        "axis": '[[sweep]]\naxis = "volume"\nvalues = [1]\nmethods = ["noma_exact"]\noutput = "x"\n',
        "order": '[[sweep]]\naxis = "snr_db"\nvalues = [3, 1]\nmethods = ["noma_exact"]\noutput = "x"\n',
        "a2": '[[sweep]]\naxis = "a2"\nvalues = [0.1, 0.6]\nmethods = ["noma_exact"]\noutput = "x"\n',
        "method": '[[sweep]]\naxis = "a2"\nvalues = [0.1]\nmethods = ["magic"]\noutput = "x"\n',
        "key": '[system]\nsnr = 3\n',
        "toml": '[system\n',
        "base": '[system]\na2 = 0.7\n',
        "tol": '[numerics]\ncap_tol = 1e-9\nquad_tol = 1e-8\n',
    }
    for name, text in bad.items():
        p = tmp_path / f"{name}.toml"
        p.write_text(text)
        cmd = "print-config" if name in ("key", "toml", "base", "tol") else "sweep"
        assert run([cmd, p], capsys)[0] == 1, name
    assert run(["print-config", "--set", "system.a2"], capsys)[0] == 1
    assert run(["print-config", "--set", "nonsense.a2=1"], capsys)[0] == 1


def test_print_config_and_overrides(capsys, spec_file):
    code, out = run(["print-config", "--snr-db", "30", "--set", "system.sr.m=2.5",
                     "--set", "monte_carlo.n_samples=1e3"], capsys)
    assert code == 0
    data = json.loads(out.out)
    assert data["derived"]["mean_snr_linear"] == pytest.approx(1000.0)
    assert data["derived"]["links"]["sr"]["m"] == 2.5
    assert data["derived"]["links"]["sr"]["m_s"] == 2.5 * 3 + 1
    assert data["monte_carlo"]["n_samples"] == 1000
    assert data["derived"]["backend"] in ("cython", "python")
    code, out = run(["sweep", spec_file, "--print-config", "--a2", "0.2"], capsys)
    assert code == 0 and json.loads(out.out)["system"]["a2"] == 0.2


def test_numerical_failure_exit_code(tmp_path, capsys):
    p = tmp_path / "asym.toml"
    # sr breaks the shared m_s - 1 = C m relation the asymptotic form needs
    p.write_text('[system]\nsr = { m_s = 7.0 }\n[[sweep]]\naxis = "snr_db"\nvalues = [40]\n'
                 'methods = ["noma_exact", "noma_asym"]\noutput = "x.csv"\n')
    code, _ = run(["sweep", p, "--out-dir", tmp_path], capsys)
    assert code == 3
    rows = {r["method"]: r for r in sweep.read_csv(tmp_path / "x.csv")}
    assert rows["noma_exact"]["status"] == "ok"
    assert rows["noma_asym"]["status"].startswith("error")
    assert math.isnan(rows["noma_asym"]["capacity_bits_s_hz"])


def test_validate_pass_and_forced_fail(capsys):
    code, out = run(["validate", "--snr-db", "20", "--samples", "300000"], capsys)
    assert code == 0, out.out
    lines = out.out.strip().splitlines()
    assert lines[0] == sweep.CHECK_HEADER
    assert all(line.endswith("PASS") for line in lines[1:])
    code2, out2 = run(["validate", "--snr-db", "20", "--samples", "300000",
                       "--set", "numerics.cap_tol=1e-15", "--set", "numerics.quad_tol=1e-16"], capsys)
    assert code2 == 2
    lines2 = out2.out.strip().splitlines()
    assert len(lines2) == len(lines)
    assert any(line.endswith("FAIL") for line in lines2)


def test_console_script_runs():
    res = subprocess.run([sys.executable, "-m", "fsnoma.cli", "print-config"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert json.loads(res.stdout)["system"]["m"] == 5.0


def test_optimize_a2_interior_and_dominance():
    cfg = default_config(25, 0.01)
    opt = sweep.optimize_a2(cfg)
    assert 1e-3 < opt.a2 < 0.5 - 1e-3
    assert opt.estimate.value >= max(opt.grid_values)
    assert opt.estimate.value >= cn.c_noma_exact(cfg).value
    with pytest.raises(Exception):
        sweep.optimize_a2(cfg, bounds=(0.2, 0.1))


def test_recipes_parse():
    expected = {"fig2": "sweep", "fig3": "sweep", "fig4": "sweep", "fig5": "sweep", "fig6": "optimize"}
    for name, kind in expected.items():
        spec = sweep.load_spec(RECIPES / f"{name}.toml")
        assert spec.blocks and all(b.kind == kind for b in spec.blocks)
        for b in spec.blocks:
            sweep.build_config(sweep.block_system(spec, b))
    fig3 = sweep.load_spec(RECIPES / "fig3.toml")
    assert len(fig3.blocks[0].values) == 49


def test_fig5_recipe_monotone_in_shadowing(tmp_path, capsys):
    code, _ = run(["sweep", RECIPES / "fig5.toml", "--out-dir", tmp_path,
                   "--set", "monte_carlo.n_samples=200000"], capsys)
    assert code == 0
    for link in ("sr", "rd", "sd"):
        rows = sweep.read_csv(tmp_path / f"fig5_{link}.csv")
        for method in ("noma_exact", "oma_exact", "noma_mc", "oma_mc"):
            seq = [r for r in rows if r["method"] == method]
            for a, b in zip(seq, seq[1:]):
                slack = 0.0 if method.endswith("exact") else a["error"] + b["error"]
                assert b["capacity_bits_s_hz"] >= a["capacity_bits_s_hz"] - slack, (link, method)


def test_schema_round_trip_through_resolved(spec_file):
    spec = sweep.load_spec(spec_file)
    again = sweep.parse_spec(cli._as_data(spec))
    assert again.resolved() == spec.resolved()
