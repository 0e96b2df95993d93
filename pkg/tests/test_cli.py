import json
import math

import pytest

from hvq.cli import COMMANDS, output_dir, run
from hvq.config import parse_angle, parse_assignments, parse_seed, resolve
from hvq.errors import ConfigError
from hvq.reports import read_csv

FAST = {
    "malus-fit": ["grid=64", "max_iter=200"],
    "malus-feasibility": [],
    "epr-sim": ["n=2000"],
    "interchange-gap": ["n=2000", "oracle=false"],
    "chsh-bounds": ["restarts=2"],
    "phase-op": [],
    "doubled-space": ["dim=4", "n_t=21"],
    "evolve": ["steps=50"],
    "oscillator-phase": ["n_t=50"],
    "resonance": ["spacing=0.25", "t_max=30", "n_t=61"],
    "blackbody": ["n_points=20"],
    "bohr": [],
}


def test_every_subcommand_covered():
    assert set(FAST) == set(COMMANDS)


def test_deterministic_bound_prints_two(tmp_path, capsys):
    assert run(["chsh-bounds", "mode=deterministic", "--out", str(tmp_path)]) == 0
    assert capsys.readouterr().out.strip() == "2"
    header, rows = read_csv(tmp_path / "bounds.csv")
    assert header[:2] == ["mode", "value"] and float(rows[0][1]) == 2.0


@pytest.mark.parametrize("name", sorted(FAST))
def test_runs_and_writes_manifest(name, tmp_path):
    assert run([name, *FAST[name], "--out", str(tmp_path)]) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == name and manifest["status"] == "ok"
    assert set(manifest["config"]) == set(COMMANDS[name].schema)
    for fname in manifest["outputs"].values():
        header, _ = read_csv(tmp_path / fname)
        assert header


@pytest.mark.parametrize("name", ["epr-sim", "malus-fit", "resonance", "interchange-gap"])
def test_rerun_byte_identical(name, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = [name, *FAST[name], "seed=12345"]
    assert run([*args, "--out", str(a)]) == 0 and run([*args, "--out", str(b)]) == 0
    names = json.loads((a / "manifest.json").read_text())["outputs"].values()
    for fname in names:
        assert (a / fname).read_bytes() == (b / fname).read_bytes()


def test_unknown_key_in_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\nn = 100\nbogus = 3\n")
    out = tmp_path / "out"
    assert run(["epr-sim", "--config", str(cfg), "--out", str(out)]) == 2
    assert not out.exists()
    assert "bogus" in capsys.readouterr().err


def test_config_file_with_angles(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha2 = 45deg   # second left setting\nbeta1 = 0.39269908169872414rad\nn = 500\n")
    out = tmp_path / "out"
    assert run(["epr-sim", "--config", str(cfg), "n=700", "--out", str(out)]) == 0
    conf = json.loads((out / "manifest.json").read_text())["config"]
    assert conf["alpha2"] == pytest.approx(math.pi / 4) and conf["n"] == 700


def test_bad_value_exit_two(tmp_path):
    assert run(["evolve", "steps=many", "--out", str(tmp_path / "o")]) == 2
    assert run(["epr-sim", "alpha1=10", "--out", str(tmp_path / "o")]) == 2
    assert run(["bohr", "seed=-1", "--out", str(tmp_path / "o")]) == 2
    assert not (tmp_path / "o").exists()


def test_runtime_failure_exit_one(tmp_path, capsys):
    assert run(["evolve", "n_grid=1000", "--out", str(tmp_path)]) == 1
    assert "power of two" in capsys.readouterr().err
    assert json.loads((tmp_path / "manifest.json").read_text())["status"] == "failed"


def test_env_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv("HVQ_OUTPUT_DIR", str(tmp_path))
    assert output_dir("bohr", None) == tmp_path / "bohr"
    monkeypatch.chdir(tmp_path)
    assert run(["bohr"]) == 0
    assert (tmp_path / "bohr" / "levels.csv").exists()


def test_blackbody_header(tmp_path):
    run(["blackbody", "n_points=5", "--out", str(tmp_path)])
    header, rows = read_csv(tmp_path / "blackbody.csv")
    assert header == ["nu", "T", "planck", "rayleigh_jeans", "wien"] and len(rows) == 5


class TestConfigParsing:
    def test_angles(self):
        assert parse_angle("180deg") == pytest.approx(math.pi)
        assert parse_angle(" -0.5rad ") == -0.5
        assert parse_angle("1e1deg") == pytest.approx(math.radians(10))
        with pytest.raises(ConfigError):
            parse_angle("0.5")

    def test_assignments(self):
        pairs = parse_assignments(["a = 1  # c", "", "# only comment", "b=x=y"])
        assert pairs == {"a": "1", "b": "x=y"}
        with pytest.raises(ConfigError):
            parse_assignments(["a = 1", "a = 2"])
        with pytest.raises(ConfigError):
            parse_assignments(["novalue"])

    def test_seed_range(self):
        assert parse_seed(str(2**64 - 1)) == 2**64 - 1
        with pytest.raises(ConfigError):
            parse_seed(str(2**64))

    def test_precedence(self):
        schema = COMMANDS["bohr"].schema
        cfg = resolve(schema, {"n_max": "3"}, {"n_max": "4"})
        assert cfg["n_max"] == 4 and cfg["units"] == "SI"
