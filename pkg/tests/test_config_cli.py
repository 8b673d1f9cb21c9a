import csv
import json
import subprocess
import sys

import pytest

from chemostat import BioParams, ConsistencyError, IntegratorConfig, ParameterError, cli
from chemostat import config as cfgmod
from chemostat.config import GridMode, LineMode, OutputConfig, PointMode, RunConfig


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_roundtrip(tmp_path):
    cfgs = [
        RunConfig(point=PointMode(1, 0.5)),
        RunConfig(parameters=BioParams(m1=3.3, Y2=0.5), line=LineMode(2.0, (0.1, 3.0), 50),
                  integrator=IntegratorConfig(rtol=1e-6, max_steps=1000),
                  output=OutputConfig("x", ("csv", "svg"))),
        RunConfig(grid=GridMode((0.0, 2.0), (0.1, 1.0), 30)),
    ]
    for k, cfg in enumerate(cfgs):
        path = tmp_path / f"c{k}.json"
        cfgmod.dump(cfg, path)
        assert cfgmod.load(path) == cfg
        assert RunConfig.from_dict(json.loads(path.read_text())) == cfg
    assert cfgs[2].grid.resolution == (30, 30)


def test_default_config_embeds_parameters():
    d = RunConfig(point=PointMode()).to_dict()
    assert d["parameters"]["m1"] == 4.0 and d["parameters"]["a2"] == 0.2
    assert d["operating"] == {"point": {"S_in": 1.0, "D": 0.5}}


@pytest.mark.parametrize("data", [
    {"bogus": {}},
    {"operating": {"point": {}, "line": {}}},
    {"operating": {"cube": {}}},
    {"operating": {"point": {"S": 1}}},
    {"operating": {"line": {"D_range": [0, 1]}}},
    {"operating": {"grid": {"resolution": [1, 5]}}},
    {"operating": {"grid": {"D_range": [2, 1]}}},
    {"parameters": {"m1": -1}},
    {"output": {"formats": ["png"]}},
    {"output": {"formats": []}},
    {"integrator": {"rtol": 0}},
    [],
])
def test_invalid_configs(data):
    with pytest.raises(ParameterError):
        RunConfig.from_dict(data)


def test_load_errors(tmp_path):
    with pytest.raises(ParameterError):
        cfgmod.load(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ParameterError):
        cfgmod.load(bad)


def test_steady_states_cli(tmp_path, capsys):
    assert cli.main(["steady-states", "--S-in", "1", "--D", "0.5", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    rows = _rows(tmp_path / "steady_states.csv")
    assert rows[0] == ["kind", "S", "x1", "x2", "stability", "letter", "residual", "region"]
    assert [r[0] for r in rows[1:]] == ["E0", "E1", "E2", "Estar"]
    star = rows[4]
    assert [float(v) for v in star[1:4]] == pytest.approx([0.5181, 0.1491, 0.2371], abs=1e-3)
    assert star[5] == "U" and star[7] == "J3"
    # every printed number equals the CSV entry
    for r in rows[1:]:
        assert f"S={r[1]} " in out and f"x1={r[2]} " in out and f"x2={r[3]} " in out


def test_steady_states_washout_only(tmp_path, capsys):
    assert cli.main(["steady-states", "--S-in", "1", "--D", "5", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "steady_states.csv")
    assert len(rows) == 2 and rows[1][0] == "E0" and rows[1][5] == "S"


def test_exit_code_config(tmp_path, capsys):
    assert cli.main(["steady-states", "--S-in", "0", "--out", str(tmp_path)]) == 2
    assert cli.main(["steady-states", "--format", "png", "--out", str(tmp_path)]) == 2
    cfg = tmp_path / "line.json"
    cfgmod.dump(RunConfig(line=LineMode()), cfg)
    assert cli.main(["steady-states", "--config", str(cfg)]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_exit_code_consistency(tmp_path, monkeypatch, capsys):
    def boom(*a, **k):
        raise ConsistencyError("forced")
    monkeypatch.setattr(cli, "classify_region", boom)
    assert cli.main(["steady-states", "--out", str(tmp_path)]) == 3
    assert "internal consistency" in capsys.readouterr().err


def test_exit_code_integrator(tmp_path, capsys):
    cfg = RunConfig(point=PointMode(1, 0.7),
                    integrator=IntegratorConfig(rtol=1e-30, atol=1e-300, h_init=1e-3, max_steps=200),
                    output=OutputConfig(str(tmp_path)))
    path = tmp_path / "c.json"
    cfgmod.dump(cfg, path)
    assert cli.main(["simulate", "--config", str(path), "--ic", "1,0.3,0.1"]) == 4


def test_simulate(tmp_path, capsys):
    args = ["simulate", "--S-in", "1", "--D", "0.5", "--random", "8", "--seed", "3",
            "--ic", "1,0,0", "--format", "csv,svg", "--out", str(tmp_path)]
    assert cli.main(args) == 0
    summary = _rows(tmp_path / "summary.csv")
    labels = [r[4] for r in summary[1:]]
    assert labels[0] == "E0" and {"E1", "E2"} <= set(labels[1:])
    const = _rows(tmp_path / "trajectory_000.csv")
    assert all(r[1:] == ["1", "0", "0"] for r in const[1:])
    assert (tmp_path / "phase_x1_x2.svg").read_text().startswith("<svg")
    assert cli.main(["simulate", "--out", str(tmp_path)]) == 2  # no initial conditions


def test_simulate_single_attractor(tmp_path, capsys):
    assert cli.main(["simulate", "--S-in", "1", "--D", "0.7", "--random", "8",
                     "--out", str(tmp_path)]) == 0
    assert {r[4] for r in _rows(tmp_path / "summary.csv")[1:]} == {"E1"}


def test_bifurcation(tmp_path, capsys):
    assert cli.main(["bifurcation", "--S-in", "1", "--D-range", "0.05", "5", "--n", "120",
                     "--format", "csv,svg", "--out", str(tmp_path)]) == 0
    sig = _rows(tmp_path / "sigma.csv")
    assert [float(r[0]) for r in sig[1:]] == pytest.approx([4, 1.0666, 0.6447, 0.352], abs=5e-3)
    assert [r[2] for r in sig[1:]] == ["E0=E1", "E0=E2", "E2=Estar", "E1=Estar"]
    svg = (tmp_path / "bifurcation.svg").read_text()
    assert "stroke:blue;stroke-width:2;stroke-dasharray" in svg and "stroke:red;" in svg
    assert cli.main(["bifurcation", "--S-in", "1", "--D-range", "0.45", "0.46", "--n", "2",
                     "--out", str(tmp_path)]) == 0
    br = _rows(tmp_path / "branches.csv")
    first = {r[1]: r[5] for r in br[1:] if float(r[0]) == 0.45}
    assert first == {"E0": "U", "E1": "S", "E2": "S", "Estar": "U"}


def test_bifurcation_empty(tmp_path, capsys):
    assert cli.main(["bifurcation", "--S-in", "0.1", "--D-range", "0.5", "5", "--n", "5",
                     "--out", str(tmp_path)]) == 0
    assert len(_rows(tmp_path / "sigma.csv")) == 1


def test_operating_diagram(tmp_path, capsys):
    assert cli.main(["operating-diagram", "--S-in-range", "0", "1", "--D-range", "0", "2",
                     "--resolution", "60", "60", "--format", "csv,svg", "--out", str(tmp_path)]) == 0
    regions = _rows(tmp_path / "regions.csv")
    assert regions[0] == ["S_in", "D", "region"] and len(regions) == 3601
    curves = {r[0] for r in _rows(tmp_path / "curves.csv")[1:]}
    assert curves == {"U1", "U2", "U1c", "U2c"}
    cands = _rows(tmp_path / "codim2.csv")[1:]
    assert any(abs(float(r[1]) - 0.418289) < 1e-5 and abs(float(r[2]) - 0.361063) < 1e-5
               for r in cands)
    svg = (tmp_path / "operating_diagram.svg").read_text()
    for color in ("black", "blue", "red", "magenta", "yellow", "pink", "green"):
        assert color in svg
    assert "ZH?" in svg


def test_operating_diagram_washout_window(tmp_path, capsys):
    assert cli.main(["operating-diagram", "--S-in-range", "0.01", "0.1", "--D-range", "0.5", "2",
                     "--resolution", "5", "5", "--out", str(tmp_path)]) == 0
    assert {r[2] for r in _rows(tmp_path / "regions.csv")[1:]} == {"J0"}


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "chemostat", "steady-states", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "region=J3" in res.stdout
