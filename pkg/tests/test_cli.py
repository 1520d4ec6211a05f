import csv
import glob
import json
import os

import pytest

from emergent_particles import cli
from emergent_particles.scenarios import (SCENARIOS, ConfigValidationError, emit, format_number,
                                          run_scenario, validate)

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(path)


@pytest.mark.parametrize("path", sorted(glob.glob(os.path.join(CONFIG_DIR, "*.json"))))
def test_shipped_configs_are_valid(path):
    with open(path) as fh:
        assert validate(json.load(fh)) == []


def test_every_scenario_has_a_config():
    names = set()
    for path in glob.glob(os.path.join(CONFIG_DIR, "*.json")):
        with open(path) as fh:
            names.add(json.load(fh)["scenario"])
    assert names == set(SCENARIOS)


def test_validation_names_keys():
    v = validate({"scenario": "free-spread", "grid": {"n_points": 100}})
    assert any(s.startswith("grid.n_points") for s in v)
    v = validate({"scenario": "statistics-reduction",
                  "statistics": {"n_particles": 3, "n_modes": 2, "statistics": "FD"}})
    assert any("infeasib" in s and s.startswith("statistics") for s in v)
    v = validate({"scenario": "epr", "grid": {"x_min": -8, "colour": 1}})
    assert v == ["grid.colour: unknown key"]
    v = validate({"scenario": "epr", "grid": {"n_points": "128"}})
    assert v and v[0].startswith("grid.n_points")
    assert validate({"scenario": "nope"})[0].startswith("scenario")
    v = validate({"scenario": "harmonic", "dynamics": {"dt": -1.0}})
    assert any(s.startswith("dynamics.dt") for s in v)


def test_run_rejects_invalid_config():
    with pytest.raises(ConfigValidationError) as info:
        run_scenario({"scenario": "free-spread", "grid": {"n_points": 100}})
    assert "grid.n_points" in info.value.violations[0]


def test_free_spread_example(tmp_path):
    res = run_scenario({"scenario": "free-spread"})
    assert res.passed
    assert res.summary["max_relative_spreading_deviation"].value < 0.01
    assert res.tables["trajectory"].columns == ("t", "mean_x", "mean_p", "var_x")
    assert res.tables["trajectory"].rows[-1][0] == pytest.approx(4.0)
    paths = emit(res, str(tmp_path))
    with open(tmp_path / "free-spread_trajectory.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "mean_x", "mean_p", "var_x"]
    assert len(rows) == 42
    summary = json.loads((tmp_path / "free-spread_summary.json").read_text())
    assert summary["passed"] is True
    assert summary["provenance"]["version"]
    assert summary["provenance"]["config"]["grid"]["n_points"] == 512
    assert len(paths) == 2


def test_classical_permutation_example():
    res = run_scenario({"scenario": "classical-permutation"})
    assert res.passed
    assert res.summary["point_count"].value == 6
    assert len(res.tables["ensemble"].rows) == 18


def test_particle_criterion_negative_example():
    cfg = {"scenario": "particle-criterion",
           "packets": [{"x0": 0.0, "p0": 0.0, "sigma": 1.0}, {"x0": 0.5, "p0": 0.0, "sigma": 1.0}]}
    res = run_scenario(cfg)
    assert res.passed
    assert "packet_fidelity" not in res.summary


def test_statistics_table_columns():
    res = run_scenario({"scenario": "statistics-reduction"})
    assert res.tables["occupation"].columns == ("outcome_label", "probability")
    assert [r[0] for r in res.tables["occupation"].rows] == ["(2,0)", "(1,1)", "(0,2)"]


def test_number_format():
    assert format_number(0.1) == "0.100000000000"
    assert format_number(1 / 3) == "0.333333333333"
    assert format_number(123456.789) == "123456.789000"
    assert format_number(2.5e-14) == "0.0000000000000250000000000"
    assert format_number(0.0) == "0"
    assert format_number(7) == "7"
    assert format_number(1e20) == "100000000000000000000"
    assert format_number(-0.5) == "-0.500000000000"


def test_emit_is_byte_stable(tmp_path):
    cfg = {"scenario": "classical-permutation"}
    a = emit(run_scenario(cfg), str(tmp_path / "a"))
    b = emit(run_scenario(cfg), str(tmp_path / "b"))
    for pa, pb in zip(a, b):
        with open(pa, "rb") as fa, open(pb, "rb") as fb:
            assert fa.read() == fb.read()


def test_emit_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        emit(run_scenario({"scenario": "classical-permutation"}), str(blocker / "sub"))


# -- command line ---------------------------------------------------------------

def test_cli_list(capsys):
    assert cli.main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in SCENARIOS)


def test_cli_validate(tmp_path, capsys):
    good = write(tmp_path, {"scenario": "harmonic"})
    assert cli.main(["validate", good]) == 0
    bad = write(tmp_path, {"scenario": "harmonic", "grid": {"n_points": 100}}, "bad.json")
    assert cli.main(["validate", bad]) == 1
    assert "grid.n_points" in capsys.readouterr().out


def test_cli_parse_error_reports_location(tmp_path, capsys):
    path = write(tmp_path, '{\n  "scenario": "epr",\n  "grid": {,}\n}')
    assert cli.main(["validate", path]) == 1
    err = capsys.readouterr().err
    assert "parse error" in err and ":3:" in err


def test_cli_run_writes_outputs(tmp_path):
    path = write(tmp_path, {"scenario": "classical-permutation"})
    out = tmp_path / "out"
    assert cli.main(["run", path, "--out", str(out)]) == 0
    assert sorted(os.listdir(out)) == ["classical-permutation_ensemble.csv",
                                       "classical-permutation_summary.json"]


def test_cli_run_invalid_leaves_no_outputs(tmp_path):
    out = tmp_path / "out"
    path = write(tmp_path, {"scenario": "free-spread", "grid": {"n_points": 100}})
    assert cli.main(["run", path, "--out", str(out)]) == 1
    assert not out.exists()


def test_cli_runtime_contract_violation(tmp_path, capsys):
    # a wide packet on a small box reaches the boundary during the run
    path = write(tmp_path, {"scenario": "free-spread",
                            "grid": {"x_min": -10.0, "x_max": 10.0, "n_points": 256},
                            "dynamics": {"steps": 1000}})
    assert cli.main(["run", path, "--out", str(tmp_path / "out")]) == 2
    assert "boundary-leak" in capsys.readouterr().err


def test_cli_failed_verdict_exit_code(tmp_path):
    # too short a run to reach the decoherence time: the scenario reports failure
    path = write(tmp_path, {"scenario": "decohere-emerge", "dynamics": {"steps": 20}})
    assert cli.main(["run", path, "--out", str(tmp_path / "out")]) == 2
    summary = json.loads((tmp_path / "out" / "decohere-emerge_summary.json").read_text())
    assert summary["passed"] is False


def test_cli_unknown_format(tmp_path):
    path = write(tmp_path, {"scenario": "classical-permutation"})
    assert cli.main(["run", path, "--format", "xml"]) == 1
