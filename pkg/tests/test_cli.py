import json

import pytest

from apspec.cli import EXIT_COMPUTE, EXIT_CONFIG, EXIT_DIFF, EXIT_OK, config_from_args, \
    build_parser, main
from apspec.systems import CATALOG


def test_systems_list(capsys):
    assert main(["systems", "list"]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert [line.split()[0] for line in out] == list(CATALOG)


def test_profile_run_writes_report(tmp_path, capsys):
    code = main(["profile", "--system", "CircleRotation", "--observable", "exp",
                 "--grid-max", "50", "--samples", "300", "--out", str(tmp_path)])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "star residual" in out
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["config"]["grid"]["extent"] == 50 and rep["config"]["sampling"]["n"] == 300
    assert (tmp_path / "profile_d_bar.csv").exists()


def test_system_parameters_are_parsed_as_json(tmp_path):
    args = build_parser().parse_args(["profile", "--system", "BernoulliShift", "--param",
                                      "p=0.3", "--param", "tag=abc"])
    cfg = config_from_args(args)
    assert cfg["system"] == {"name": "BernoulliShift", "p": 0.3, "tag": "abc"}


def test_config_takes_precedence_over_flags(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"seed": 9, "system": {"name": "DoublingMap"},
                                "grid": {"extent": 30}, "diagnostics": ["verdict"]}))
    args = build_parser().parse_args(["profile", "--config", str(path), "--seed", "1",
                                      "--grid-max", "77", "--samples", "400",
                                      "--system", "CircleRotation"])
    cfg = config_from_args(args)
    assert cfg["seed"] == 9 and cfg["grid"]["extent"] == 30
    assert cfg["system"]["name"] == "DoublingMap"
    # flags survive where the file is silent; the subcommand fixes the diagnostic
    assert cfg["sampling"]["n"] == 400 and cfg["diagnostics"] == ["profile"]


def test_config_errors_exit_2(tmp_path, capsys):
    assert main(["profile", "--system", "Nope", "--quiet"]) == EXIT_CONFIG
    assert main(["profile", "--system", "BernoulliShift", "--param", "p=2"]) == EXIT_CONFIG
    assert main(["profile", "--system", "CircleRotation", "--param", "alpha"]) == EXIT_CONFIG
    assert main(["run"]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text('{"seed": "x"}')
    assert main(["run", "--config", str(bad)]) == EXIT_CONFIG
    assert "config error: seed" in capsys.readouterr().err


def test_compute_errors_exit_3(capsys):
    code = main(["diffraction", "--provenance", "LATTICE", "--L", "100", "--Z", "80"])
    assert code == EXIT_COMPUTE
    assert "WindowTooSmall" in capsys.readouterr().err


def test_diffraction_from_points_file(tmp_path, capsys):
    pts = tmp_path / "points.txt"
    pts.write_text("\n".join(str(float(i)) for i in range(-200, 201)))
    code = main(["diffraction", "--points", str(pts), "--Z", "50", "--out", str(tmp_path / "o")])
    assert code == EXIT_OK
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    res = rep["results"]["diffraction"]
    assert res["point_set"]["provenance"] == "CUSTOM" and res["point_set"]["points"] == 401
    ks = sorted(round(p["k"], 6) for p in res["spectrum"]["peaks"])
    assert ks == [-4, -3, -2, -1, 0, 1, 2, 3, 4]


def test_run_and_compare(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 1, "system": {"name": "CircleRotation"},
                               "grid": {"extent": 100}, "sampling": {"n": 200},
                               "diagnostics": ["profile"]}))
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "a"), "--quiet"]) == 0
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "b"), "--quiet"]) == 0
    a, b = tmp_path / "a" / "report.json", tmp_path / "b" / "report.json"
    assert main(["compare", str(a), str(b), "--quiet"]) == EXIT_OK
    doc = json.loads(b.read_text())
    doc["results"]["profile"]["observables"]["exp"]["e_le_F"] = False
    b.write_text(json.dumps(doc))
    assert main(["compare", str(a), str(b), "--quiet"]) == EXIT_DIFF
    del doc["results"]["profile"]
    b.write_text(json.dumps(doc))
    assert main(["compare", str(a), str(b)]) == EXIT_DIFF
    doc["schema_version"] = 2
    b.write_text(json.dumps(doc))
    assert main(["compare", str(a), str(b)]) == EXIT_CONFIG
    assert main(["compare", str(a), str(tmp_path / "none.json")]) == EXIT_CONFIG


def test_unknown_subcommand_exits_via_argparse():
    with pytest.raises(SystemExit):
        main(["frobnicate"])
