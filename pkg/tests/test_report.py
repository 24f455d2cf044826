import copy
import json

import numpy as np
import pytest

from apspec import report as rp
from apspec.errors import (ConfigInvalid, SchemaMismatch, SchemaSectionMismatch, WindowTooSmall)

SMALL = {
    "seed": 3,
    "system": {"name": "CircleRotation"},
    "observables": ["exp"],
    "grid": {"extent": 200},
    "sampling": {"n": 500},
    "diagnostics": ["profile", "ap-scan"],
}


@pytest.fixture(scope="module")
def small_report():
    return rp.run(SMALL)


@pytest.mark.parametrize("bad,path", [
    ({"system": {"name": "CircleRotation"}}, ()),
    ({"seed": -1}, ("seed",)),
    ({"seed": 1, "system": {"name": "Nope"}}, ("system", "name")),
    ({"seed": 1, "grid": {"extent": 0}}, ("grid", "extent")),
    ({"seed": 1, "grid": {"windows": [100]}}, ("grid", "windows")),
    ({"seed": 1, "diagnostics": ["profile"]}, ("system",)),
    ({"seed": 1, "colour": "red"}, ()),
    ({"seed": 1, "sampling": {"method": "GUESS"}}, ("sampling", "method")),
])
def test_schema_errors_carry_the_field_path(bad, path):
    with pytest.raises(ConfigInvalid) as info:
        rp.validate_config(bad)
    assert info.value.path == path


def test_bad_system_parameter_is_a_config_error():
    with pytest.raises(ConfigInvalid) as info:
        rp.run({"seed": 0, "system": {"name": "BernoulliShift", "p": 2.0}})
    assert info.value.path == ("system",)


def test_load_config_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigInvalid):
        rp.load_config(p)
    with pytest.raises(ConfigInvalid):
        rp.load_config(tmp_path / "missing.json")


def test_empty_diagnostics():
    rep = rp.run({"seed": 1, "system": {"name": "OnePoint"}, "diagnostics": []})
    assert rep.results == {} and rep.body["system"]["name"] == "OnePoint"
    assert rep.body["schema_version"] == rp.SCHEMA_VERSION


def test_compute_error_names_the_diagnostic():
    cfg = {"seed": 0, "diffraction": {"provenance": "LATTICE", "L": 100, "Z": 80},
           "diagnostics": ["diffraction"]}
    with pytest.raises(WindowTooSmall, match="diffraction"):
        rp.run(cfg)


def test_report_contents(small_report):
    res = small_report.results
    obs = res["profile"]["observables"]["exp"]
    assert obs["star_residual"] < 1e-10 and obs["e_le_F"] and obs["F_le_root_e"]
    assert res["ap-scan"]["d_bar"]["verdict"] == "AP_CONSISTENT"
    assert "d_bar.csv" in "".join(small_report.csv)
    body = json.loads(small_report.body_json())
    assert body["config_hash"] == rp.config_hash(rp.validate_config(dict(SMALL)))
    assert "timing" not in body and "timing" in json.loads(small_report.to_json())


def test_determinism(small_report):
    again = rp.run(copy.deepcopy(SMALL))
    assert again.body_json() == small_report.body_json()
    assert again.csv == small_report.csv


def test_write_and_compare_clean(small_report, tmp_path):
    path = small_report.write(tmp_path / "a")
    assert (tmp_path / "a" / "profile_d_bar.csv").exists()
    diff = rp.compare(path, small_report)
    assert diff.clean and diff.entries == []


def test_compare_other_seed_within_tolerance(small_report):
    other = rp.run({**SMALL, "seed": 4})
    diff = rp.compare(small_report, other)
    assert diff.clean
    # data-driven numbers such as the eps grid differ but carry no standard error
    assert diff.unchecked and all(e.ok is not False for e in diff.entries)


def test_compare_flags_profile_and_label_changes(small_report):
    body = copy.deepcopy(rp.body_of(small_report))
    S = body["results"]["profile"]["observables"]["exp"]["S"]
    S["stderr"] = [0.01] * len(S["stderr"])
    S["re"][3] += 1.0
    body["results"]["ap-scan"]["d_bar"]["verdict"] = "NOT_AP"
    body["results"]["profile"]["observables"]["exp"]["star_residual"] += 1e-3
    diff = rp.compare(small_report, body)
    assert not diff.clean
    failed = {e.path for e in diff.failures}
    assert "results/profile/observables/exp/S/re" in failed
    assert "results/ap-scan/d_bar/verdict" in failed
    unchecked = {e.path for e in diff.unchecked}
    assert "results/profile/observables/exp/star_residual" in unchecked


def test_compare_schema_mismatch(small_report):
    body = copy.deepcopy(rp.body_of(small_report))
    body["schema_version"] = 99
    with pytest.raises(SchemaMismatch):
        rp.compare(small_report, body)
    body = copy.deepcopy(rp.body_of(small_report))
    del body["results"]["ap-scan"]
    with pytest.raises(SchemaSectionMismatch) as info:
        rp.compare(small_report, body)
    assert info.value.sections == ["results/ap-scan"]


def test_jsonable_non_finite_and_complex():
    out = rp.jsonable({"a": np.inf, "b": -np.inf, "c": np.nan, "d": 1 + 2j,
                       "e": np.arange(2), "f": np.float32(0.5)})
    assert out == {"a": "inf", "b": "-inf", "c": "nan", "d": {"re": 1.0, "im": 2.0},
                   "e": [0, 1], "f": 0.5}
    json.dumps(out, allow_nan=False)
