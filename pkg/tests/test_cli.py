import json

import pytest

from euclidmin.cli import EXIT_INPUT, EXIT_NOT_CONVERGED, EXIT_OK, dispatch, main


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


@pytest.fixture
def files(tmp_path):
    return {
        "sqrt2": write(tmp_path, "sqrt2.json", {"min_poly": ["-2", "0", "1"], "label": "Q(sqrt2)"}),
        "sqrt5": write(tmp_path, "sqrt5.json", {"min_poly": ["-1", "-1", "1"], "label": "Q(sqrt5)"}),
        "z3": write(tmp_path, "z3.json", {"min_poly": ["1", "1", "1"], "label": "Q(zeta3)"}),
        "cubic": write(tmp_path, "cubic.json", {
            "min_poly": ["1", "-2", "-1", "1"], "label": "cubic49",
            "fundamental_units": [["0", "1", "0"], ["-1", "1", "0"]]}),
        "bad": write(tmp_path, "bad.json", {"nothing": 1}),
        "reducible": write(tmp_path, "red.json", {"min_poly": ["1", "-2", "1"]}),
    }


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_bounds(capsys, files):
    code, rep = run(capsys, ["bounds", files["sqrt2"]])
    assert code == EXIT_OK
    res = rep["results"]
    assert res["bayer_bound"] == "2"
    assert res["Q_log3"] == pytest.approx(5.03, abs=0.01)
    assert res["F_UK"] == pytest.approx(0.8814, abs=1e-4)
    assert rep["label"] == "Q(sqrt2)" and rep["command"] == "bounds"


def test_mk(capsys, files):
    code, rep = run(capsys, ["mk", files["sqrt2"], "--point", "1/2,0"])
    assert code == EXIT_OK
    assert rep["results"]["value"] == "1/4"
    assert rep["results"]["witness"] == ["1/2", "0"]


def test_mk_garbage_point(capsys, files):
    assert main(["mk", files["sqrt2"], "--point", "garbage"]) == EXIT_INPUT
    assert main(["mk", files["sqrt2"], "--point", "1/2"]) == EXIT_INPUT


@pytest.mark.parametrize("key", ["bad", "reducible"])
def test_bad_field_files(files, key):
    assert main(["units", files[key]]) == EXIT_INPUT


def test_missing_file_and_unknown_command(tmp_path):
    assert main(["units", str(tmp_path / "missing.json")]) == EXIT_INPUT
    assert main(["frobnicate", "x.json"]) == EXIT_INPUT


def test_units(capsys, files):
    code, rep = run(capsys, ["units", files["cubic"]])
    assert code == EXIT_OK
    assert rep["results"]["rank"] == 2
    assert rep["results"]["regulator"] == pytest.approx(0.525454, abs=1e-5)


def test_search_converges(capsys, files):
    code, rep = run(capsys, ["search", files["sqrt2"]])
    assert code == EXIT_OK
    res = rep["results"]
    assert res["lower"] == "1/2" and res["converged"]
    assert res["upper"] - 0.5 <= 1e-3
    assert rep["inputs"]["tol"] == 1e-3 and rep["inputs"]["depth"] == 40


def test_search_not_converged_exit(capsys, files):
    code, rep = run(capsys, ["search", files["sqrt5"], "--depth", "1", "--qmax", "2"])
    assert code == EXIT_NOT_CONVERGED
    assert rep["results"]["converged"] is False


def test_determinism(files):
    a, _ = dispatch(["search", files["sqrt5"], "--tol", "1e-2"])
    b, _ = dispatch(["search", files["sqrt5"], "--tol", "1e-2"])
    a.timing = b.timing = {}
    assert a.to_json() == b.to_json()


def test_cm_and_oracle(capsys, files):
    code, rep = run(capsys, ["cm", files["z3"], "--eta", "0,1", "--slope", "0", "--beta", "1"])
    assert code == EXIT_OK
    assert rep["results"]["min"] == "3/4" and rep["results"]["xi"] == ["1/2"]
    code, rep = run(capsys, ["cm", files["z3"], "--eta", "0,1", "--slope", "inf", "--beta", "1"])
    assert rep["results"]["min"] == "3/4"
    code, rep = run(capsys, ["oracle", "cm", files["z3"], "--eta", "0,1", "--slope", "0", "--beta", "1"])
    assert code == EXIT_OK
    assert rep["results"]["min"] == pytest.approx(0.75, abs=1e-6)
    assert rep["results"]["argmin"][0] == pytest.approx(0.5, abs=1e-3)


def test_cm_rejects_rational_eta(files):
    assert main(["cm", files["z3"], "--eta", "2,0", "--slope", "0", "--beta", "1"]) == EXIT_INPUT


def test_oracle_mk(capsys, files):
    code, rep = run(capsys, ["oracle", "mk", files["sqrt2"], "--point", "1/2,0", "--radius", "5"])
    assert code == EXIT_OK
    assert rep["results"]["value"] == "1/4"


def test_seed_and_threads_recorded(capsys, files):
    code, rep = run(capsys, ["--seed", "5", "--threads", "2", "mk", files["sqrt2"], "--point", "1/3,0"])
    assert code == EXIT_OK
    assert rep["inputs"]["seed"] == 5 and rep["inputs"]["threads"] == 2


def test_precision_env(monkeypatch, capsys, files):
    monkeypatch.setenv("EM_PRECISION_BITS", "256")
    code, rep = run(capsys, ["mk", files["sqrt2"], "--point", "1/2,1/2"])
    assert code == EXIT_OK and rep["results"]["value"] == "1/4"
