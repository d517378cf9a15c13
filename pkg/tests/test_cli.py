import csv
import io
import json
import math

import pytest

from critscat import cli


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    import os

    for key in list(os.environ):
        if key.startswith("CRITSCAT_"):
            monkeypatch.delenv(key)


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr()


def test_sector(capsys):
    code, out = run(capsys, "sector", "--d", "3", "--l", "0", "--gamma", "1.25")
    assert code == 0
    rec = json.loads(out.out)
    assert rec["sector"]["sigma"] == pytest.approx(1.0)
    assert rec["classification"]["m"] == 1


def test_sector_with_sigma_and_borderline(capsys):
    code, out = run(capsys, "sector", "--sigma", "2.0")
    assert json.loads(out.out)["sector"]["gamma"] == pytest.approx(4.25)
    code, out = run(capsys, "sector", "--gamma", "2.25")
    rec = json.loads(out.out)
    assert code == 0 and rec["classification"] is None and rec["classification_error"]


def test_eigenvalues(capsys):
    code, out = run(capsys, "eigenvalues", "--n", "6")
    rec = json.loads(out.out)
    assert code == 0 and len(rec["kappa"]) == 6
    assert rec["ratios"][-1] == pytest.approx(math.exp(-math.pi), rel=1e-6)


def test_specfun(capsys):
    code, out = run(capsys, "specfun", "--function", "gamma", "1", "0.5")
    rows = list(csv.reader(io.StringIO(out.out)))
    assert rows[0] == ["input", "re", "im"]
    assert float(rows[1][1]) == pytest.approx(1.0)
    assert float(rows[2][1]) == pytest.approx(math.sqrt(math.pi))


def test_phase_shift_csv_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["phase-shift", "--k-min", "1e-3", "--k-max", "1e-2"]
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b), "--jobs", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = list(csv.reader(a.open()))
    assert rows[0] == ["ln_k", "sigma_sr"] and len(rows) > 30


def test_wkb(capsys):
    code, out = run(capsys, "wkb", "--n", "3", "--lambda-min", "1e-6", "--lambda-max", "1e-2")
    rows = list(csv.reader(io.StringIO(out.out)))
    assert code == 0 and len(rows) == 4


def test_config_file(tmp_path, capsys):
    path = tmp_path / "run.ini"
    path.write_text("[sector]\ngamma = 4.25\n")
    code, out = run(capsys, "sector", "--config", str(path))
    assert json.loads(out.out)["sector"]["sigma"] == pytest.approx(2.0)


def test_errors_give_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    code, out = run(capsys, "sector", "--config", str(bad))
    assert code == 2 and "configuration error" in out.err
    code, out = run(capsys, "eigenvalues", "--gamma", "1.0", "--l", "1")
    assert code == 1 and "not oscillatory" in out.err


def test_verify_single_criterion(tmp_path, capsys):
    path = tmp_path / "v.json"
    code, out = run(capsys, "verify", "--only", "6", "--json", str(path))
    assert code == 0
    assert out.out.split()[:2] == ["[PASS]", "6"]
    assert json.loads(path.read_text())[0]["passed"] is True
