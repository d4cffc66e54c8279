import csv
import io
import json
import subprocess
import sys

import pytest

from wronskian.cli import COMPARE_HEADER, main, series_payload


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().out


def test_series_wda1_json(capsys):
    code, out = run(["series", "--method", "wda1", "--order", "4"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["method"] == "wda1" and data["order"] == 4
    coeffs = data["coefficients"]
    assert [c["power"] for c in coeffs] == [0, 1, 2, 3]
    assert [c["rational"] for c in coeffs] == ["-1/4", "-9/64", "-85/512", "-4515/16384"]
    assert coeffs[2]["value"] == pytest.approx(-0.1660, abs=5e-4)
    assert "provenance_note" in data


def test_series_wda2_marks_floating_coefficients(capsys):
    _, out = run(["series", "--method", "wda2"], capsys)
    coeffs = json.loads(out)["coefficients"]
    assert [c["rational"] is None for c in coeffs] == [False, False, True, True]
    assert coeffs[2]["value"] == pytest.approx(-0.1738, abs=5e-4)


def test_series_variational_csv(capsys):
    code, out = run(["series", "--method", "variational", "--order", "5", "--format", "csv"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["power", "value", "rational"]
    assert [r[2] for r in rows[1:]] == ["-1/4", "-9/64", "-85/512", "-4677/16384", "-81055/131072"]
    assert float(rows[5][1]) == pytest.approx(-0.6184, abs=5e-4)
    assert all("," not in r[1] for r in rows[1:])


def test_json_round_trip():
    for method in ("wda1", "wda2", "variational"):
        payload = series_payload(method, 4)
        assert json.loads(json.dumps(payload)) == payload


def test_identical_config_gives_identical_bytes(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"run{k}.csv"
        assert main(["compare", "--g", "10", "--format", "csv", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_compare_single_row(capsys):
    code, out = run(["compare", "--g-min", "10", "--g-max", "10", "--steps", "1", "--format", "csv"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == COMPARE_HEADER
    assert rows[0] == "g,E_wda1,E_wda2,E_var,E_oracle,d_wda1,d_wda2,d_var,status".split(",")
    assert len(rows) == 2
    row = dict(zip(rows[0], rows[1]))
    energies = [float(row[k]) for k in ("E_wda1", "E_wda2", "E_var")]
    assert max(energies) - min(energies) < 1e-3
    assert abs(float(row["d_wda2"])) < abs(float(row["d_wda1"]))
    assert row["status"] == "ok"


def test_compare_rows_in_order(capsys):
    code, out = run(["compare", "--g-min", "8", "--g-max", "16", "--steps", "3"], capsys)
    assert code == 0
    rows = json.loads(out)["rows"]
    assert [float(r["g"]) for r in rows] == [8.0, 12.0, 16.0]
    assert list(rows[0]) == COMPARE_HEADER


def test_oracle_harmonic_hidden_selftest(capsys):
    code, out = run(["oracle", "--potential", "harmonic"], capsys)
    assert code == 0
    assert json.loads(out)["energy"] == pytest.approx(0.5, abs=1e-6)


def test_oracle_double_well(capsys):
    _, out = run(["oracle", "--g", "10"], capsys)
    data = json.loads(out)
    assert data["extrapolated"] == pytest.approx(9.733649777, abs=1e-8)
    assert data["discretization_bound"] > 0


@pytest.mark.parametrize("argv", [["oracle", "--g", "0"], ["oracle", "--g", "-3"], ["energy", "--g", "nan"],
                                  ["series", "--order", "7"], ["compare", "--g-min", "5"]])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


def test_energy_all_methods(capsys):
    _, out = run(["energy", "--g", "20"], capsys)
    data = json.loads(out)
    for key in ("E_wda1", "E_wda1_series", "E_wda2", "E_wda2_series", "E_var", "E_var_series"):
        assert data[key] == pytest.approx(19.7425, abs=1e-3)
    assert data["f_star"] == pytest.approx(20.0 - 9 / 64 / 20, abs=1e-3)


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# series settings\nmethod = wda1\norder = 2\nformat = csv\n")
    _, out = run(["series", "--config", str(cfg), "--order", "3"], capsys)
    rows = list(csv.reader(io.StringIO(out)))
    assert [r[2] for r in rows[1:]] == ["-1/4", "-9/64", "-85/512"]


def test_config_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    with pytest.raises(SystemExit) as info:
        main(["series", "--config", str(cfg)])
    assert info.value.code == 2


def test_selftest_passes(capsys):
    code, out = run(["selftest"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 5 and all(line.startswith("PASS ") for line in lines)


def test_selftest_fault_injection(capsys):
    code, out = run(["selftest", "--inject-fault", "appendix"], capsys)
    assert code == 1
    assert "FAIL appendix_rationals" in out
    assert out.count("PASS") == 4


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "wronskian", "series", "--method", "wda1", "--order", "2"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["coefficients"][1]["rational"] == "-9/64"
