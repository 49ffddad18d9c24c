import json

import numpy as np
import pytest

from uamo import checks, cli
from uamo.spectrum import ButterflyRaster


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr()


def test_butterfly(tmp_path, capsys):
    out = tmp_path / "b.pgm"
    code, _ = run(capsys, "butterfly", "--q-max", "3", "--grid", "64", "--theta-grid", "8", "--k-grid", "8",
                  "--out", str(out))
    assert code == 0
    bm = ButterflyRaster.read_pgm(str(out))
    assert bm.shape == (5, 64)
    side = json.loads((tmp_path / "b.pgm.json").read_text())
    assert side["format"] == "P5" and len(side["rows"]) == 5


def test_butterfly_is_deterministic(tmp_path, capsys):
    args = ["butterfly", "--q-max", "3", "--grid", "32", "--theta-grid", "8", "--k-grid", "8", "--out"]
    p = str(tmp_path / "b.pgm")
    run(capsys, *args, p)
    first = (tmp_path / "b.pgm").read_bytes(), (tmp_path / "b.pgm.json").read_bytes()
    run(capsys, *args, p)
    assert first == ((tmp_path / "b.pgm").read_bytes(), (tmp_path / "b.pgm.json").read_bytes())


def test_lyapunov_csv(tmp_path, capsys):
    out = tmp_path / "l.csv"
    code, _ = run(capsys, "lyapunov", "--beta", "golden", "--z", "e:0.1", "--eps-max", "0.2", "--eps-steps", "3",
                  "--iters", "100", "--samples", "8", "--out", str(out))
    assert code == 0
    assert out.read_bytes().startswith(b"eps,L,err,slope\r\n")
    assert len(out.read_text().splitlines()) == 4
    prov = json.loads((tmp_path / "l.csv.json").read_text())
    assert prov["grids"]["n_iters"] == 100


def test_lyapunov_stdout(capsys):
    code, cap = run(capsys, "lyapunov", "--eps-steps", "1", "--iters", "50", "--samples", "4")
    assert code == 0 and cap.out.startswith("eps,L,err,slope")


def test_acceleration(capsys):
    code, cap = run(capsys, "acceleration", "--z", "e:0.3", "--eps0", "3", "--iters", "100", "--samples", "8")
    d = json.loads(cap.out)
    assert code == 0 and d["omega_rounded"] == 1 and d["resolved"] is True


def test_spectrum_json_and_csv(tmp_path, capsys):
    code, cap = run(capsys, "spectrum", "--beta", "3/5", "--grid", "16")
    d = json.loads(cap.out)
    assert code == 0 and d["source"]["q"] == 5 and 0 < d["measure"] < 1
    out = tmp_path / "m.csv"
    code, _ = run(capsys, "spectrum", "--beta", "golden", "--q-max", "8", "--grid", "16", "--out", str(out))
    lines = out.read_text().splitlines()
    assert code == 0 and lines[0] == "p,q,measure,uncertainty" and len(lines) == 6


def test_ds_scan(tmp_path, capsys):
    out = tmp_path / "ds.json"
    code, _ = run(capsys, "ds-scan", "--beta", "3/5", "--grid", "16", "--iters", "160", "--out", str(out))
    d = json.loads(out.read_text())
    assert code == 0 and len(d["verdicts"]) == 16
    assert {v["verdict"] for v in d["verdicts"]} <= {"DS", "NOT_DS", "UNDECIDED"}


def test_ds_scan_explicit_z(capsys):
    code, cap = run(capsys, "ds-scan", "--beta", "3/5", "--z", "2", "--z", "0.5j", "--iters", "160")
    d = json.loads(cap.out)
    assert code == 0 and [v["verdict"] for v in d["verdicts"]] == ["DS", "DS"]


def test_duality(capsys):
    code, cap = run(capsys, "duality", "--L", "16,32")
    d = json.loads(cap.out)
    assert code == 0 and [r["truncation_size"] for r in d["reports"]] == [32, 64]


def test_verify_single_suite(tmp_path, capsys):
    out = tmp_path / "v.json"
    code, cap = run(capsys, "verify", "logcos", "--out", str(out))
    assert code == 0 and cap.out.startswith("[PASS] logcos")
    assert json.loads(out.read_text())["results"][0]["passed"] is True


def test_verify_failure_exit_code(monkeypatch, capsys):
    monkeypatch.setitem(checks.SUITES, "broken",
                        lambda: checks.CheckResult("broken", False, 0.0, 1.0, {}))
    code, cap = run(capsys, "verify", "broken")
    assert code == 1 and "[FAIL] broken" in cap.out


@pytest.mark.parametrize("argv", [
    ["verify", "nope"],
    ["spectrum", "--beta", "abc"],
    ["spectrum", "--beta", "1.5"],
    ["lyapunov", "--z", "0"],
    ["lyapunov", "--eps-min", "1", "--eps-max", "0"],
    ["duality", "--L", "4,x"],
    ["butterfly", "--q-max", "3"],
    ["--threads", "0", "verify", "logcos"],
])
def test_config_errors(argv, capsys):
    code, cap = run(capsys, *argv)
    assert code == 2 and cap.err.startswith("error:")


def test_unknown_option_exits_two():
    with pytest.raises(SystemExit) as exc:
        cli.main(["spectrum", "--bogus"])
    assert exc.value.code == 2


def test_parse_helpers():
    assert cli.parse_z("e:0.25") == pytest.approx(1j)
    assert cli.parse_beta("5/8").convergents[-1] == (5, 8)
    assert cli.round12({"a": [1 / 3]}) == {"a": [0.333333333333]}
    assert np.isclose(cli.parse_beta("golden").value, (5 ** 0.5 - 1) / 2)
