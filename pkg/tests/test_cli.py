import csv
import json

import numpy as np
import pytest

from dtoda.cli import main
from dtoda.io import dumps, fmt_float

MOBIUS = {"gamma": {"type": "mobius", "a": 0.3, "alpha": 0.0}}


def _cfg(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def _run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr()


def test_weld_mobius_writes_pair_and_curve(tmp_path, capsys):
    out = tmp_path / "o"
    code, cap = _run(["weld", _cfg(tmp_path, MOBIUS), "--out", str(out)], capsys)
    assert code == 0
    d = json.loads((out / "weld.json").read_text())
    assert d["pair"]["a"][0][1] == pytest.approx(0.9539392, abs=1e-7)
    assert d["residual_sup"] < 1e-10
    rows = list(csv.reader((out / "curve.csv").open()))
    assert rows[0] == ["k", "theta", "x", "y"] and len(rows) == d["grid"] + 1
    assert json.loads(cap.out) == d


def test_weld_identity(tmp_path, capsys):
    code, cap = _run(["weld", _cfg(tmp_path, {"gamma": {"type": "identity"}}), "--order", "16"], capsys)
    d = json.loads(cap.out)
    a = np.array([complex(re, im) for _, re, im in d["pair"]["a"]])
    bs = np.array([complex(re, im) for _, re, im in d["pair"]["bs"]])
    assert code == 0 and abs(a[0] - 1) < 1e-14
    assert np.max(np.abs(a[1:])) < 1e-14 and np.max(np.abs(bs)) < 1e-14


def test_malformed_json_exits_1(tmp_path, capsys):
    code, cap = _run(["weld", _cfg(tmp_path, '{"gamma": ')], capsys)
    assert code == 1
    assert "malformed JSON" in cap.err
    assert json.loads(cap.out)["error"] == "config"


@pytest.mark.parametrize("argv", [["weld"], ["frobnicate", "x.json"], ["verify", "x.json", "--suite", "nope"]])
def test_usage_errors_exit_1(argv, capsys):
    with pytest.raises(SystemExit) as e:
        main(argv)
    assert e.value.code == 1


def test_bad_grid_exits_1(tmp_path, capsys):
    code, _ = _run(["chart", _cfg(tmp_path, MOBIUS), "--grid", "100"], capsys)
    assert code == 1


def test_non_homeomorphism_exits_2(tmp_path, capsys):
    bad = {"gamma": {"type": "fourier", "coeffs": [[1, 1.0, 0.0], [3, 0.5, 0.0]]}}
    code, cap = _run(["weld", _cfg(tmp_path, bad)], capsys)
    assert code == 2
    assert json.loads(cap.out)["error"] == "NotAHomeomorphism"


def test_chart_inverse_mobius_row(tmp_path, capsys):
    out = tmp_path / "o"
    code, _ = _run(["chart", _cfg(tmp_path, MOBIUS), "--out", str(out)], capsys)
    assert code == 0
    rows = {r["n"]: r for r in csv.DictReader((out / "chart.csv").open())}
    assert float(rows["0"]["t_re"]) == pytest.approx(0.91, abs=1e-12)
    assert float(rows["0"]["v_re"]) == pytest.approx(-1.0858227, abs=1e-7)


def test_grunsky_identity_pair(tmp_path, capsys):
    out = tmp_path / "o"
    code, _ = _run(["grunsky", _cfg(tmp_path, {"pair": {"type": "identity"}}), "--order", "4", "--out", str(out)], capsys)
    assert code == 0
    for r in csv.DictReader((out / "grunsky.csv").open()):
        m, n = int(r["m"]), int(r["n"])
        ref = 1 / abs(n) if (m == -n and n != 0) else 0.0
        assert abs(complex(float(r["re"]), float(r["im"])) - ref) < 1e-15


def test_tau_direct_identity_pair(tmp_path, capsys):
    code, cap = _run(["tau", _cfg(tmp_path, {"pair": {"type": "identity"}}), "--chart", "direct", "--order", "8"], capsys)
    re, im = json.loads(cap.out)["log_tau"]
    assert code == 0 and abs(re + 0.75) < 1e-12 and abs(im) < 1e-12


def test_moments_of_ellipse(tmp_path, capsys):
    cfg = {"curve": [[1, 1.0, 0.0], [-1, 0.2, 0.0]]}
    code, cap = _run(["moments", _cfg(tmp_path, cfg), "--order", "3", "--grid", "64"], capsys)
    d = json.loads(cap.out)
    assert code == 0 and d["order"] == 3
    t0 = next(complex(re, im) for n, re, im in d["t"] if n == 0)
    assert abs(t0 - 0.96) < 1e-12  # area / pi = 1 - 0.2^2


def test_weld_output_feeds_pair_config(tmp_path, capsys):
    _, cap = _run(["weld", _cfg(tmp_path, MOBIUS), "--order", "40"], capsys)
    pair_cfg = {"pair": json.loads(cap.out)["pair"]}
    code, cap = _run(["chart", _cfg(tmp_path, pair_cfg, "p.json"), "--order", "4"], capsys)
    t = {n: complex(re, im) for n, re, im in json.loads(cap.out)["t"]}
    assert code == 0 and abs(t[0] - 1 / 0.91) < 1e-10


def test_output_is_deterministic(tmp_path, capsys):
    path = _cfg(tmp_path, MOBIUS)
    _, a = _run(["chart", path, "--order", "4"], capsys)
    _, b = _run(["chart", path, "--order", "4"], capsys)
    assert a.out == b.out


def test_float_format_17_digits():
    assert fmt_float(0.1) == "0.10000000000000001"
    assert fmt_float(2.0) == "2.0" and float(fmt_float(1e-20)) == 1e-20
    assert fmt_float(float("inf")) == "null"
    assert dumps({"b": 1, "a": [0.5]}) == '{\n  "a": [0.5],\n  "b": 1\n}\n'


def test_verify_string_disc_passes(tmp_path, capsys):
    code, cap = _run(["verify", _cfg(tmp_path, MOBIUS), "--suite", "string"], capsys)
    d = json.loads(cap.out)
    assert code == 0 and d["pass"] and d["checks"][0]["residual"] < 1e-5


def test_verify_hirota_passes(tmp_path, capsys):
    code, cap = _run(["verify", _cfg(tmp_path, MOBIUS), "--suite", "hirota", "--order", "16"], capsys)
    d = json.loads(cap.out)
    assert code == 0 and d["checks"][0]["indices"] == [-2, -1, 0, 1, 2]


def test_verify_lax_large_step_fails(tmp_path, capsys):
    code, cap = _run(["verify", _cfg(tmp_path, MOBIUS), "--suite", "lax", "--h", "0.1"], capsys)
    d = json.loads(cap.out)
    assert code == 2 and not d["pass"] and "ratio" in d["diagnostic"]


@pytest.mark.parametrize("suite", ["rh", "symmetry", "gradient"])
def test_verify_other_suites(tmp_path, capsys, suite):
    code, cap = _run(["verify", _cfg(tmp_path, MOBIUS), "--suite", suite, "--order", "16"], capsys)
    assert code == 0 and json.loads(cap.out)["pass"]


def test_verify_rh_direct_divergence_is_numeric_failure(tmp_path, capsys):
    cfg = {"gamma": {"type": "mobius", "a": 0.7, "alpha": 0.0}, "chart": "direct"}
    code, cap = _run(["verify", _cfg(tmp_path, cfg), "--suite", "rh"], capsys)
    assert code == 2 and json.loads(cap.out)["error"] == "TailDivergence"
