import json
import subprocess
import sys

import pytest

from freetransport.cli import run
from freetransport.cli.config import ConfigError, load_config, resolve
from freetransport.cli.report import build_report

QUARTIC = {"kind": "quartic", "A": [["0"]], "lambda": [["1"]], "mu": ["1"], "nu": [["1", "0", "1"]]}
PURE_QUARTIC = {"kind": "quartic", "A": [["0"]], "lambda": [["1"]], "mu": ["1"], "nu": [["0", "0", "1"]]}


def _summary(out):
    return json.loads((out / "summary.json").read_text())


def test_check_identities(tmp_path):
    out = tmp_path / "ids"
    assert run(["check-identities", "--trials", "5", "--deg", "3", "--out", str(out)]) == 0
    assert (out / "identities.csv").exists()
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["trials"] == 5 and cfg["command"] == "check-identities"


def test_certify_convexity_file_argument(tmp_path):
    p = tmp_path / "v.json"
    p.write_text(json.dumps(PURE_QUARTIC))
    out = tmp_path / "cert"
    assert run(["certify-convexity", str(p), "--N", "3", "--tuples", "4", "--out", str(out)]) == 0
    s = _summary(out)
    assert s["certificate"]["c"] == 0
    # the resolved config inlines the referenced file
    assert json.loads((out / "config.json").read_text())["potential"]["nu"] == [["0", "0", "1"]]


def test_uncertified_potential_exits_one(tmp_path):
    p = tmp_path / "v.json"
    p.write_text(json.dumps({**QUARTIC, "nu": [["1", "3", "1"]]}))
    assert run(["certify-convexity", str(p), "--N", "2", "--tuples", "1", "--out", str(tmp_path / "o")]) == 1


def test_sample_with_ks_and_svg(tmp_path):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"potential": QUARTIC, "N": 8, "count": 10, "burnin": 30, "thin": 2, "chains": 5, "sd_tol": 0.2}))
    out = tmp_path / "sample"
    assert run(["sample", "--config", str(cfg), "--out", str(out), "--svg"]) == 0
    for name in ("ensemble.hmt1", "moments.csv", "sd.csv", "density.svg", "summary.json"):
        assert (out / name).exists()
    assert "ks" in _summary(out)


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"potential": QUARTIC, "N": 8, "count": 4, "burnin": 5, "thin": 1, "chains": 2}))
    out = tmp_path / "o"
    run(["sample", "--config", str(cfg), "--N", "4", "--out", str(out)])
    assert json.loads((out / "config.json").read_text())["N"] == 4


def test_sample_is_reproducible(tmp_path):
    (tmp_path / "q.json").write_text(json.dumps(QUARTIC))
    args = ["sample", "--potential", str(tmp_path / "q.json"), "--N", "4", "--count", "3", "--burnin", "5", "--thin", "1", "--chains", "3"]
    run(args + ["--out", str(tmp_path / "a")])
    run(args + ["--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "ensemble.hmt1").read_bytes() == (tmp_path / "b" / "ensemble.hmt1").read_bytes()


def test_sde_quadratic(tmp_path):
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"quadratic_c": 2.0}))
    out = tmp_path / "sde"
    assert run(["sde", "--fam", str(fam), "--N", "4", "--T", "1", "--dt", "0.01", "--alpha", "1", "--out", str(out), "--svg"]) == 0
    assert (out / "contraction.svg").exists()
    assert _summary(out)["slope_fro"] == pytest.approx(-1.0, rel=1e-2)


def test_semigroup_ou_oracle(tmp_path):
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"quadratic_c": 1.0}))
    out = tmp_path / "sg"
    code = run(["semigroup", "--fam", str(fam), "--N", "4", "--paths", "2000", "--dt", "0.05", "--t", "0.5,1", "--out", str(out)])
    s = _summary(out)
    assert s["oracle"] == "ornstein_uhlenbeck"
    assert code == 0, s["checks"]


def test_transport_quadratic_closed_form(tmp_path):
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"quadratic_c": 2.0}))
    out = tmp_path / "tr"
    code = run(["transport", "--fam", str(fam), "--N", "6", "--count", "20", "--T", "20", "--dt", "0.02", "--d-alpha", "0.25",
                "--scheme", "rk4", "--out", str(out), "--svg"])
    assert code == 0, _summary(out)["checks"]
    for name in ("flowed.hmt1", "diagnostics.csv", "moments.csv", "moments.svg"):
        assert (out / name).exists()


def test_transport_tail_failure_exits_one(tmp_path):
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"quadratic_c": 2.0}))
    out = tmp_path / "tr"
    assert run(["transport", "--fam", str(fam), "--N", "3", "--count", "2", "--T", "0.5", "--dt", "0.05", "--d-alpha", "0.5", "--out", str(out)]) == 1
    assert "TransportError" in _summary(out)["error"]


def test_onevar_pipeline(tmp_path):
    out = tmp_path / "ov"
    assert run(["onevar", "--V", "0,0,0.5", "--W", "0,0,0,0,0.25", "--grid=-4,4,257", "--alpha-steps", "8", "--out", str(out), "--svg"]) == 0
    for name in ("density.csv", "map.csv", "map.svg", "density.svg"):
        assert (out / name).exists()


def test_onevar_bad_grid_is_usage_error(tmp_path):
    assert run(["onevar", "--grid", "1,2", "--out", str(tmp_path / "x")]) == 2


def test_missing_required_setting(tmp_path, capsys):
    assert run(["sample", "--out", str(tmp_path / "x")]) == 2
    assert "potential" in capsys.readouterr().err


def test_unknown_flag_and_command():
    assert run(["sample", "--bogus"]) == 2
    assert run(["frobnicate"]) == 2


def test_config_errors_report_line(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "N": 4,\n  "count": "many"\n}')
    with pytest.raises(ConfigError, match=r"bad.json:3"):
        load_config(bad, "sample")
    bad.write_text('{\n  "N": 4,\n  "colour": 1\n}')
    with pytest.raises(ConfigError, match=r"bad.json:3.*colour"):
        load_config(bad, "sample")
    bad.write_text('{\n  "N": 4,\n')
    with pytest.raises(ConfigError, match=r"bad.json:3"):
        load_config(bad, "sample")
    assert run(["sample", "--config", str(bad)]) == 2


def test_resolve_precedence():
    assert resolve({"a": 1, "b": 1, "c": 1}, {"b": 2, "c": 2}, {"c": 3, "b": None}) == {"a": 1, "b": 2, "c": 3}


def test_report(tmp_path):
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"quadratic_c": 2.0}))
    sde_out = tmp_path / "sde"
    run(["sde", "--fam", str(fam), "--N", "3", "--T", "0.5", "--dt", "0.01", "--out", str(sde_out)])
    ok, path = build_report([sde_out], tmp_path / "rep")
    assert ok
    text = path.read_text()
    assert "contraction" in text and (tmp_path / "rep" / "run00_contraction.svg").exists()
    ok, path = build_report([tmp_path / "nowhere"], tmp_path / "rep2")
    assert not ok and "Missing artifacts" in path.read_text()
    assert run(["report", "--out", str(tmp_path / "rep3")]) == 0


def test_console_script_help():
    r = subprocess.run([sys.executable, "-m", "freetransport.cli.main", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    for cmd in ("check-identities", "certify-convexity", "sample", "sde", "semigroup", "transport", "onevar", "report"):
        assert cmd in r.stdout
