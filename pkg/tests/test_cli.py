import csv
import io
import json

import pytest

from beatty_ps import cli


def call(argv, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def test_seq_terms_json():
    code, out, _ = call(["seq", "beatty", "--alpha", "sqrt2", "--start", "1", "--stop", "8"])
    assert code == 0
    d = json.loads(out)
    assert d["schema_version"] == cli.SCHEMA_VERSION
    assert [r["term"] for r in d["results"]] == [1, 2, 4, 5, 7, 8, 9]


def test_seq_ps_csv():
    code, out, _ = call(["seq", "ps", "--c", "3/2", "--start", "4", "--stop", "6", "--format", "csv"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["term"]) for r in rows] == [8, 11]


def test_count_intersection():
    code, out, _ = call(["count", "intersection", "--alpha", "sqrt2", "--beta", "3/10", "--c", "21/20", "--x", "1e3"])
    assert code == 0
    r = json.loads(out)["results"][0]
    assert r["kind"] == "intersection" and r["x"] == 1000 and r["count"] >= 0


def test_count_sweep():
    code, out, _ = call(["count", "ps", "--c", "13/12", "--x", "1000,10**4"])
    assert code == 0
    assert [r["x"] for r in json.loads(out)["results"]] == [1000, 10000]


@pytest.mark.parametrize(
    "argv",
    [
        ["count", "ps", "--c", "5", "--x", "100"],  # c outside (1, 2)
        ["count", "ps", "--x", "100", "--bogus", "1"],  # unknown flag
        ["seq", "beatty", "--alpha", "rat:1/2"],  # alpha <= 1
        ["expsum", "--check", "type1", "--N", "10000", "--K", "100"],  # hypothesis violated
        ["nosuchcommand"],
        [],
    ],
)
def test_usage_errors_exit_2(argv):
    code, out, err = call(argv)
    assert code == 2
    assert out == ""
    assert err.startswith("error")


def test_precision_exhausted_exit_3():
    code, _, err = call(["discrepancy", "cf", "--theta", "dec:1.414213562373095048801688724209@30", "--depth", "200"])
    assert code == 3
    assert "precision" in err


def test_failed_check_exit_1(monkeypatch):
    monkeypatch.setitem(cli.HANDLERS, "seq", lambda a: ([], [{"name": "forced", "passed": False}]))
    code, _, _ = call(["seq", "beatty"])
    assert code == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "vaughan", "--max", "20000", "--U", "5", "--V", "10"],
        ["verify", "beatty", "--alpha", "golden", "--beta", "1/2", "--max", "5000"],
        ["verify", "ps", "--c", "21/20", "--max", "5000"],
        ["harmonic", "vaaler", "--H", "10", "--grid", "2000"],
        ["harmonic", "vinogradov", "--a", "1/3", "--delta", "1/50", "--K", "200", "--grid", "2000"],
        ["vaughan", "split", "--range", "1000:1500", "--alpha", "golden", "--c", "21/20"],
        ["expsum", "--check", "vdc", "--phase", "quadratic:surd:(0+1*sqrt(2))/1000", "--N", "1000"],
        ["expsum", "--check", "prime-reduce", "--N", "10000"],
        ["expsum", "--check", "type2", "--N", "10000", "--ak", "mu", "--bl", "lambda"],
    ],
)
def test_checks_pass(argv):
    code, out, err = call(argv)
    assert code == 0, err
    assert all(c["passed"] for c in json.loads(out)["checks"])


def test_outputs_of_other_modes():
    code, out, _ = call(["discrepancy", "exact", "--points", "0,1/4,1/2,3/4"])
    assert json.loads(out)["results"][0]["D"] == "1/4"
    code, out, _ = call(["discrepancy", "cf", "--theta", "sqrt2", "--depth", "5"])
    assert json.loads(out)["results"][0]["partial_quotients"] == [2] * 5
    code, out, _ = call(["vaughan", "terms", "--n", "6", "--U", "2", "--V", "2"])
    r = json.loads(out)["results"][0]
    assert r["T3"] == 0 and r["total"] == pytest.approx(0, abs=1e-15)
    code, out, _ = call(["harmonic", "sawtooth", "--t", "rat:7/4"])
    assert json.loads(out)["results"][0]["psi"] == "1/4"
    code, out, _ = call(["harmonic", "vinogradov", "--coefficients", "--a", "1/3", "--delta", "1/50", "--K", "60",
                         "--format", "csv"])
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 121 and rows[0]["k"] == "-60"


def test_config_round_trip(tmp_path):
    cfg = cli.ExperimentConfig(("count", "ps"), {"c": "13/12", "x": "10000"}, "json", 2, 96)
    assert cli.ExperimentConfig.from_text(cfg.to_text()) == cfg
    path = tmp_path / "run.cfg"
    path.write_text(cfg.to_text())
    code, out, _ = call(["--config", str(path)])
    assert code == 0
    d = json.loads(out)
    assert d["results"][0]["params"] == {"c": "13/12"}
    assert cli.ExperimentConfig.from_text(d["config"]).params["x"] == "10000"
    # flags on the command line override the file
    code, out, _ = call(["--config", str(path), "--x", "1000"])
    assert json.loads(out)["results"][0]["x"] == 1000


def test_config_rejects_unknown_keys(tmp_path):
    with pytest.raises(cli.UsageError):
        cli.ExperimentConfig.from_text("command = count ps\nwidth = 3\n")
    path = tmp_path / "bad.cfg"
    path.write_text("command = count ps\nx = 100\nwidth = 3\n")
    assert call(["--config", str(path)])[0] == 2


def test_threads_from_environment(monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "2")
    code, out, _ = call(["count", "ps", "--c", "3/2", "--x", "1000"])
    assert code == 0
    assert "threads = 2" in json.loads(out)["config"]


def test_payload_independent_of_threads():
    a = ["count", "intersection", "--alpha", "sqrt2", "--beta", "3/10", "--c", "21/20", "--x", "2e5"]
    p1 = json.loads(call(a + ["--threads", "1"])[1])
    p3 = json.loads(call(a + ["--threads", "3"])[1])
    strip = lambda d: cli.strip_timings({k: d[k] for k in ("schema_version", "command", "results", "checks")})
    assert strip(p1) == strip(p3)


def test_parse_helpers():
    assert cli.parse_int("1e7") == 10**7
    assert cli.parse_int("10**6") == 10**6
    assert cli.parse_range("5:9") == (5, 9)
    with pytest.raises(cli.UsageError):
        cli.parse_int("1.5")
    with pytest.raises(cli.UsageError):
        cli.parse_range("9:5")
