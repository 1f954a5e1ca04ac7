import csv
import io
import json

import pytest

from xyqst.cli import main
from xyqst.config import ConfigError, RunConfig, parse_axis


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_trace_minimal(capsys):
    code, out, _ = run(capsys, "trace")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0] == ["t", "p", "q", "f"]
    assert float(rows[1][0]) == 0.0 and float(rows[1][3]) == 0.5
    # default horizon 5 N / J with N = 10 and dt = 0.05
    assert len(rows) == 1 + 1001


def test_trace_row_count(capsys, tmp_path):
    out = tmp_path / "trace.csv"
    code, _, _ = run(capsys, "trace", "--n-sites", "12", "--coordination", "3", "--t-max", "50", "--dt", "0.05",
                     "--out", str(out))
    assert code == 0
    assert len(out.read_text().splitlines()) == 1 + 1001
    prov = json.loads((tmp_path / "trace.csv.provenance.json").read_text())
    assert prov["tool"] == "xyqst" and len(prov["config_hash"]) == 16


def test_malformed_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n_sites = 10\nfalloof = 2\n")
    code, _, err = run(capsys, "--config", str(cfg), "trace")
    assert code == 2 and "falloof" in err


def test_malformed_value(capsys):
    code, _, err = run(capsys, "trace", "--falloff", "fast")
    assert code == 2 and "falloff" in err


def test_metrics_found(capsys):
    code, out, _ = run(capsys, "metrics", "--n-sites", "25", "--coordination", "12", "--falloff", "1.5",
                       "--anisotropy", "1", "--field", "1.7")
    record = json.loads(out)["record"]
    assert code == 0 and record["status"] == "found" and record["t_q"] > 0


def test_metrics_short_horizon_is_a_result(capsys):
    code, out, err = run(capsys, "metrics", "--n-sites", "25", "--t-max", "2")
    assert code == 0
    assert json.loads(out)["record"]["status"] == "no-advantage-within-horizon"
    assert "no advantage" in err


def test_metrics_invalid_coordination(capsys):
    code, _, err = run(capsys, "metrics", "--n-sites", "8", "--coordination", "8")
    assert code == 2 and "coordination" in err


def test_sweep_over_z(capsys, tmp_path):
    out = tmp_path / "z.csv"
    code, _, _ = run(capsys, "sweep", "--n-sites", "25", "--falloff", "1.5", "--anisotropy", "1", "--field", "1.7",
                     "--axis", "z=1:24", "--out", str(out))
    rows = list(csv.DictReader(out.open()))
    assert code == 0 and len(rows) == 24
    assert [int(r["z"]) for r in rows] == list(range(1, 25))
    t_q = [float(r["t_q"]) for r in rows if r["status"] == "found"]
    # longer range reaches the classical limit sooner than nearest-neighbour transfer
    assert min(t_q[1:]) < t_q[0]


def test_sweep_to_stdout_and_jsonl(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep", "--n-sites", "6", "--axis", "z=1,2", "--axis", "g=0.5,1.5")
    assert code == 0 and len(out.splitlines()) == 5
    jl = tmp_path / "s.jsonl"
    run(capsys, "sweep", "--n-sites", "6", "--axis", "z=1,2", "--out", str(jl))
    assert "config_hash" in json.loads(jl.read_text().splitlines()[0])["provenance"]


def test_fit_pipeline(capsys, tmp_path):
    sweep = tmp_path / "n.csv"
    run(capsys, "sweep", "--coordination", "max", "--falloff", "2.7", "--anisotropy", "1", "--field", "1.7",
        "--axis", "N=20:60:10", "--t-max", "600", "--out", str(sweep))
    fit = tmp_path / "fit.json"
    code, _, _ = run(capsys, "fit", "--input", str(sweep), "--out", str(fit))
    payload = json.loads(fit.read_text())
    assert code == 0
    assert {"a", "b", "eta", "residual", "provenance"} <= set(payload)
    assert payload["a"] == 1.0 and payload["residual"] < 0.01


def test_fit_needs_input(capsys):
    code, _, err = run(capsys, "fit")
    assert code == 2 and "input" in err


def test_oracle_check(capsys):
    code, out, _ = run(capsys, "oracle-check", "--n-sites", "8", "--samples", "5", "--seed", "4")
    report = json.loads(out)
    assert code == 0
    assert len(report["samples"]) == 5
    assert report["max_deviation"] < 0.02


def test_oracle_check_size_limit(capsys):
    code, _, err = run(capsys, "oracle-check", "--n-sites", "20")
    assert code == 2 and "n_sites" in err


def test_dump_config_round_trip(capsys, tmp_path):
    code, out, _ = run(capsys, "--dump-config", "sweep", "--n-sites", "14", "--axis", "alpha=0.5:1.5:0.5",
                       "--set", "epsilon=1e-5")
    assert code == 0
    again = RunConfig.parse(out)
    assert again.values["n_sites"] == 14 and again.values["epsilon"] == 1e-5
    assert again.axes["alpha"] == [0.5, 1.0, 1.5]
    assert again.dump() == out


def test_flags_before_subcommand_survive(capsys):
    code, out, _ = run(capsys, "--n-sites", "9", "--dump-config", "trace")
    assert code == 0 and "n_sites = 9" in out


def test_config_parse_errors():
    with pytest.raises(ConfigError, match="duplicate"):
        RunConfig.parse("n_sites = 3\nn_sites = 4\n")
    with pytest.raises(ConfigError, match=":2:"):
        RunConfig.parse("n_sites = 3\njunk\n")
    with pytest.raises(ConfigError):
        parse_axis("1:5:0", "axis.z")


def test_axis_ranges():
    assert parse_axis("1:4", "z") == [1, 2, 3, 4]
    assert parse_axis("0.5:1.0:0.25", "alpha") == [0.5, 0.75, 1.0]
    assert parse_axis("2, 5, 7", "z") == [2, 5, 7]


def test_config_hash_ignores_output_location():
    a, b = RunConfig(), RunConfig()
    b.set("out", "elsewhere.csv")
    b.set("parallelism", "4")
    assert a.config_hash() == b.config_hash()
    b.set("falloff", "2")
    assert a.config_hash() != b.config_hash()
