import hashlib
import json

import numpy as np
import pytest

from anaconda_sim.cli import main
from anaconda_sim.harness import ConfigError, ExperimentConfig, TrialTrace
from anaconda_sim.io import config_hash, fmt, load_config, read_trace_csv, write_trace_csv

TINY = {"width": 30, "height": 30, "agent_count": 4, "trials": 2, "horizon": 100, "nmax_sweep": [0, 1], "tau_pairs": [[0.01, 0.05]]}


@pytest.fixture
def tiny_config(tmp_path):
    p = tmp_path / "tiny.json"
    p.write_text(json.dumps(TINY))
    return p


def digests(root):
    return {p.relative_to(root).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(root.rglob("*.csv"))}


def test_number_format():
    assert fmt(1 / 3) == "0.333333333"
    assert fmt(np.int64(12)) == "12"
    assert fmt(1e-12) == "1e-12"


def test_trace_round_trip(tmp_path):
    tr = TrialTrace(
        t=np.arange(1, 4),
        sim_seconds=np.array([0.1, 0.2, 0.30000000000000004]),
        f_value=np.array([10.0, 11.5, 12.0]),
        coverage_fraction=np.array([0.1, 0.115, 0.12]),
        comm_messages=np.array([0, 3, 4]),
        max_evals=np.array([15, 15, 15]),
    )
    p = tmp_path / "a.csv"
    write_trace_csv(p, tr)
    back = read_trace_csv(p)
    assert back.comm_messages.dtype.kind == "i"
    write_trace_csv(tmp_path / "b.csv", back)
    assert p.read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert p.read_text().splitlines()[0] == "t,sim_seconds,f_value,coverage_fraction,comm_messages,max_evals"


def test_config_loading(tmp_path, tiny_config):
    c = load_config(tiny_config)
    assert c.agent_count == 4
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "none.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_config_hash_independent_of_key_order():
    a = ExperimentConfig.from_dict({"trials": 3, "agent_count": 5})
    b = ExperimentConfig.from_dict({"agent_count": 5, "trials": 3})
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash(ExperimentConfig.from_dict({"agent_count": 6, "trials": 3}))


def test_run_writes_outputs_and_manifest(tmp_path, tiny_config):
    out = tmp_path / "out"
    assert main(["run", "--config", str(tiny_config), "--out", str(out)]) == 0
    aggs = sorted(p.name for p in (out / "aggregates").iterdir())
    assert aggs == ["anaconda_n0_tf0.01_tc0.05.csv", "anaconda_n1_tf0.01_tc0.05.csv", "dfssg_tf0.01_tc0.05.csv"]
    assert len(list((out / "traces").iterdir())) == 3 * 2
    man = json.loads((out / "manifest.json").read_text())
    assert man["config_sha256"] == config_hash(load_config(tiny_config))
    assert set(man["outputs"]) >= {"summary.json", "aggregates/dfssg_tf0.01_tc0.05.csv"}
    assert not list(out.rglob(".*"))  # no temp files left behind


def test_seeded_runs_are_byte_identical(tmp_path, tiny_config):
    for name in ("a", "b"):
        assert main(["run", "--config", str(tiny_config), "--out", str(tmp_path / name), "--seed", "7"]) == 0
    assert digests(tmp_path / "a") == digests(tmp_path / "b")
    main(["run", "--config", str(tiny_config), "--out", str(tmp_path / "c"), "--seed", "8"])
    assert digests(tmp_path / "a") != digests(tmp_path / "c")


def test_missing_config_exit_code(tmp_path, capsys):
    missing = tmp_path / "absent.json"
    assert main(["run", "--config", str(missing), "--out", str(tmp_path / "o")]) == 2
    assert str(missing) in capsys.readouterr().err


def test_invalid_config_exit_code(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"agent_count": 0}))
    assert main(["run", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    assert "agent_count" in capsys.readouterr().err


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as e:
        main(["verify", "--suite", "nonsense"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["export", "x.csv", "--format", "xlsx"])
    assert e.value.code == 2


@pytest.mark.parametrize("suite", ["appendix2", "prop2", "prop3", "lemma1"])
def test_verify_suites_pass(suite, capsys):
    assert main(["verify", "--suite", suite]) == 0
    assert f"{suite}: PASS" in capsys.readouterr().out


def test_verify_failure_exit_code(monkeypatch, capsys):
    from anaconda_sim import verify

    def failing(seed=0):
        r = verify.SuiteResult("appendix2")
        r.add("forced", 1, 0, "==")
        return r

    monkeypatch.setitem(verify.SUITES, "appendix2", failing)
    assert main(["verify", "--suite", "appendix2"]) == 1


def test_export_round_trip_and_formats(tmp_path, tiny_config, capsys):
    out = tmp_path / "out"
    main(["run", "--config", str(tiny_config), "--out", str(out)])
    trace = sorted((out / "traces").iterdir())[0]
    capsys.readouterr()
    assert main(["export", str(trace), "--format", "csv"]) == 0
    assert capsys.readouterr().out == trace.read_text()

    assert main(["export", str(trace), "--format", "json", "--out", str(tmp_path / "t.json")]) == 0
    body = json.loads((tmp_path / "t.json").read_text())
    assert len(body["columns"]["coverage_fraction"]) == 100

    assert main(["export", str(out), "--format", "tsv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "variant\ttime_s\tmean_coverage\tstd_coverage"
    assert {l.split("\t")[0] for l in lines[1:]} == {
        "anaconda_n0_tf0.01_tc0.05",
        "anaconda_n1_tf0.01_tc0.05",
        "dfssg_tf0.01_tc0.05",
    }


def test_export_missing_trace(tmp_path):
    assert main(["export", str(tmp_path / "nope.csv")]) == 2
