import json
import os

import numpy as np
import pytest

from buildstream import cli
from buildstream.exceptions import MissingMetric, ParseError
from buildstream.io import dataset_to_csv, parse_dataset, read_dataset, write_dataset
from buildstream.metrics import DEFAULT_SCHEMA, AggregationStrategy, BuildOutcome
from buildstream.synth import generate_stream, jazz_like_script

HEADER = "build_id,ordinal,outcome," + ",".join(DEFAULT_SCHEMA.metrics)


def row(build_id, ordinal, outcome, value=1.0, first=None):
    vals = [value] * 42
    if first is not None:
        vals[0] = first
    return f"{build_id},{ordinal},{outcome}," + ",".join(repr(float(v)) for v in vals)


# -------------------------------------------------------------------- io

def test_csv_round_trip(tmp_path):
    data = generate_stream(jazz_like_script(seed=1, noise_rate=0.1), 120)
    path = tmp_path / "d.csv"
    write_dataset(data, path)
    back = read_dataset(path)
    assert len(back) == len(data)
    for a, b in zip(data, back):
        assert a.build_id == b.build_id and a.ordinal == b.ordinal and a.outcome == b.outcome
        assert np.array_equal(a.metrics, b.metrics)
    assert dataset_to_csv(back) == path.read_text()


def test_header_is_exact():
    data = generate_stream(jazz_like_script(seed=1), 3)
    assert dataset_to_csv(data).splitlines()[0] == HEADER


def test_missing_metric_column():
    header = HEADER.rsplit(",", 1)[0]
    line = row("b1", 0, "success").rsplit(",", 1)[0]
    with pytest.raises(ParseError) as info:
        parse_dataset([header + "\n", line + "\n"])
    assert info.value.line == 2


def test_bad_value_reports_line():
    lines = [HEADER, row("b1", 0, "success"), row("b2", 1, "success").replace("1.0", "abc", 1), ""]
    with pytest.raises(ParseError) as info:
        parse_dataset("\n".join(lines).splitlines(keepends=True))
    assert info.value.line == 3
    assert "line 3" in str(info.value)


def test_unknown_outcome_and_duplicate_ordinal():
    with pytest.raises(ParseError, match="line 2"):
        parse_dataset([HEADER + "\n", row("b1", 0, "maybe") + "\n"])
    with pytest.raises(ParseError, match="line 3"):
        parse_dataset([HEADER + "\n", row("b1", 0, "success") + "\n", row("b2", 0, "failure") + "\n"])


def test_multi_row_build_aggregation():
    lines = [HEADER + "\n", row("b1", 0, "failure", 2.0, first=1.0) + "\n",
             row("b1", 0, "failure", 4.0, first=9.0) + "\n", row("b2", 1, "success", 3.0) + "\n"]
    data = parse_dataset(lines, aggregate=AggregationStrategy.MAX)
    assert len(data) == 2
    assert data[0].metrics[0] == 9.0 and data[0].metrics[1] == 4.0
    mean = parse_dataset(lines, aggregate=AggregationStrategy.MEAN)
    assert mean[0].metrics[0] == 5.0 and mean[0].metrics[1] == 3.0


def test_multi_row_conflicting_outcomes():
    lines = [HEADER + "\n", row("b1", 0, "failure") + "\n", row("b1", 0, "success") + "\n"]
    with pytest.raises(ParseError, match="conflicting"):
        parse_dataset(lines)


def test_timestamp_ordering():
    header = HEADER.replace("ordinal", "timestamp")
    lines = [header + "\n", row("late", 300.5, "success") + "\n", row("early", 100, "failure") + "\n",
             row("mid-a", 200, "success") + "\n", row("mid-b", 200, "failure") + "\n"]
    data = parse_dataset(lines)
    assert [b.build_id for b in data] == ["early", "mid-a", "mid-b", "late"]
    assert [b.ordinal for b in data] == [0, 1, 2, 3]
    assert data[0].outcome == BuildOutcome.FAILURE


# ------------------------------------------------------------------- cli

@pytest.fixture(scope="module")
def dataset_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "builds.csv"
    write_dataset(generate_stream(jazz_like_script(seed=3, noise_rate=0.1, drift_at=120), 240), path)
    return path


def run(argv):
    return cli.main([str(a) for a in argv])


def test_generate_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["generate", "--output", a, "--seed", 5, "--count", 50]) == 0
    assert run(["generate", "--output", b, "--seed", 5, "--count", 50]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(read_dataset(a)) == 50


def test_generate_from_script(tmp_path):
    script = tmp_path / "s.json"
    script.write_text(json.dumps({"preset": "jazz-like", "seed": 8, "drift_at": None}))
    out = tmp_path / "o.csv"
    assert run(["generate", "--input", script, "--output", out, "--count", 30]) == 0
    assert out.read_text() == dataset_to_csv(generate_stream(jazz_like_script(seed=8, drift_at=None), 30))


def test_evaluate_happy_path_and_default_phases(tmp_path, dataset_csv):
    out = tmp_path / "ev"
    assert run(["evaluate", "--input", dataset_csv, "--output", out]) == 0
    names = {p.name for p in out.iterdir()}
    assert names == {"report.json", "accuracy.csv", "rates.csv", "drifts.csv", "feature_drifts.csv"}
    report = json.loads((out / "report.json").read_text())
    assert report["phases"] == [["Phase 1", 21, 40], ["Phase 2", 41, 80], ["Phase 3", 81, 180], ["Phase 4", 181, 240]]
    assert report["summary"]["stream_length"] == 220
    acc = (out / "accuracy.csv").read_text().splitlines()
    assert acc[0] == "index,cumulative_accuracy" and len(acc) == 221
    assert list(report)[:3] == ["config", "summary", "phases"]


@pytest.mark.parametrize("command", ["evaluate", "sequences", "compare"])
def test_byte_identical_reruns(tmp_path, dataset_csv, command):
    outs = [tmp_path / "r1", tmp_path / "r2"]
    for out in outs:
        assert run([command, "--input", dataset_csv, "--output", out, "--seed", 4]) == 0
    files = sorted(p.name for p in outs[0].iterdir())
    assert files == sorted(p.name for p in outs[1].iterdir())
    for name in files:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_rerun_from_config_echo(tmp_path, dataset_csv):
    first = tmp_path / "first"
    assert run(["sequences", "--input", dataset_csv, "--output", first, "--sequences", 5,
                "--tau", 0.2, "--seed", 2]) == 0
    report = json.loads((first / "report.json").read_text())
    assert report["config"]["sequences"] == 5 and report["config"]["tau"] == 0.2
    second = tmp_path / "second"
    assert run(["sequences", "--config", first / "report.json", "--output", second]) == 0
    again = json.loads((second / "report.json").read_text())
    assert "output" not in report["config"]
    assert again == report


def test_bsm_seed_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("BSM_SEED", "6")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["generate", "--output", a, "--count", 20]) == 0
    monkeypatch.delenv("BSM_SEED")
    assert run(["generate", "--output", b, "--count", 20, "--seed", 6]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_usage_errors(tmp_path, dataset_csv, capsys):
    assert run(["evaluate", "--input", dataset_csv]) == 1
    assert run(["nonsense"]) == 1
    assert run(["evaluate", "--input", dataset_csv, "--output", tmp_path / "x", "--tau", -1]) == 1
    err = capsys.readouterr().err
    assert "--tau" in err
    assert run(["evaluate", "--input", dataset_csv, "--output", tmp_path / "x", "--phases", "80,40"]) == 1
    assert not (tmp_path / "x").exists()


def test_data_errors_leave_no_files(tmp_path, capsys):
    out = tmp_path / "out"
    assert run(["evaluate", "--input", tmp_path / "missing.csv", "--output", out]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text(HEADER + "\n" + row("b1", 0, "success") + "\n" + row("b2", 1, "sucess") + "\n")
    assert run(["evaluate", "--input", bad, "--output", out]) == 2
    assert "line 3" in capsys.readouterr().err
    assert not out.exists()


def test_internal_error_exit_code(tmp_path, dataset_csv, monkeypatch):
    def boom(*_, **__):
        raise RuntimeError("kaput")

    monkeypatch.setattr(cli, "evaluate_chronological", boom)
    out = tmp_path / "out"
    assert run(["evaluate", "--input", dataset_csv, "--output", out]) == 3
    assert not out.exists()


def test_write_outputs_is_all_or_nothing(tmp_path, monkeypatch):
    calls = []
    real = os.replace

    def tracking(src, dst):
        calls.append(dst)
        return real(src, dst)

    monkeypatch.setattr(cli.os, "replace", tracking)
    cli.write_outputs({"a.txt": "1", "b.txt": "2"}, tmp_path / "w")
    assert len(calls) == 2
    assert sorted(p.name for p in (tmp_path / "w").iterdir()) == ["a.txt", "b.txt"]
