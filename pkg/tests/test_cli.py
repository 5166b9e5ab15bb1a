import csv
import io
import json
import subprocess
import sys

import pytest

from alignmon.cli import main
from alignmon.ingest import parse_tra


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_sweep_csv(capsys, tmp_path):
    out_file = tmp_path / "sweep.csv"
    code, out, err = run_cli(["sweep", "--sweep-points", "5", "-o", str(out_file)],
                             capsys)
    assert code == 0
    rows = list(csv.DictReader(out_file.open()))
    assert len(rows) == 5
    assert set(rows[0]) == {"parameter", "brier", "spherical"}


def test_monitor_jsonl(capsys):
    code, out, err = run_cli(["monitor", "--env", "die", "--corruption", "invert",
                              "--steps", "30", "--seed", "1"], capsys)
    assert code == 0
    records = [json.loads(l) for l in out.splitlines()]
    assert len(records) == 30
    assert {"t", "est", "lo", "hi", "true_aes"} <= set(records[0])


def test_monitor_differential(capsys):
    code, out, err = run_cli(["monitor", "--env", "die", "--corruption", "invert",
                              "--reference", "environment", "--steps", "120",
                              "--seed", "1"], capsys)
    assert code == 0
    records = [json.loads(l) for l in out.splitlines()]
    assert records[-1]["decision"] == "bot"


def test_table_small(capsys):
    code, out, err = run_cli(["table", "--benchmarks", "die", "--corruptions",
                              "invert", "--references", "environment",
                              "--runs", "2", "--steps", "300"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 2
    assert rows[0]["decision"] == "bot"
    assert "die" in err  # summary goes to stderr


def test_coverage_small(capsys):
    code, out, err = run_cli(["coverage", "--runs", "5", "--steps", "100",
                              "--delta", "0.1", "--format", "jsonl"], capsys)
    assert code == 0
    recs = [json.loads(l) for l in out.splitlines()]
    assert len(recs) == 4
    assert all(r["rate"] <= 0.1 for r in recs)


def test_bench_small(capsys):
    code, out, err = run_cli(["bench", "--sizes", "10", "100", "--iters", "30"],
                             capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["support"]) for r in rows] == [10, 100]


def test_corrupt_roundtrip(capsys, tmp_path):
    out_file = tmp_path / "c.tra"
    code, out, err = run_cli(["corrupt", "die", "--kind", "invert",
                              "-o", str(out_file)], capsys)
    assert code == 0
    chain = parse_tra(out_file.read_text())
    assert chain.n == 13


def test_corrupt_with_params(capsys):
    code, out, err = run_cli(["corrupt", "die", "--kind", "sharpen",
                              "--param", "power=2.0"], capsys)
    assert code == 0
    assert out.startswith("13 ")


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["stream", "--mode", "sideways"])
    assert exc.value.code == 1


def test_data_error_exit_code(capsys):
    code, out, err = run_cli(["corrupt", "no_such_file.tra", "--kind", "invert"],
                             capsys)
    assert code == 2


def test_bad_param_is_usage_error(capsys):
    code, out, err = run_cli(["corrupt", "die", "--kind", "sharpen",
                              "--param", "power"], capsys)
    assert code == 1


def test_stream_subprocess_end_to_end():
    lines = '{"p": [1, 0], "x": 0}\n{"p": [0.5, 0.6], "x": 0}\n'
    proc = subprocess.run([sys.executable, "-m", "alignmon.cli", "stream"],
                          input=lines, capture_output=True, text=True)
    assert proc.returncode == 2
    assert json.loads(proc.stdout.splitlines()[0])["t"] == 1
    assert json.loads(proc.stderr.splitlines()[0])["error"] == "invalid_probability"


def test_config_file_flags_win(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sweep_points": 3, "sweep_lo": 40, "sweep_hi": 60}))
    code, out, err = run_cli(["sweep", "--config", str(cfg),
                              "--sweep-points", "4"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 4  # flag beat the file
    assert float(rows[0]["parameter"]) == 40.0
