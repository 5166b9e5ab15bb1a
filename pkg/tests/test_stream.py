import io
import json

from alignmon.harness.stream import stream_monitor


def run_stream(lines, **kw):
    out, err = io.StringIO(), io.StringIO()
    code = stream_monitor(lines, out, err, **kw)
    outs = [json.loads(l) for l in out.getvalue().splitlines()]
    errs = [json.loads(l) for l in err.getvalue().splitlines()]
    return code, outs, errs


def test_average_stream_shrinks():
    lines = ['{"p": [1, 0], "x": 0}'] * 20
    code, outs, errs = run_stream(lines)
    assert code == 0 and not errs
    assert [o["t"] for o in outs] == list(range(1, 21))
    assert all(o["est"] == 0.0 for o in outs)
    assert outs[-1]["hi"] - outs[-1]["lo"] < outs[0]["hi"] - outs[0]["lo"]


def test_differential_identical_predictions_undecided():
    lines = [json.dumps({"p": [0.5, 0.5], "pref": [0.5, 0.5], "x": i % 2})
             for i in range(50)]
    code, outs, errs = run_stream(lines, mode="differential")
    assert code == 0
    assert all(o["decision"] == "undecided" for o in outs)


def test_invalid_probability_flagged():
    code, outs, errs = run_stream(['{"p": [0.5, 0.6], "x": 0}'])
    assert code == 2
    assert errs[0]["error"] == "invalid_probability"
    assert errs[0]["line"] == 1
    assert not outs


def test_malformed_and_recovery():
    lines = ['not json', '{"p": [1, 0]}', '{"p": [1, 0], "x": 0}']
    code, outs, errs = run_stream(lines)
    assert code == 2
    assert [e["error"] for e in errs] == ["malformed_record", "malformed_record"]
    assert len(outs) == 1 and outs[0]["t"] == 1


def test_dimension_mismatch():
    lines = ['{"p": [1, 0], "x": 0}', '{"p": [0.2, 0.3, 0.5], "x": 2}']
    code, outs, errs = run_stream(lines)
    assert code == 2
    assert errs[0]["error"] == "dimension_mismatch"


def test_sparse_prediction_needs_n():
    code, outs, errs = run_stream(['{"p": {"3": 1.0}, "x": 3}'])
    assert errs[0]["error"] == "malformed_record"
    code, outs, errs = run_stream(['{"p": {"3": 1.0}, "n": 8, "x": 3}'])
    assert code == 0 and outs[0]["est"] == 0.0


def test_index_out_of_range():
    code, outs, errs = run_stream(['{"p": [1, 0], "x": 5}'])
    assert errs[0]["error"] == "index_out_of_range"


def test_blank_lines_skipped():
    code, outs, errs = run_stream(["", '{"p": [1, 0], "x": 0}', "   "])
    assert code == 0 and len(outs) == 1
