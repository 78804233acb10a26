import json

import pytest

from jetad.cli import main

W = "(x1+x2)/(x2*x3)"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    assert out.endswith("\n") and out.count("\n") == 1 or "--pretty" in argv
    return code, json.loads(out)


def test_gradient(capsys):
    code, doc = run(capsys, "--expr", W, "--at", "1,2,3", "--op", "gradient")
    assert code == 0
    assert doc["value"] == 0.5
    assert doc["result"] == pytest.approx([1 / 6, -1 / 12, -1 / 6], abs=1e-7)
    assert doc["tape"] == {"N": 3, "S": 6}
    assert set(doc) == {"operator", "expr", "inputs", "x", "value", "result", "adjuncts",
                        "timing_us", "tape"}


def test_dir1_identity(capsys):
    code, doc = run(capsys, "--expr", "x1", "--at", "7", "--op", "dir1", "--v", "2")
    assert code == 0 and doc["result"] == 2.0


def test_hvp(capsys):
    code, doc = run(capsys, "--expr", W, "--at", "1,2,3", "--op", "hvp", "--v", "1,0,0")
    assert doc["result"] == pytest.approx([0, -0.0833333, -0.0555556], abs=1e-7)
    assert set(doc["adjuncts"]) == {"vg", "grad"}


@pytest.mark.parametrize("op, extra, adjuncts", [
    ("dir2", ["--v", "1,0,0", "--u", "0,1,0"], {"vg", "ug"}),
    ("dir3", ["--v", "1,0,0", "--u", "0,1,0", "--w", "0,0,1"], {"vg", "ug", "wg", "vHu", "vHw", "uHw"}),
    ("taylor", ["--v", "1,0,0", "--d2v", "0,1,0", "--d3v", "0,0,1"], set()),
    ("hessian", [], {"grad"}),
    ("third", [], {"grad", "hess"}),
    ("grad_dir2", ["--v", "1,0,0", "--u", "0,0,1"], {"vg", "ug", "vHu", "grad", "Hv", "Hu"}),
    ("hessian_hvp", [], {"asymmetry"}),
    ("trace_mh", ["--M", "1,0,0;0,1,0;0,0,1"], set()),
])
def test_operator_adjunct_keys(capsys, op, extra, adjuncts):
    code, doc = run(capsys, "--expr", W, "--at", "1,2,3", "--op", op, *extra)
    assert code == 0 and doc["operator"] == op
    assert set(doc["adjuncts"]) == adjuncts


def test_symmetric_arrays_expanded(capsys):
    _, doc = run(capsys, "--expr", W, "--at", "1,2,3", "--op", "third")
    T = doc["result"]
    assert len(T) == 3 and all(len(r) == 3 and all(len(c) == 3 for c in r) for r in T)
    assert T[0][1][2] == T[2][1][0]


def test_round_trip_and_determinism(capsys):
    args = ["--expr", "sin(x1)/3", "--at", "0.1", "--op", "gradient", "--no-timing"]
    _, a = run(capsys, *args)
    _, b = run(capsys, *args)
    assert a == b and a["timing_us"] is None
    import math
    assert a["result"][0] == math.cos(0.1) / 3


def test_exit_codes(capsys):
    assert run(capsys, "--expr", "x1 +", "--at", "1", "--op", "gradient")[0] == 2
    code, doc = run(capsys, "--expr", "log(x1 - x2)", "--at", "1,2", "--op", "gradient")
    assert code == 3 and doc["error"]["node"] == 4
    assert run(capsys, "--expr", W, "--at", "1,2", "--op", "gradient")[0] == 4
    assert run(capsys, "--expr", W, "--at", "1,2,3", "--op", "hvp", "--v", "1,0")[0] == 4
    assert run(capsys, "--expr", W, "--at", "1,2,3", "--op", "hvp")[0] == 2
    assert run(capsys, "--expr", W, "--at", "1,x,3", "--op", "gradient")[0] == 2
    assert run(capsys, "--expr", W, "--at", "1,2,3", "--op", "trace_mh", "--M", "1,2;3")[0] == 2


def test_expr_file_and_pretty(tmp_path, capsys):
    p = tmp_path / "f.txt"
    p.write_text(W + "\n")
    code = main(["--expr-file", str(p), "--at", "1,2,3", "--op", "hessian", "--pretty"])
    out = capsys.readouterr().out
    assert code == 0 and json.loads(out)["result"][2][2] == pytest.approx(1 / 9)
    assert "\n  " in out


def test_check_single_expression(capsys):
    code, doc = run(capsys, "--expr", W, "--at", "1,2,3", "--op", "check")
    assert code == 0 and doc["result"]["instances"] == 1 and not doc["result"]["failures"]


def test_check_small_corpus(capsys):
    code, doc = run(capsys, "--op", "check", "--corpus-size", "5", "--seed", "4")
    assert code == 0 and doc["result"]["instances"] == 5


def test_seed_check(capsys):
    code, doc = run(capsys, "--expr", W, "--at", "1,2,3", "--op", "dir2", "--v", "1,0,0",
                    "--u", "0,1,0", "--seed-check")
    assert code == 0 and all(c["ok"] for c in doc["seed_check"])
