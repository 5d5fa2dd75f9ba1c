import json
import re
import subprocess
import sys

import pytest

from btstrat.cli_reports import main


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr()


def test_report_json(capsys):
    code, out = run(["report", "--n", "3", "--h", "0,2"], capsys)
    assert code == 0
    doc = json.loads(out.out)
    assert doc["header"]["schema"] == 1
    assert doc["header"]["field"]["q"] == 3
    assert "h=0,2" in doc["header"]["gram_fixture"]
    assert all(c["ok"] for c in doc["checks"])


def test_report_all_tuples_md(capsys):
    code, out = run(["report", "--n", "2", "--format", "md"], capsys)
    assert code == 0
    assert out.out.startswith("#")


def test_poset_dot(capsys):
    code, out = run(["poset", "--n", "3", "--h", "0", "--format", "dot"], capsys)
    assert code == 0
    text = out.out
    assert text.startswith("digraph btstrat {")
    nodes = re.findall(r'^  (idx_[0-9a-f]{12}) \[label="([^"]*)"\];$', text, re.M)
    edges = re.findall(r"^  (idx_\w+) -> (idx_\w+);$", text, re.M)
    assert len(nodes) == 29 and len(edges) == 28
    assert all(re.fullmatch(r"I=[^;]*;t0=[^;]*;t1=[^;]*;dim=\d+", lab) for _, lab in nodes)
    for word in ("rankdir", "pos=", "rank=", "layout"):
        assert word not in text


def test_poset_needs_tuple(capsys):
    code, out = run(["poset", "--n", "3"], capsys)
    assert code == 2


def test_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["verify", "--n", "2", "--suite", "bt", "--out", str(a)]) == 0
    assert main(["verify", "--n", "2", "--suite", "bt", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("suite", ["coxeter", "lattice", "hermitian", "dl", "bt", "bijection"])
def test_verify_suites(suite, capsys):
    code, out = run(["verify", "--n", "2", "--suite", suite], capsys)
    assert code == 0
    doc = json.loads(out.out)
    assert doc["checks"] and all(c["suite"] == suite for c in doc["checks"])


def test_unknown_suite(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--n", "2", "--suite", "nope"])
    assert exc.value.code == 2


@pytest.mark.parametrize("argv", [
    ["report", "--n", "3", "--h", "0,1"],
    ["report", "--n", "3", "--h", "2,0"],
    ["report", "--n", "3", "--q", "6"],
    ["report", "--n", "0"],
])
def test_bad_config(argv, capsys):
    code, out = run(argv, capsys)
    assert code == 2
    assert "error" in out.err


def test_module_entry():
    res = subprocess.run([sys.executable, "-m", "btstrat", "report", "--n", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["header"]["command"] == "report"
