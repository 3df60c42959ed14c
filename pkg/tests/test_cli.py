import json
import os
import subprocess
import sys

import pytest

from randsym.chain import SurveyRow
from randsym.cli import int_list, main
from randsym.report import ChainStepRecord, OracleRow, parse_table


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_int_list():
    assert int_list("1..4") == [1, 2, 3, 4]
    assert int_list("3,5, 8") == [3, 5, 8]
    with pytest.raises(Exception):
        int_list("4..1")


def test_exhaustive_survey(capsys):
    code, out, err = run(capsys, "survey", "--n", "1..4", "--exhaustive")
    assert code == 0
    rows = parse_table(out, "csv", SurveyRow)
    assert [str(r.p_hat) for r in rows] == ["1/2", "1/2", "1/2", "31/64"]
    assert "p_1 = 1/2" in err


def test_oracle_default_range(capsys):
    code, out, _ = run(capsys, "oracle", "--n", "1..3")
    assert code == 0
    assert [r.p_exact for r in parse_table(out, "csv", OracleRow)] == [0.5, 0.5, 0.5]


def test_decoupling_message(capsys):
    code, out, err = run(capsys, "decoupling", "--exhaustive-bits", "2,2")
    assert code == 0
    assert "all 65536 events hold" in err
    assert out.splitlines()[1] == '"2,2",2,65536,65536,true'


def test_chain_repeatable(tmp_path):
    paths = [tmp_path / f"c{i}.jsonl" for i in range(2)]
    for p in paths:
        assert main(["chain", "--n-max", "5", "--seeds", "1", "--epsilon", "0.1", "--output", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    recs = parse_table(paths[0].read_text(), "jsonl", ChainStepRecord)
    assert [r.n for r in recs] == [1, 2, 3, 4, 5]
    manifest = json.loads((tmp_path / "c0.jsonl.manifest.json").read_text())
    assert manifest["command"] == "chain" and manifest["config"]["seeds"] == [1]
    assert manifest["version"]


@pytest.mark.parametrize("argv", [
    ["survey", "--n", "3"],                                   # randomized, no seed
    ["survey", "--n", "3", "--seed", "1", "--trials", "0"],
    ["chain", "--n-max", "4", "--seed", "1", "--epsilon", "1.5"],
    ["chain", "--n-max", "0", "--seed", "1"],
    ["decoupling"],
    ["classify", "--n", "4", "--seed", "1", "--exhaustive"],
])
def test_config_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == ""
    assert "configuration error" in err


@pytest.mark.parametrize("argv", [
    ["survey", "--n", "8", "--exhaustive"],
    ["classify", "--n", "40", "--seed", "1", "--trials", "1"],
    ["decoupling", "--exhaustive-bits", "2,3"],
])
def test_guard_errors_exit_3(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 3 and out == ""


def test_failure_leaves_no_partial_files(tmp_path):
    out = tmp_path / "never.csv"
    assert main(["survey", "--n", "8", "--exhaustive", "--output", str(out)]) == 3
    assert os.listdir(tmp_path) == []


def test_classify_and_concentration(capsys):
    code, out, _ = run(capsys, "classify", "--n", "5", "--seed", "3", "--trials", "20")
    assert code == 0 and len(out.splitlines()) == 20
    code, out, _ = run(capsys, "concentration", "--sizes", "4,8")
    assert code == 0
    assert out.splitlines()[1].startswith("ones-offdiag:m=4,4,{2},3/8,")


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "randsym", "oracle", "--n", "2"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[1] == "2,bernoulli01,8,4,1/2"
