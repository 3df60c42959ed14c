import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from randsym.chain import IncrementRow, SurveyRow, run_chains
from randsym.report import (ChainStepRecord, ConcentrationRow, OracleRow, RunManifest, chain_records,
                            parse_table, render_table)


def test_empty_table_is_header_only():
    assert render_table([], "csv", SurveyRow) == "n,trials,singular,p_hat,stderr,logdet_scaled\n"
    assert render_table([], "jsonl", SurveyRow) == ""
    with pytest.raises(TypeError):
        render_table([], "csv")


def test_survey_row_csv():
    row = SurveyRow(2, 8, 4, Fraction(1, 2), 0.0, 0.25)
    assert render_table([row]) == "n,trials,singular,p_hat,stderr,logdet_scaled\n2,8,4,1/2,0,0.25\n"


def test_nan_and_none_rendering():
    row = SurveyRow(1, 2, 1, Fraction(1, 2), 0.0, math.nan)
    line = json.loads(render_table([row], "jsonl"))
    assert line["schema"] == "SurveyRow/1" and line["logdet_scaled"] == "nan"
    back = parse_table(render_table([row], "jsonl"), "jsonl")[0]
    assert math.isnan(back.logdet_scaled)
    rec = ChainStepRecord(0, 1, 1, 0, None, None, 1.1, True)
    assert render_table([rec]).splitlines()[1] == "0,1,1,0,,,1.1,true"


def test_mixed_records_rejected():
    with pytest.raises(TypeError):
        render_table([SurveyRow(2, 8, 4, Fraction(1, 2), 0.0, 0.25), OracleRow(2, "bernoulli01", 8, 4, Fraction(1, 2))])
    with pytest.raises(TypeError):
        render_table([OracleRow(2, "bernoulli01", 8, 4, Fraction(1, 2))], kind=SurveyRow)
    with pytest.raises(ValueError):
        render_table([], "xml", SurveyRow)


fractions = st.fractions(min_value=0, max_value=1, max_denominator=10**9)
floats = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(st.lists(st.builds(SurveyRow, st.integers(1, 80), st.integers(1, 10**6), st.integers(0, 10**6),
                          fractions, floats, floats), max_size=6))
def test_jsonl_round_trip_is_exact(rows):
    assert parse_table(render_table(rows, "jsonl", SurveyRow), "jsonl") == rows


@given(st.lists(st.builds(ConcentrationRow, st.sampled_from(["ones-offdiag", "a,b"]), st.integers(1, 64),
                          st.just("{0}"), fractions, st.none() | floats, st.none() | floats,
                          st.sampled_from(["ExactEnum", "MonteCarlo"]), st.booleans()), max_size=5))
def test_csv_round_trip_keeps_exact_columns(rows):
    back = parse_table(render_table(rows, "csv", ConcentrationRow), "csv", ConcentrationRow)
    assert len(back) == len(rows)
    for a, b in zip(rows, back):
        assert (a.form, a.n, a.interval, a.probability, a.method, a.hypothesis_met) == \
            (b.form, b.n, b.interval, b.probability, b.method, b.hypothesis_met)
        for x, y in ((a.stderr, b.stderr), (a.bound, b.bound)):
            assert (x is None) == (y is None)
            if x is not None:
                assert y == pytest.approx(x, rel=1e-5, abs=1e-300)


def test_chain_records_round_trip():
    recs = chain_records(run_chains(3, 6, seed=2, classify_up_to=6))
    assert len(recs) == 18
    assert parse_table(render_table(recs, "jsonl"), "jsonl", ChainStepRecord) == recs
    # CSV keeps six significant digits of the real column
    back = parse_table(render_table(recs, "csv"), "csv", ChainStepRecord)
    assert [r.x_value for r in back] == pytest.approx([r.x_value for r in recs], rel=1e-6)
    assert [r.rank for r in back] == [r.rank for r in recs]
    assert [(r.increment, r.cls) for r in back] == [(r.increment, r.cls) for r in recs]


def test_parse_rejects_wrong_header_and_schema():
    with pytest.raises(ValueError):
        parse_table("a,b\n1,2\n", "csv", SurveyRow)
    with pytest.raises(ValueError):
        parse_table('{"schema":"SurveyRow/9","n":1}\n', "jsonl")
    row = IncrementRow("SingularNormal", 2, 3, 4, Fraction(3, 4), 0.2)
    with pytest.raises(TypeError):
        parse_table(render_table([row], "jsonl"), "jsonl", SurveyRow)


def test_manifest_json():
    m = RunManifest("survey", {"n": [1, 2]}, "0.1.0", 0.5, 10, {"p_1": Fraction(1, 2)})
    obj = json.loads(m.to_json())
    assert obj["summary"] == {"p_1": "1/2"} and obj["total_trials"] == 10
