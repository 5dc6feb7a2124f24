import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emovad.errors import BadEps, MalformedRow, OutputCollision
from emovad.lexicon import (
    Lexicon,
    aggregate_utterance,
    check_output_path,
    convert_cross_corpus,
    filter_by_conf,
    load_lexicon,
    smooth,
    tokenize,
    weak_vad_of_text,
)
from emovad.schema import UtteranceRecord, VadTriple


def make_lexicon(entries, eps=0.0):
    return Lexicon(
        entries={k: VadTriple(*v) for k, v in entries.items()},
        scale_applied="unit",
        smoothing_eps=eps,
    )


def write_lexicon(tmp_path, rows, header="token\tv\ta\td"):
    path = tmp_path / "lex.tsv"
    path.write_text(header + "\n" + "".join(r + "\n" for r in rows), encoding="utf-8")
    return str(path)


# -- load / normalize -----------------------------------------------------------


def test_load_one_to_nine_normalization(tmp_path):
    path = write_lexicon(
        tmp_path, ["low\t1\t1\t1", "mid\t5\t5\t5", "high\t9\t9\t9"]
    )
    lex = load_lexicon(path, scale="one_to_nine", eps=0.01)
    assert lex.lookup("low").as_tuple() == (0.01, 0.01, 0.01)
    assert lex.lookup("mid").as_tuple() == (0.5, 0.5, 0.5)
    assert lex.lookup("high").as_tuple() == (0.99, 0.99, 0.99)


def test_load_unit_scale_used_as_is(tmp_path):
    path = write_lexicon(tmp_path, ["calm\t0.8\t0.1\t0.6"])
    lex = load_lexicon(path, scale="unit", eps=0.0)
    assert lex.lookup("calm").as_tuple() == (0.8, 0.1, 0.6)


def test_load_clips_out_of_scale(tmp_path):
    path = write_lexicon(tmp_path, ["wild\t10\t0\t5"])
    lex = load_lexicon(path, scale="one_to_nine", eps=0.0)
    # 10 -> 9/8 clipped to 1; 0 -> -1/8 clipped to 0
    assert lex.lookup("wild").as_tuple() == (1.0, 0.0, 0.5)


def test_load_malformed_row(tmp_path):
    path = write_lexicon(tmp_path, ["bad\t1\t2"])
    with pytest.raises(MalformedRow) as err:
        load_lexicon(path, scale="one_to_nine")
    assert err.value.line_no == 2
    path = write_lexicon(tmp_path, ["bad\tx\t2\t3"])
    with pytest.raises(MalformedRow):
        load_lexicon(path, scale="one_to_nine")


def test_load_duplicate_token_last_wins(tmp_path, caplog):
    path = write_lexicon(tmp_path, ["tok\t1\t1\t1", "tok\t9\t9\t9"])
    with caplog.at_level("WARNING"):
        lex = load_lexicon(path, scale="one_to_nine", eps=0.0)
    assert lex.lookup("tok").as_tuple() == (1.0, 1.0, 1.0)
    assert any("duplicate" in r.message for r in caplog.records)


def test_lookup_is_lowercased_by_tokenizer(tmp_path):
    path = write_lexicon(tmp_path, ["HAPPY\t9\t9\t9"])
    lex = load_lexicon(path, scale="one_to_nine", eps=0.0)
    assert lex.lookup("happy") is not None


# -- smooth -------------------------------------------------------------------------


def test_smooth_formula():
    assert smooth(VadTriple(0, 0, 0), 0.01).as_tuple() == (0.01, 0.01, 0.01)
    assert smooth(VadTriple(0.5, 0.5, 0.5), 0.2).as_tuple() == (0.5, 0.5, 0.5)
    assert smooth(VadTriple(0.3, 0.7, 1.0), 0.0).as_tuple() == (0.3, 0.7, 1.0)


def test_smooth_bad_eps():
    with pytest.raises(BadEps):
        smooth(VadTriple(0.5, 0.5, 0.5), 0.5)
    with pytest.raises(BadEps):
        smooth(VadTriple(0.5, 0.5, 0.5), -0.01)


@given(
    x=st.floats(0, 1, allow_nan=False),
    e1=st.floats(0, 0.49),
    e2=st.floats(0, 0.49),
)
@settings(max_examples=100, deadline=None)
def test_smooth_composition_is_affine(x, e1, e2):
    v = VadTriple(x, x, x)
    twice = smooth(smooth(v, e1), e2)
    # composed map: scale = (1-2e1)(1-2e2), offset = e1(1-2e2)+e2
    scale = (1 - 2 * e1) * (1 - 2 * e2)
    offset = e1 * (1 - 2 * e2) + e2
    assert abs(twice.v - (scale * x + offset)) < 1e-12
    # monotone and bounded
    assert 0.0 <= twice.v <= 1.0


# -- tokenize ------------------------------------------------------------------------


def test_tokenize_examples():
    assert tokenize("I am NOT happy.") == ["i", "am", "not", "happy"]
    assert tokenize("") == []
    assert tokenize("well—done!") == ["well", "done"]


def test_tokenize_splits_non_alnum_runs():
    assert tokenize("a--b__c  d3") == ["a", "b", "c", "d3"]


# -- aggregate -----------------------------------------------------------------------


def test_aggregate_single_covered_token():
    lex = make_lexicon({"happy": (0.9, 0.6, 0.7)})
    res = aggregate_utterance(["happy"], lex)
    assert res.vad_text.as_tuple() == (0.9, 0.6, 0.7)
    assert res.vad_conf == 1.0


def test_aggregate_zero_coverage():
    lex = make_lexicon({})
    res = aggregate_utterance(["x", "y"], lex)
    assert res.vad_text is None and res.vad_conf == 0.0
    assert res.covered == 0 and res.total == 2


def test_aggregate_partial_coverage_mean():
    lex = make_lexicon({"good": (0.8, 0.4, 0.6), "bad": (0.2, 0.6, 0.4)})
    res = aggregate_utterance(["good", "bad", "zzz"], lex)
    # brute-force oracle over the entry list
    entries = [(0.8, 0.4, 0.6), (0.2, 0.6, 0.4)]
    expect = tuple(sum(e[i] for e in entries) / len(entries) for i in range(3))
    assert res.vad_text.as_tuple() == expect == (0.5, 0.5, 0.5)
    assert res.vad_conf == 2 / 3


def test_aggregate_token_order_invariant():
    lex = make_lexicon({"good": (0.8, 0.4, 0.6), "bad": (0.2, 0.6, 0.4)})
    a = aggregate_utterance(["good", "bad"], lex)
    b = aggregate_utterance(["bad", "good"], lex)
    assert a.vad_text.as_tuple() == pytest.approx(b.vad_text.as_tuple())


def test_aggregate_uncovered_insertion_changes_conf_not_text():
    lex = make_lexicon({"good": (0.8, 0.4, 0.6)})
    short = aggregate_utterance(["good"], lex)
    padded = aggregate_utterance(["good", "zzz", "qqq"], lex)
    assert short.vad_text == padded.vad_text
    assert padded.vad_conf == pytest.approx(1 / 3)


def test_aggregate_mean_containment():
    lex = make_lexicon(
        {"a": (0.1, 0.2, 0.3), "b": (0.9, 0.8, 0.7), "c": (0.4, 0.5, 0.6)}
    )
    res = aggregate_utterance(["a", "b", "c"], lex)
    for lo, hi, got in zip((0.1, 0.2, 0.3), (0.9, 0.8, 0.7), res.vad_text.as_tuple()):
        assert lo <= got <= hi


# -- heuristics pass ------------------------------------------------------------------


def test_negation_mirrors_valence_within_window():
    lex = make_lexicon({"happy": (0.9, 0.6, 0.7)})
    plain = weak_vad_of_text("i am happy", lex, heuristics=True)
    negated = weak_vad_of_text("i am not happy", lex, heuristics=True)
    assert plain.vad_text.v == pytest.approx(0.9)
    assert negated.vad_text.v == pytest.approx(1 - 0.9)
    assert negated.vad_text.a == plain.vad_text.a  # arousal untouched


def test_negation_window_expires():
    lex = make_lexicon({"happy": (0.9, 0.6, 0.7)})
    far = weak_vad_of_text("not one two three happy", lex, heuristics=True)
    assert far.vad_text.v == pytest.approx(0.9)


def test_intensifier_boosts_next_covered_token():
    lex = make_lexicon({"happy": (0.9, 0.6, 0.7), "sad": (0.1, 0.4, 0.3)})
    plain = weak_vad_of_text("happy sad", lex, heuristics=True)
    boosted = weak_vad_of_text("very happy sad", lex, heuristics=True)
    # weights 1.5 and 1.0 -> mean shifts toward happy
    expect_v = (1.5 * 0.9 + 1.0 * 0.1) / 2.5
    assert plain.vad_text.v == pytest.approx(0.5)
    assert boosted.vad_text.v == pytest.approx(expect_v)


def test_heuristics_off_by_default():
    lex = make_lexicon({"happy": (0.9, 0.6, 0.7)})
    res = weak_vad_of_text("not happy", lex)
    assert res.vad_text.v == pytest.approx(0.9)


# -- filter / conversion ---------------------------------------------------------------


def fake_record(rec_id, conf, labels=("joy",), text="x"):
    return UtteranceRecord(
        id=rec_id,
        text=text,
        labels=frozenset(labels),
        vad=VadTriple(0.5, 0.5, 0.5),
        vad_conf=conf,
    )


def test_filter_by_conf_inclusive_boundary():
    records = [fake_record("a", 0.5), fake_record("b", 0.8), fake_record("c", 1.0)]
    kept = filter_by_conf(records, 0.8)
    assert [r.id for r in kept] == ["b", "c"]


def test_filter_by_conf_edges():
    records = [fake_record("a", 0.5), fake_record("b", 1.0)]
    assert filter_by_conf(records, 0.0) == records
    assert [r.id for r in filter_by_conf(records, 1.0)] == ["b"]


def test_convert_cross_corpus_maps_and_defaults_to_other():
    lex = make_lexicon({"happy": (0.9, 0.6, 0.7)})
    records = [
        fake_record("1", 1.0, labels=("happiness",), text="so happy"),
        fake_record("2", 1.0, labels=("boredom",), text="zzz"),
    ]
    out = convert_cross_corpus(records, {"happiness": "joy"}, lex)
    assert out[0].labels == frozenset({"joy"})
    assert out[0].vad.v == pytest.approx(0.9)
    assert out[0].vad_conf == pytest.approx(0.5)
    assert out[1].labels == frozenset({"other"})
    assert out[1].vad_conf == 0.0  # excluded by the conf filter downstream


def test_output_collision_guard(tmp_path):
    dev = tmp_path / "dev.jsonl"
    dev.write_text("", encoding="utf-8")
    with pytest.raises(OutputCollision):
        check_output_path(str(dev), [str(dev)])
    check_output_path(str(tmp_path / "dev_dd_weak.jsonl"), [str(dev)])
