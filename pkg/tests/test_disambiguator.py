from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from euslem.disambiguator import (END, START, apply_constraints, disambiguate,
                                  dump_model, load_model, parse_constraints, sequence_score,
                                  train_model, viterbi_decode)
from euslem.errors import ConstraintSyntaxError, ModelFormatError, TrainingError
from euslem.readings import Analysis, Cohort, Reading, Tag, freeze
from oracles import exhaustive_decode


def reading(tag, lemma=None, level=2):
    a = Analysis(lemma or tag.lower(), (), freeze({"category": tag}))
    return Reading(a, Tag(level, tag))


def cohort(surface, *tags):
    return Cohort(surface, tuple(reading(t, surface) for t in tags))


def sentence_of(*tag_seqs):
    return [cohort(f"w{i}", *tags) for i, tags in enumerate(tag_seqs)]


# ---------------------------------------------------------------------------
# constraint grammar


def test_parse_single_rule():
    g = parse_constraints("REMOVE (VERB) IF (-1C (DET)) ;")
    (r,) = g.rules
    assert r.action == "REMOVE"
    (c,) = r.conditions
    assert (c.offset, c.careful, c.scan) == (-1, True, False)
    assert c.pattern.atoms == {"DET"}


def test_parse_empty_file_and_comments():
    assert len(parse_constraints("")) == 0
    assert len(parse_constraints("# nothing here\n")) == 0


def test_parse_empty_pattern_is_an_error():
    with pytest.raises(ConstraintSyntaxError, match="empty pattern"):
        parse_constraints("SELECT () IF (1 (X)) ;")


def test_parse_error_has_line():
    with pytest.raises(ConstraintSyntaxError) as exc:
        parse_constraints("REMOVE (A) ;\nDELETE (B) ;")
    assert exc.value.line == 2


def test_scan_offsets():
    (r,) = parse_constraints("SELECT (N) IF (1C* (V)) (-2* (D)) ;").rules
    assert [(c.offset, c.careful, c.scan) for c in r.conditions] == [(1, True, True),
                                                                     (-2, False, True)]


def test_remove_verb_after_determiner():
    g = parse_constraints("REMOVE (VERB) IF (-1C (DET)) ;")
    out = apply_constraints([cohort("the", "DET"), cohort("run", "NOUN", "VERB")], g)
    assert [r.tag.label for r in out[1].readings] == ["NOUN"]


def test_last_reading_is_never_removed():
    g = parse_constraints("REMOVE (VERB) IF (-1C (DET)) ;")
    out = apply_constraints([cohort("the", "DET"), cohort("run", "VERB")], g)
    assert [r.tag.label for r in out[1].readings] == ["VERB"]


def test_empty_grammar_is_identity():
    s = [cohort("a", "N", "V")]
    assert apply_constraints(s, parse_constraints("")) == s


def test_careful_needs_unambiguous_context():
    g = parse_constraints("REMOVE (VERB) IF (-1C (DET)) ;")
    s = [cohort("x", "DET", "PRON"), cohort("run", "NOUN", "VERB")]
    assert apply_constraints(s, g) == s
    loose = parse_constraints("REMOVE (VERB) IF (-1 (DET)) ;")
    assert len(apply_constraints(s, loose)[1].readings) == 1


def test_scan_searches_outward():
    g = parse_constraints("SELECT (N) IF (1* (V)) ;")
    s = [cohort("a", "N", "A"), cohort("b", "X"), cohort("c", "V")]
    assert [r.tag.label for r in apply_constraints(s, g)[0].readings] == ["N"]
    g2 = parse_constraints("SELECT (N) IF (1 (V)) ;")
    assert apply_constraints(s, g2) == s


def test_lemma_and_feature_atoms():
    a = Analysis("gizon", (), freeze({"category": "NOUN", "case": "ERG"}))
    b = Analysis("gizon", (), freeze({"category": "NOUN", "case": "ABS"}))
    s = [Cohort("gizonak", (Reading(a), Reading(b))), cohort("da", "AUX")]
    g = parse_constraints('REMOVE ("gizon" case=ERG) IF (1C (AUX)) ;')
    assert apply_constraints(s, g)[0].readings == (Reading(b),)


TAGS = ["N", "V", "A", "D"]
sentences = st.lists(
    st.lists(st.sampled_from(TAGS), min_size=1, max_size=4, unique=True),
    min_size=1, max_size=6).map(lambda seqs: sentence_of(*seqs))
patterns = st.sets(st.sampled_from(TAGS), min_size=1, max_size=1).map(
    lambda s: "(" + " ".join(sorted(s)) + ")")
conditions = st.tuples(st.integers(-2, 2), st.booleans(), st.booleans(), patterns).map(
    lambda c: f"({c[0]}{'C' if c[1] else ''}{'*' if c[2] else ''} {c[3]})")
rules_text = st.lists(
    st.tuples(st.sampled_from(["SELECT", "REMOVE"]), patterns,
              st.lists(conditions, max_size=2)).map(
        lambda r: f"{r[0]} {r[1]}" + (" IF " + " ".join(r[2]) if r[2] else "") + " ;"),
    max_size=5).map("\n".join)


@settings(max_examples=200, deadline=None)
@given(sentences, rules_text)
def test_constraints_shrink_never_empty_and_reach_fixpoint(sent, text):
    g = parse_constraints(text)
    out = apply_constraints(sent, g)
    assert len(out) == len(sent)
    for before, after in zip(sent, out):
        assert 1 <= len(after.readings) <= len(before.readings)
        assert set(after.readings) <= set(before.readings)
    assert apply_constraints(out, g) == out


# ---------------------------------------------------------------------------
# training


def _corpus(*seqs):
    return [[cohort(f"{t.lower()}{i}", t) for i, t in enumerate(seq)] for seq in seqs]


def test_hand_counted_transition():
    m = train_model(_corpus("NVN", "NN"), order=2, lam=1)
    assert m.tag_inventory == ("N", "V")
    assert m.transition(["N"], "V") == Fraction(2, 7)


def test_start_row_single_sentence():
    m = train_model(_corpus("N"), order=2, lam=1, inventory=["N", "V"])
    assert m.transition([START], "N") == Fraction(1, 2)


def test_rows_sum_to_one_and_are_positive():
    m = train_model(_corpus("NVN", "NN", "VAN"), order=3, lam=Fraction(1, 2))
    hists = list(m.transition_counts) + [("N", "A"), ("Z", "Z")]
    for h in hists:
        row = m.row(h)
        assert sum(row.values()) == 1
        assert all(p > 0 for p in row.values())


def test_ambiguous_training_token_is_named():
    corpus = [[cohort("a", "N"), cohort("bad", "N", "V")]]
    with pytest.raises(TrainingError, match="'bad'"):
        train_model(corpus)


def test_empty_training_corpus():
    with pytest.raises(TrainingError, match="empty"):
        train_model([])


def test_lambda_must_be_positive():
    with pytest.raises(TrainingError):
        train_model(_corpus("N"), lam=0)


def test_emission_backoff():
    m = train_model(_corpus("NV"), lam=1)
    # known form: (1 + 1) / (1 + 1 * (2 forms + 1))
    assert m.emission("n0", "zzz", "N") == Fraction(1, 2)
    assert m.emission("v1", "zzz", "N") == Fraction(1, 4)
    # unknown form, known lemma: the lemma table, same shape
    assert m.emission("unseen", "n0", "N") == Fraction(1, 2)
    # neither known: uniform over the inventory
    assert m.emission("unseen", "zzz", "V") == Fraction(1, 2)


def test_model_text_round_trip():
    corpus = [[Cohort(f"w{i}", (Reading(reading(t).analysis, Tag(3, t, ("case",))),))
               for i, t in enumerate(seq)] for seq in ("NVN", "NN")]
    m = train_model(corpus, order=3, level=3, params=("case",), lam=Fraction(1, 3))
    text = dump_model(m)
    again = load_model(text)
    assert dump_model(again) == text
    assert again.transition(["N", "V"], "N") == m.transition(["N", "V"], "N")


def test_model_format_errors_have_lines():
    with pytest.raises(ModelFormatError) as exc:
        load_model("MODEL order=2 level=2 lambda=1\nBOGUS\n")
    assert exc.value.line == 2
    with pytest.raises(ModelFormatError):
        load_model("not a model")


# ---------------------------------------------------------------------------
# decoding


def test_unambiguous_sentence_passes_through():
    m = train_model(_corpus("NV"))
    s = sentence_of(["V"], ["N"])
    assert [j for _, j in viterbi_decode(s, m)] == [0, 0]


def test_single_token_prefers_higher_score():
    m = train_model(_corpus("N", "N", "V"))
    s = [Cohort("w", (reading("V", "w"), reading("N", "w")))]
    (_, j), = viterbi_decode(s, m)
    assert j == 1
    assert sequence_score(s, [1], m) > sequence_score(s, [0], m)


def test_empty_sentence():
    m = train_model(_corpus("N"))
    assert viterbi_decode([], m) == []
    assert disambiguate([], None, m) == []


def test_ties_go_to_lowest_index():
    m = train_model(_corpus("N", "V"))
    s = [Cohort("x", (reading("V", "x"), reading("N", "x")))]
    assert sequence_score(s, [0], m) == sequence_score(s, [1], m)
    assert viterbi_decode(s, m)[0][1] == 0


def test_unknown_tag_is_smoothed_not_fatal():
    m = train_model(_corpus("NV"))
    s = sentence_of(["Q", "N"])
    assert len(viterbi_decode(s, m)) == 1


def test_disambiguate_constraints_then_decoder():
    m = train_model(_corpus("DN", "NV"))
    g = parse_constraints("REMOVE (V) IF (-1C (D)) ;")
    out = disambiguate([cohort("the", "D"), cohort("run", "N", "V")], g, m)
    assert [c.readings[0].tag.label for c in out] == ["D", "N"]
    assert all(len(c.readings) == 1 for c in out)


def _spec(m):
    return {"order": m.order, "inventory": m.tag_inventory, "lam": m.smoothing,
            "trans": {h: dict(c) for h, c in m.transition_counts.items()},
            "forms": dict(m.emission_form_counts), "lemmas": dict(m.emission_lemma_counts)}


train_seqs = st.lists(st.text(alphabet="NVAD", min_size=1, max_size=5), min_size=1, max_size=4)
decode_sents = st.lists(
    st.lists(st.sampled_from(TAGS), min_size=1, max_size=4),
    min_size=1, max_size=5)


@settings(max_examples=100, deadline=None)
@given(train_seqs, decode_sents, st.sampled_from([2, 3]),
       st.sampled_from([Fraction(1), Fraction(1, 2)]))
def test_viterbi_matches_exhaustive_search(train, sent_tags, order, lam):
    m = train_model(_corpus(*train), order=order, lam=lam)
    sent = [Cohort(f"{tags[0].lower()}{i}", tuple(reading(t, f"{t.lower()}{i}") for t in tags))
            for i, tags in enumerate(sent_tags)]
    got = tuple(j for _, j in viterbi_decode(sent, m))
    plain = [(c.surface, [(r.analysis.lemma, r.tag.label) for r in c.readings]) for c in sent]
    best_p, best = exhaustive_decode(plain, _spec(m))
    assert got == best
    assert sequence_score(sent, got, m) == best_p


def test_end_symbol_in_outcomes():
    m = train_model(_corpus("N"))
    assert END in m.row([START])
