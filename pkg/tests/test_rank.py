"""Scoring models, candidate scoring, filters, and model file round-trips."""

from __future__ import annotations

import itertools
import math

import pytest

from treeqg.generate import GenCandidate, apply_template
from treeqg.induce import IdfModel, TrainingTriple, build_idf
from treeqg.rank import (
    BEGIN,
    END,
    UNKNOWN_SIG,
    MorphNgramModel,
    QuestionWordModel,
    RankModels,
    StageCounts,
    answer_condition,
    basic_filter,
    build_morph_model,
    build_qword_model,
    generation_stats,
    load_idf_model,
    load_morph_model,
    load_qword_model,
    mean_filter,
    morph_signature,
    question_signatures,
    save_idf_model,
    save_morph_model,
    save_qword_model,
    score_candidate,
)
from treeqg.template import parse_template_line

from tests.conftest import make_tree

WORKED = "When did [r.nsubj#1] [r.lemma] ?\t<r.obl#4>"


def cand(question: str, answer: str, score: float | None = None, **kw) -> GenCandidate:
    defaults = dict(template_id=0, sent_id="s1", source_text="the whole sentence")
    defaults.update(kw)
    return GenCandidate(question=question, answer=answer, score=score, **defaults)


def test_morph_signature(graduation_tree):
    sigs = [morph_signature(t) for t in graduation_tree.tokens]
    assert sigs == [
        "PROPN|Number=Sing",
        "VERB|Mood=Ind|Tense=Past|VerbForm=Fin",
        "ADP|_",
        "NUM|NumType=Card",
    ]


def test_morph_signature_sorts_features_case_insensitively():
    from tests.conftest import make_token

    token = make_token(
        1, "x", 0, "root", upos="NOUN", feats=(("number", "Plur"), ("Case", "Nom"))
    )
    assert morph_signature(token) == "NOUN|Case=Nom|number=Plur"


def two_sig_model() -> MorphNgramModel:
    tree = make_tree([("dogs", 0, "root", None, "NOUN"), ("bark", 1, "dep", None, "VERB")])
    return build_morph_model([tree], n=3, alpha=1.0)


def test_two_token_sentence_yields_three_trigrams():
    model = two_sig_model()
    assert model.ngrams == {
        (BEGIN, BEGIN, "NOUN|_"): 1,
        (BEGIN, "NOUN|_", "VERB|_"): 1,
        ("NOUN|_", "VERB|_", END): 1,
    }
    assert model.vocab == frozenset({"NOUN|_", "VERB|_", END})


def test_smoothed_distribution_sums_to_one():
    model = two_sig_model()
    for context in [
        (BEGIN, BEGIN),
        (BEGIN, "NOUN|_"),
        ("NOUN|_", "VERB|_"),
        ("VERB|_", "VERB|_"),  # unseen context
    ]:
        total = sum(model.prob(sig, context) for sig in model.vocab)
        total += model.prob("NEVER|seen", context)
        assert total == pytest.approx(1.0)


def test_observed_event_outscores_unobserved():
    model = two_sig_model()
    assert model.prob("NOUN|_", (BEGIN, BEGIN)) > model.prob("VERB|_", (BEGIN, BEGIN))
    assert model.prob("NOUN|_", (BEGIN, BEGIN)) == pytest.approx(2 / 5)
    assert model.prob("VERB|_", (BEGIN, BEGIN)) == pytest.approx(1 / 5)


def test_training_sequence_is_most_probable():
    model = two_sig_model()
    training = ["NOUN|_", "VERB|_"]
    best = max(
        itertools.product(sorted(model.vocab), repeat=2),
        key=lambda seq: model.sequence_logprob(list(seq)),
    )
    assert model.sequence_logprob(training) >= model.sequence_logprob(list(best))
    assert model.sequence_logprob([]) == 0.0


def test_sequence_logprob_excludes_end_event():
    model = two_sig_model()
    expected = math.log(model.prob("NOUN|_", (BEGIN, BEGIN))) + math.log(
        model.prob("VERB|_", (BEGIN, "NOUN|_"))
    )
    assert model.sequence_logprob(["NOUN|_", "VERB|_"]) == pytest.approx(expected)


def test_tag_lexicon_most_frequent_signature_wins():
    trees = [
        make_tree([("bank", 0, "root", None, "NOUN")]),
        make_tree([("bank", 0, "root", None, "NOUN")]),
        make_tree([("bank", 0, "root", None, "VERB")]),
        make_tree([("Bank", 0, "root", None, "PROPN")]),
    ]
    model = build_morph_model(trees)
    assert model.signature_for("bank") == "NOUN|_"
    assert model.signature_for("BANK") == "NOUN|_"
    assert model.signature_for("river") == UNKNOWN_SIG


def test_tag_lexicon_breaks_ties_alphabetically():
    trees = [
        make_tree([("bank", 0, "root", None, "VERB")]),
        make_tree([("bank", 0, "root", None, "NOUN")]),
    ]
    assert build_morph_model(trees).signature_for("bank") == "NOUN|_"


def test_build_morph_model_validation():
    with pytest.raises(ValueError, match="at least 2"):
        build_morph_model([make_tree([("x", 0, "root")])], n=1)
    with pytest.raises(ValueError, match="empty"):
        build_morph_model([])


def qword_fixture(graduation_tree, stocks_tree) -> QuestionWordModel:
    triples = [
        TrainingTriple(graduation_tree, "When did John graduate?", "in 2010"),
        TrainingTriple(stocks_tree, "Where did stocks crash?", "during previous summer months"),
        TrainingTriple(graduation_tree, "What is this?", "not in the sentence"),
    ]
    return build_qword_model(triples)


def test_qword_counts_and_probabilities(graduation_tree, stocks_tree):
    model = qword_fixture(graduation_tree, stocks_tree)
    # The unalignable third triple is skipped, leaving two obl observations.
    assert model.counts == {"obl": {"when": 1, "where": 1}}
    assert model.vocab == frozenset({"when", "where"})
    assert model.prob("when", "obl") == pytest.approx(2 / 5)
    assert model.prob("what", "obl") == pytest.approx(1 / 5)
    assert model.prob("when", "nsubj") == pytest.approx(1 / 3)
    assert model.prob("when", None) == pytest.approx(1 / 3)
    total = sum(model.prob(w, "obl") for w in model.vocab)
    assert total + model.prob("zzz", "obl") == pytest.approx(1.0)


def test_qword_condition_uses_leftmost_token_without_covering_node(graduation_tree):
    model = build_qword_model(
        [TrainingTriple(graduation_tree, "Who graduated?", "John graduated")]
    )
    assert model.counts == {"nsubj": {"who": 1}}


def test_rank_models_reject_all_zero_weights(graduation_tree):
    idf = IdfModel(idf={}, doc_count=1)
    morph = two_sig_model()
    qword = QuestionWordModel(counts={})
    with pytest.raises(ValueError, match="non-zero"):
        RankModels(idf=idf, morph=morph, qword=qword, weights=(0.0, 0.0))


def scoring_setup(graduation_tree, stocks_tree, weights=(1.0, 1.0)):
    morph = build_morph_model([graduation_tree, stocks_tree], n=3, alpha=1.0)
    qword = qword_fixture(graduation_tree, stocks_tree)
    idf = build_idf([[graduation_tree], [stocks_tree]])
    return RankModels(idf=idf, morph=morph, qword=qword, weights=weights)


def test_question_signatures_mix_tree_and_lexicon_tags(graduation_tree, stocks_tree):
    models = scoring_setup(graduation_tree, stocks_tree)
    t = parse_template_line(WORKED)
    sigs = question_signatures(t, stocks_tree, models.morph)
    assert sigs == [
        UNKNOWN_SIG,  # "When" never occurs in the treebank
        UNKNOWN_SIG,  # "did" never occurs either
        "NOUN|Number=Plur",
        "VERB|Mood=Ind|Tense=Past|VerbForm=Fin",
        UNKNOWN_SIG,  # "?"
    ]


def test_answer_condition(graduation_tree, stocks_tree):
    t = parse_template_line(WORKED)
    assert answer_condition(t, stocks_tree) == "obl"
    missing = parse_template_line("what\t[r.obj]")
    assert answer_condition(missing, stocks_tree) is None
    literal_only = parse_template_line("what\tyes")
    assert answer_condition(literal_only, stocks_tree) is None


def test_score_candidate_hand_computed(graduation_tree, stocks_tree):
    models = scoring_setup(graduation_tree, stocks_tree)
    t = parse_template_line(WORKED)
    c = apply_template(t, stocks_tree)
    score = score_candidate(c, stocks_tree, t, models)

    # Treebank: 7 distinct token signatures plus the end marker, so every
    # smoothed denominator adds 9. Both sentences share the begin context.
    expected_morph = (
        math.log(1 / 11)  # <unk> after (<s>, <s>): context seen twice
        + math.log(1 / 9)  # unseen context (<s>, <unk>)
        + math.log(1 / 9)  # unseen context (<unk>, <unk>)
        + math.log(1 / 9)  # unseen context (<unk>, NOUN|Number=Plur)
        + math.log(1 / 10)  # (NOUN|Number=Plur, VERB|...) seen once
    ) / 5
    expected_qword = math.log(2 / 5)
    assert c.score_parts["morph"] == pytest.approx(expected_morph)
    assert c.score_parts["qword"] == pytest.approx(expected_qword)
    assert score == pytest.approx(expected_morph + expected_qword)
    assert c.score == score


def test_score_weights_scale_components(graduation_tree, stocks_tree):
    t = parse_template_line(WORKED)
    c1 = apply_template(t, stocks_tree)
    c2 = apply_template(t, stocks_tree)
    base = scoring_setup(graduation_tree, stocks_tree)
    scaled = scoring_setup(graduation_tree, stocks_tree, weights=(2.0, 0.5))
    score_candidate(c1, stocks_tree, t, base)
    score_candidate(c2, stocks_tree, t, scaled)
    assert c2.score == pytest.approx(
        2.0 * c1.score_parts["morph"] + 0.5 * c1.score_parts["qword"]
    )


def test_score_candidate_rejects_empty_question(graduation_tree, stocks_tree):
    models = scoring_setup(graduation_tree, stocks_tree)
    t = parse_template_line(WORKED)
    empty = cand("", "x")
    with pytest.raises(ValueError, match="empty question"):
        score_candidate(empty, stocks_tree, t, models)


def test_basic_filter_min_tokens():
    short = cand("is it", "a")
    ok = cand("is it so ?", "a")
    assert basic_filter([short, ok]) == [ok]
    assert basic_filter([short], rules=()) == [short]
    assert basic_filter([short], rules=("min_tokens",), min_tokens=2) == [short]


def test_basic_filter_whole_sentence_and_empty_answer():
    whole = cand("what is the whole sentence ?", "the whole sentence")
    empty = cand("what is it ?", "")
    part = cand("what is it ?", "the whole")
    assert basic_filter([whole, empty, part]) == [part]
    assert basic_filter([whole], rules=("min_tokens",)) == [whole]


def test_basic_filter_answer_in_question():
    leak = cand("where is the big dog now ?", "big dog")
    scrambled = cand("where is the big dog now ?", "dog big")
    longer = cand("short one ?", "short one ? plus more")
    assert basic_filter([leak, scrambled, longer]) == [scrambled, longer]


def test_basic_filter_dedup_keeps_highest_scored():
    low = cand("what is it ?", "a thing", score=0.2, template_id=1)
    high = cand("what is it ?", "a thing", score=0.5, template_id=2)
    other = cand("who is it ?", "a person", score=0.1, template_id=3)
    out = basic_filter([low, high, other])
    assert [c.template_id for c in out] == [2, 3]


def test_basic_filter_dedup_first_wins_ties_and_unscored():
    a = cand("what is it ?", "a thing", score=0.5, template_id=1)
    b = cand("what is it ?", "a thing", score=0.5, template_id=2)
    assert [c.template_id for c in basic_filter([a, b])] == [1]
    u1 = cand("what is it ?", "a thing", template_id=3)
    u2 = cand("what is it ?", "a thing", template_id=4)
    assert [c.template_id for c in basic_filter([u1, u2])] == [3]


def test_basic_filter_is_idempotent():
    cands = [
        cand("what is it ?", "a thing", score=0.2),
        cand("what is it ?", "a thing", score=0.5),
        cand("is it", "a"),
        cand("where is the big dog ?", "big dog"),
    ]
    once = basic_filter(cands)
    assert basic_filter(once) == once


def test_mean_filter_keeps_at_or_above_mean():
    cands = [cand("q ?", "a", score=s) for s in (-1.0, -2.0, -3.0)]
    survivors = mean_filter(cands)
    assert [c.score for c in survivors] == [-1.0, -2.0]


def test_mean_filter_shift_invariance():
    scores = [-5.3, -1.2, -9.9, -0.4, -3.3]
    base = mean_filter([cand("q ?", "a", score=s) for s in scores])
    shifted = mean_filter([cand("q ?", "a", score=s + 100.0) for s in scores])
    assert [c.score - 100.0 for c in shifted] == pytest.approx(
        [c.score for c in base]
    )


def test_mean_filter_never_empties_nonempty_input():
    single = [cand("q ?", "a", score=-42.0)]
    assert mean_filter(single) == single
    equal = [cand("q ?", "a", score=-1.0), cand("q ?", "b", score=-1.0)]
    assert len(mean_filter(equal)) == 2
    assert mean_filter([]) == []


def test_mean_filter_requires_scores():
    with pytest.raises(ValueError, match="scored"):
        mean_filter([cand("q ?", "a")])


def test_generation_stats():
    per_sentence = {
        "s1": StageCounts(0, 0, 0),
        "s2": StageCounts(2, 1, 1),
        "s3": StageCounts(3, 3, 2),
        "s4": StageCounts(23, 10, 4),
    }
    stats = generation_stats(per_sentence)
    assert stats.sentences == 4
    assert stats.total_generated == 28
    assert stats.ss_applicable == 3
    assert stats.ss_after_basic == 3
    assert stats.ss_after_mean == 3
    assert stats.pct_after_mean == pytest.approx(75.0)
    assert stats.per_ss_mean == pytest.approx(7.0)
    assert stats.per_ss_std == pytest.approx(math.sqrt(86.5))
    assert stats.per_ss_median == pytest.approx(2.5)
    assert (stats.per_ss_min, stats.per_ss_max) == (0, 23)
    assert generation_stats({}).sentences == 0


def test_morph_model_file_round_trip(tmp_path, graduation_tree, stocks_tree):
    model = build_morph_model([graduation_tree, stocks_tree], n=3, alpha=0.5)
    path = tmp_path / "morph.txt"
    save_morph_model(model, path)
    loaded = load_morph_model(path)
    assert loaded.n == model.n
    assert loaded.alpha == model.alpha
    assert loaded.ngrams == model.ngrams
    assert loaded.tags == model.tags
    assert loaded.prob("ADP|_", (BEGIN, BEGIN)) == model.prob("ADP|_", (BEGIN, BEGIN))
    save_morph_model(loaded, tmp_path / "again.txt")
    assert (tmp_path / "again.txt").read_bytes() == path.read_bytes()


def test_qword_model_file_round_trip(tmp_path, graduation_tree, stocks_tree):
    model = qword_fixture(graduation_tree, stocks_tree)
    path = tmp_path / "qword.txt"
    save_qword_model(model, path)
    loaded = load_qword_model(path)
    assert loaded.counts == model.counts
    assert loaded.alpha == model.alpha
    assert loaded.prob("when", "obl") == model.prob("when", "obl")


def test_idf_model_file_round_trip(tmp_path, graduation_tree, stocks_tree):
    model = build_idf([[graduation_tree], [stocks_tree]])
    path = tmp_path / "idf.txt"
    save_idf_model(model, path)
    loaded = load_idf_model(path)
    assert loaded.doc_count == model.doc_count
    assert loaded.df == model.df
    for word in ["in", "john", "never-seen"]:
        assert loaded.lookup(word) == pytest.approx(model.lookup(word))


def test_model_loaders_reject_wrong_headers(tmp_path):
    path = tmp_path / "bogus.txt"
    path.write_text("#something-else\tv1\n", encoding="utf-8")
    with pytest.raises(ValueError, match="morph"):
        load_morph_model(path)
    with pytest.raises(ValueError, match="question-word"):
        load_qword_model(path)
    with pytest.raises(ValueError, match="idf"):
        load_idf_model(path)
