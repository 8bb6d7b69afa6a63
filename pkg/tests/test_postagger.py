import pytest
from hypothesis import given, settings, strategies as st

from mtsource.postagger import (TAGSET, TaggerError, TaggerModel, default_tagger, load_pretagged,
                                parse_pretagged, pos_tokenize, tag, tag_text, train_tagger)
from mtsource.rng import Xoshiro256


def synthetic_corpus(n_sentences=150, seed=0):
    """Every word belongs to exactly one tag; sentences follow DET ADJ* NOUN VERB ... PUNCT."""
    words = {
        "DET": ["the", "a", "this", "every"],
        "ADJ": ["red", "quick", "tall", "green", "small"],
        "NOUN": ["dog", "cat", "house", "river", "tree", "car"],
        "VERB": ["runs", "sees", "likes", "jumps"],
        "ADV": ["quickly", "often", "never"],
        "PUNCT": ["."],
    }
    rng = Xoshiro256(seed)
    pick = lambda t: words[t][rng.below(len(words[t]))]
    corpus = []
    for _ in range(n_sentences):
        tags = ["DET"] + ["ADJ"] * rng.below(3) + ["NOUN", "VERB"]
        if rng.below(2):
            tags.append("ADV")
        tags += ["DET", "NOUN", "PUNCT"]
        corpus.append(([pick(t) for t in tags], tags))
    return corpus


def test_empty_and_length():
    model = default_tagger()
    assert tag([], model) == []
    for toks in (["x"], ["the", "dog", "runs"], pos_tokenize("It's 5 o'clock, isn't it?")):
        assert len(tag(toks, model)) == len(toks)


def test_lexicon_lookup_oracle():
    model = default_tagger()
    assert "the" in model.lexicon
    out = tag(["the", "dog", "runs"], model)
    assert out[0] == model.lexicon["the"] == "DET"


def test_tags_in_tagset():
    model = default_tagger()
    text = "Yesterday the committee approved 3 new rules, although several members objected strongly!"
    assert set(tag_text(text, model)) <= set(TAGSET)
    assert tag_text("Hello , world .")[1] == "PUNCT"


def test_memorizable_corpus_reaches_full_accuracy():
    corpus = synthetic_corpus()
    assert sum(len(t) for t, _ in corpus) >= 1000
    model = train_tagger(corpus, epochs=5, seed=1)
    right = total = 0
    for toks, gold in corpus:
        right += sum(a == b for a, b in zip(tag(toks, model), gold))
        total += len(gold)
    assert right / total == 1.0


def test_generalises_to_held_out():
    model = train_tagger(synthetic_corpus(150, seed=0), epochs=5, seed=1)
    held = synthetic_corpus(50, seed=99)
    right = sum(a == b for toks, gold in held for a, b in zip(tag(toks, model), gold))
    assert right / sum(len(g) for _, g in held) >= 0.95


def test_training_deterministic():
    corpus = synthetic_corpus(40)
    a = train_tagger(corpus, epochs=3, seed=5)
    b = train_tagger(corpus, epochs=3, seed=5)
    assert a.to_dict() == b.to_dict()


def test_training_errors():
    with pytest.raises(TaggerError):
        train_tagger([])
    with pytest.raises(TaggerError):
        train_tagger([(["a"], ["NOT_A_TAG"])])
    with pytest.raises(TaggerError):
        train_tagger([(["a", "b"], ["DET"])])


def test_model_dict_round_trip():
    model = train_tagger(synthetic_corpus(30), epochs=2)
    again = TaggerModel.from_dict(model.to_dict())
    toks = ["the", "quick", "unknownword", "sees", "."]
    assert tag(toks, again) == tag(toks, model)
    with pytest.raises(TaggerError):
        TaggerModel.from_dict({"format": "other"})


def test_parse_pretagged():
    assert parse_pretagged("the/DET dog/NOUN") == [(["the", "dog"], ["DET", "NOUN"])]
    assert parse_pretagged("a/DET\n\nb/NOUN\n") == [(["a"], ["DET"]), ([], []), (["b"], ["NOUN"])]
    assert parse_pretagged("1/2/NUM") == [(["1/2"], ["NUM"])]
    with pytest.raises(TaggerError, match="line 1, column 1"):
        parse_pretagged("dog")
    with pytest.raises(TaggerError, match="line 2, column 9"):
        parse_pretagged("a/DET\nthe/DET dog/")


def test_load_pretagged(tmp_path):
    p = tmp_path / "t.txt"
    p.write_text("the/DET dog/NOUN\n", encoding="utf-8")
    assert load_pretagged(p) == [(["the", "dog"], ["DET", "NOUN"])]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.text(min_size=1, max_size=8).filter(lambda s: not any(c.isspace() for c in s)), max_size=20))
def test_any_tokens_get_one_tag(tokens):
    out = tag(tokens, default_tagger())
    assert len(out) == len(tokens)
    assert set(out) <= set(TAGSET)
