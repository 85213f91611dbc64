import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from syntf.vocab import (
    VocabOptions,
    Vocabulary,
    VocabularyTooSmallError,
    build_vocabulary,
    extend_with_synonyms,
    load_lemmas,
    load_synonyms,
    tokenize,
)

words = st.text(alphabet="abcdeABCDE1 .,-", max_size=60)


def norm(tokens):
    return [t.normalized for t in tokens]


def test_empty_text():
    assert tokenize("", VocabOptions()) == []


def test_lower_with_stopwords():
    opts = VocabOptions(morphology="lower", stopwords={"the"})
    assert norm(tokenize("The cats RAN", opts)) == ["cats", "ran"]


def test_lemma_lookup():
    opts = VocabOptions(morphology="lemma", lemmas={"cats": "cat", "ran": "run"}, stopwords=())
    assert norm(tokenize("cats ran", opts)) == ["cat", "run"]


def test_lemma_falls_back_to_casefold():
    opts = VocabOptions(morphology="lemma", lemmas={"cats": "cat"}, stopwords=())
    assert norm(tokenize("Cats Dogs", opts)) == ["cat", "dogs"]


def test_orth_keeps_spelling():
    opts = VocabOptions(morphology="orth", stopwords=())
    toks = tokenize("Night NIGHT night", opts)
    assert norm(toks) == ["Night", "NIGHT", "night"]
    assert [t.surface for t in toks] == ["Night", "NIGHT", "night"]


def test_numbers_and_mixed_tokens():
    opts = VocabOptions(morphology="lower", stopwords=(), min_token_length=1)
    assert norm(tokenize("route 66 abc123def", opts)) == ["route", "abc", "def"]
    keep = VocabOptions(morphology="lower", stopwords=(), min_token_length=1, remove_numbers=False)
    assert norm(tokenize("route 66", keep)) == ["route", "66"]


def test_min_token_length():
    opts = VocabOptions(morphology="lower", stopwords=(), min_token_length=3)
    assert norm(tokenize("a an ant", opts)) == ["ant"]


def test_bad_morphology():
    with pytest.raises(ValueError):
        VocabOptions(morphology="stem")


@given(words)
def test_tokens_are_clean_and_deterministic(text):
    opts = VocabOptions(morphology="lower", stopwords=(), min_token_length=1, remove_numbers=False)
    toks = tokenize(text, opts)
    assert toks == tokenize(text, opts)
    for t in toks:
        assert t.normalized and not any(c.isspace() for c in t.normalized)


def test_build_vocabulary_union():
    opts = VocabOptions(min_token_length=1, stopwords=())
    assert build_vocabulary(["a b", "b c"], opts).terms == ("a", "b", "c")


def test_build_vocabulary_with_synonyms():
    opts = VocabOptions(use_synonyms=True, synonyms={"cat": ["feline"]}, stopwords=(), min_token_length=1)
    with pytest.raises(VocabularyTooSmallError):
        build_vocabulary(["cat"], VocabOptions(stopwords=()))
    assert build_vocabulary(["cat"], opts).terms == ("cat", "feline")


def test_build_vocabulary_too_small():
    with pytest.raises(VocabularyTooSmallError, match="too small"):
        build_vocabulary([""], VocabOptions())
    with pytest.raises(ValueError):
        build_vocabulary([], VocabOptions())


@settings(max_examples=50)
@given(st.lists(words, min_size=1, max_size=6), st.randoms())
def test_vocabulary_order_independent_and_covering(docs, rnd):
    opts = VocabOptions(morphology="lower", stopwords=(), min_token_length=1)
    try:
        vocab = build_vocabulary(docs, opts)
    except VocabularyTooSmallError:
        return
    shuffled = list(docs)
    rnd.shuffle(shuffled)
    assert build_vocabulary(shuffled, opts) == vocab
    assert all(vocab.index[t] == i for i, t in enumerate(vocab.terms))
    for d in docs:
        assert all(t.normalized in vocab for t in tokenize(d, opts))


def test_extend_with_synonyms():
    v = Vocabulary(["cat", "dog"])
    assert extend_with_synonyms(v, {}) == v
    ext = extend_with_synonyms(Vocabulary(["cat"]), {"cat": ["feline", "cat"]})
    assert ext.terms == ("cat", "feline")
    table = {"cat": ["feline", "kitty"], "dog": ["hound"]}
    once = extend_with_synonyms(v, table)
    assert set(v.terms) <= set(once.terms)
    assert extend_with_synonyms(once, table) == once


def test_vocabulary_rejects_duplicates():
    with pytest.raises(ValueError):
        Vocabulary(["a", "a"])


def test_vocabulary_file_roundtrip(tmp_path):
    v = Vocabulary(["alpha", "beta", "gamma"])
    v.save(tmp_path / "v.txt")
    assert (tmp_path / "v.txt").read_text().splitlines() == ["alpha", "beta", "gamma"]
    assert Vocabulary.load(tmp_path / "v.txt") == v


def test_dictionary_files(tmp_path):
    (tmp_path / "lem.tsv").write_text("Cats\tcat\nran\trun\n", encoding="utf-8")
    (tmp_path / "syn.tsv").write_text("cat\tfeline, kitty\n", encoding="utf-8")
    assert load_lemmas(tmp_path / "lem.tsv") == {"cats": "cat", "ran": "run"}
    assert load_synonyms(tmp_path / "syn.tsv") == {"cat": ["feline", "kitty"]}
    (tmp_path / "bad.tsv").write_text("nolemma\n", encoding="utf-8")
    with pytest.raises(ValueError, match="bad.tsv:1"):
        load_lemmas(tmp_path / "bad.tsv")
