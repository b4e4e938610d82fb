import random
import unicodedata

from tablink import normalize, tf_cosine, tokenize
from tablink.text import STOPWORDS


def test_normalize_lower_trim_collapse():
    assert normalize("  SARS-CoV-2\t variant \n") == "sars-cov-2 variant"
    assert normalize("") == ""
    assert normalize(" \t\n ") == ""


def test_normalize_applies_nfc():
    decomposed = "étude"  # e + combining acute
    composed = "étude"
    assert normalize(decomposed) == normalize(composed) == composed


def test_normalize_idempotent_random():
    rng = random.Random(11)
    alphabet = "abc EF é́ 0-9\t\n%"
    for _ in range(1000):
        s = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 30)))
        once = normalize(s)
        assert normalize(once) == once
        assert once == once.strip()
        assert "  " not in once


def test_tokenize_drops_stopwords_keeps_order():
    assert tokenize("The Institute of Virology") == ["institute", "virology"]
    assert tokenize("the of and") == []
    assert tokenize("") == []


def test_tokenize_is_over_normalized_text():
    assert tokenize("  VIRAĹ  Load ") == [
        unicodedata.normalize("NFC", "viraĺ"), "load"]


def test_tf_cosine_identical_multiset_is_exactly_one():
    rng = random.Random(7)
    vocab = [f"w{i}" for i in range(12)]
    for _ in range(500):
        toks = [rng.choice(vocab) for _ in range(rng.randrange(1, 25))]
        shuffled = list(toks)
        rng.shuffle(shuffled)
        assert tf_cosine(toks, shuffled) == 1.0


def test_tf_cosine_disjoint_is_zero():
    assert tf_cosine(["a", "b"], ["c", "d"]) == 0.0
    assert tf_cosine([], ["c"]) == 0.0
    assert tf_cosine(["a"], []) == 0.0


def test_tf_cosine_known_value():
    # a:(2,1,0) vs b:(1,1,1): dot=3, norms sqrt(5)*sqrt(3)
    got = tf_cosine(["x", "x", "y"], ["x", "y", "z"])
    assert abs(got - 3 / (5 * 3) ** 0.5) < 1e-12


def test_tf_cosine_symmetric_and_bounded():
    rng = random.Random(3)
    vocab = [f"t{i}" for i in range(8)]
    for _ in range(1000):
        a = [rng.choice(vocab) for _ in range(rng.randrange(0, 12))]
        b = [rng.choice(vocab) for _ in range(rng.randrange(0, 12))]
        ab, ba = tf_cosine(a, b), tf_cosine(b, a)
        assert ab == ba
        assert 0.0 <= ab <= 1.0


def test_stopwords_are_normalized_single_tokens():
    for word in STOPWORDS:
        assert word == normalize(word)
        assert " " not in word
