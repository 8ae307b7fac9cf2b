import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from deepsc_sr import metrics
from deepsc_sr.errors import InputError


def levenshtein(a, b):
    """Two-row dynamic programme, written independently of the package."""
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


class TestEditCounts:
    def test_identical(self):
        c = metrics.edit_counts("cat", "cat")
        assert (c.substitutions, c.deletions, c.insertions) == (0, 0, 0)

    def test_substitution(self):
        c = metrics.edit_counts("cat", "cut")
        assert (c.substitutions, c.deletions, c.insertions) == (1, 0, 0)

    def test_expansion_prefers_substitution(self):
        c = metrics.edit_counts("a", "xyz")
        assert (c.substitutions, c.deletions, c.insertions) == (1, 0, 2)

    def test_empty_sides(self):
        assert metrics.edit_counts("", "ab").insertions == 2
        assert metrics.edit_counts("ab", "").deletions == 2
        assert metrics.edit_counts("", "").distance == 0

    def test_random_pairs_match_levenshtein(self):
        rng = random.Random(0)
        for _ in range(1000):
            a = "".join(rng.choice("abc ") for _ in range(rng.randint(0, 30)))
            b = "".join(rng.choice("abc ") for _ in range(rng.randint(0, 30)))
            c = metrics.edit_counts(a, b)
            assert c.distance == levenshtein(a, b)
            assert c.substitutions + c.deletions <= len(a)

    @given(st.text("abcd", max_size=15), st.text("abcd", max_size=15))
    def test_symmetry(self, a, b):
        ab, ba = metrics.edit_counts(a, b), metrics.edit_counts(b, a)
        assert ab.distance == ba.distance

    @given(st.text("abcd", max_size=15), st.text("abcd", max_size=15))
    def test_counts_consistent(self, a, b):
        c = metrics.edit_counts(a, b)
        # hypothesis length = ref - deletions + insertions
        assert len(b) == len(a) - c.deletions + c.insertions


class TestRates:
    def test_cer_examples(self):
        assert metrics.cer("semantic", "semantic") == 0.0
        assert metrics.cer("semantic", "semantik") == pytest.approx(0.125)
        assert metrics.cer("a", "xyz") == pytest.approx(3.0)

    def test_wer_examples(self):
        assert metrics.wer("the cat sat", "the cat sat") == 0.0
        assert metrics.wer("the cat sat", "the cat") == pytest.approx(1 / 3)
        assert metrics.wer("cat", "a big cat") == pytest.approx(2.0)
        assert metrics.wer("cat", "one big dog") == pytest.approx(3.0)

    def test_apostrophe_stays_in_word(self):
        assert metrics.split_words("it's  a") == ["it's", "a"]
        assert metrics.wer("it's", "its") == 1.0

    def test_spaces_count_as_characters(self):
        assert metrics.cer("a b", "ab") == pytest.approx(1 / 3)

    def test_empty_reference_rejected(self):
        with pytest.raises(InputError):
            metrics.cer("", "a")
        with pytest.raises(InputError):
            metrics.wer("   ", "a")
