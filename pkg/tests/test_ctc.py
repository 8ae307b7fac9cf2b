import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import central_diff, max_rel_error
from deepsc_sr import ctc
from deepsc_sr.ctc import BLANK
from deepsc_sr.errors import InputError

A, T_, S, E = (ord(c) - ord("a") for c in "atse")


def random_probs(rng, length, classes=29):
    x = rng.gamma(1.0, size=(length, classes))
    return x / x.sum(axis=1, keepdims=True)


def brute_posterior(probs, target, blank=BLANK):
    """Sum of path products over every path that collapses to ``target``."""
    return sum(
        math.prod(probs[l, a] for l, a in enumerate(path))
        for path in ctc.enumerate_alignments(target, probs.shape[0], blank)
    )


class TestTokenize:
    def test_example(self):
        assert ctc.tokenize("it's") == [8, 19, ctc.APOSTROPHE, 18]

    def test_empty(self):
        assert ctc.tokenize("") == []

    def test_case_folded(self):
        assert ctc.tokenize("AbC") == [0, 1, 2]

    def test_rejects_accent(self):
        with pytest.raises(InputError, match="é"):
            ctc.tokenize("Café")

    def test_alphabet_layout(self):
        assert len(ctc.ALPHABET) == 28 and ctc.NUM_TOKENS == 29 and BLANK == 28
        assert ctc.ALPHABET[ctc.SPACE] == " " and ctc.ALPHABET[ctc.APOSTROPHE] == "'"

    @given(st.text(alphabet=ctc.ALPHABET, max_size=40))
    def test_round_trip(self, text):
        assert ctc.detokenize(ctc.tokenize(text)) == text


class TestAlignments:
    def test_single_token(self):
        assert ctc.enumerate_alignments([A], 2) == {(A, A), (A, BLANK), (BLANK, A)}

    def test_text_alignments(self):
        b = BLANK
        found = ctc.enumerate_alignments([T_, A, S, T_, E], 8)
        assert (b, T_, b, A, S, b, T_, E) in found
        assert (T_, b, A, S, b, b, T_, E) in found

    def test_repeat_needs_blank(self):
        assert ctc.enumerate_alignments([A, A], 2) == set()
        assert ctc.enumerate_alignments([A, A], 3) == {(A, BLANK, A)}

    def test_min_length(self):
        assert ctc.min_alignment_length([A, A, S]) == 4
        assert ctc.min_alignment_length([]) == 0

    def test_full_alphabet_agrees_with_restricted_search(self):
        # restricting to target tokens plus blank loses nothing
        target = [1, 2]
        full = {p for p in itertools.product(range(4), repeat=4) if ctc.collapse(p, 3) == target}
        assert ctc.enumerate_alignments(target, 4, blank=3) == full


class TestPosterior:
    def test_worked_example(self):
        p = np.full((2, 29), 0.0)
        p[0, A], p[0, BLANK] = 0.6, 0.4
        p[1, A], p[1, BLANK] = 0.5, 0.5
        assert math.exp(ctc.ctc_log_posterior(p, [A])) == pytest.approx(0.8, rel=1e-12)
        loss, _ = ctc.ctc_loss(p, [A])
        assert loss == pytest.approx(0.22314355131420976, rel=1e-10)

    def test_uniform(self):
        p = np.full((2, 29), 1 / 29)
        assert math.exp(ctc.ctc_log_posterior(p, [A])) == pytest.approx(3 / 29 ** 2, rel=1e-12)

    def test_empty_target(self):
        p = random_probs(np.random.default_rng(0), 5)
        assert ctc.ctc_log_posterior(p, []) == pytest.approx(np.log(p[:, BLANK]).sum(), rel=1e-12)

    def test_unalignable_is_minus_inf(self):
        assert ctc.ctc_log_posterior(np.full((2, 29), 1 / 29), [A, A]) == -math.inf

    def test_unalignable_loss_capped(self):
        with pytest.warns(RuntimeWarning):
            loss, grad = ctc.ctc_loss(np.full((2, 29), 1 / 29), [A, A])
        assert loss == ctc.LOSS_CAP and not grad.any()

    @given(st.integers(0, 100_000), st.integers(1, 6), st.lists(st.integers(0, 2), max_size=3))
    @settings(max_examples=60, deadline=None)
    def test_matches_brute_force(self, seed, length, target):
        p = random_probs(np.random.default_rng(seed), length, classes=4)
        brute = brute_posterior(p, target, blank=3)
        got = ctc.ctc_log_posterior(p, target, blank=3)
        if brute == 0.0:
            assert got == -math.inf
        else:
            assert math.exp(got) == pytest.approx(brute, rel=1e-10)

    @pytest.mark.parametrize("length", [1, 2, 3, 4])
    def test_partition_sums_to_one(self, length):
        p = random_probs(np.random.default_rng(length), length, classes=4)
        targets = {tuple(ctc.collapse(path, 3)) for path in itertools.product(range(4), repeat=length)}
        total = sum(math.exp(ctc.ctc_log_posterior(p, list(t), blank=3)) for t in targets)
        assert total == pytest.approx(1.0, abs=1e-9)


class TestLossGradient:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        p = random_probs(rng, 5)
        target = [T_, A, A]
        _, grad = ctc.ctc_loss(p, target)
        numeric = central_diff(lambda: ctc.ctc_loss(p, target)[0], p, 1e-6)
        assert max_rel_error(grad, numeric) <= 1e-5

    def test_logits_gradient_rows_sum_to_zero(self):
        rng = np.random.default_rng(12)
        _, g = ctc.ctc_loss_from_logits(rng.normal(size=(7, 29)), [S, E, E])
        assert np.abs(g.sum(axis=1)).max() <= 1e-9

    def test_logits_gradient_finite_differences(self):
        rng = np.random.default_rng(13)
        z = rng.normal(size=(6, 29))
        _, g = ctc.ctc_loss_from_logits(z, [A, S])
        numeric = central_diff(lambda: ctc.ctc_loss_from_logits(z, [A, S])[0], z, 1e-6)
        assert max_rel_error(g, numeric) <= 1e-5

    def test_saturated_logits_stay_finite(self):
        z = np.zeros((4, 29))
        z[:, BLANK] = 800.0
        loss, g = ctc.ctc_loss_from_logits(z, [A])
        assert np.isfinite(loss) and loss > 100 and np.all(np.isfinite(g))

    @given(st.integers(0, 100_000))
    @settings(max_examples=30, deadline=None)
    def test_absent_token_permutation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        p = random_probs(rng, 6)
        target = [A, S]
        absent = [k for k in range(29) if k not in (A, S, BLANK)]
        q = p.copy()
        q[:, absent] = p[:, rng.permutation(absent)]
        assert ctc.ctc_loss(q, target)[0] == pytest.approx(ctc.ctc_loss(p, target)[0], rel=1e-12)


class TestGreedy:
    def _onehot(self, path):
        p = np.full((len(path), 29), 0.01)
        p[np.arange(len(path)), path] = 0.9
        return p / p.sum(axis=1, keepdims=True)

    def test_examples(self):
        assert ctc.detokenize(ctc.greedy_decode(self._onehot([T_, T_, BLANK, A]))) == "ta"
        assert ctc.detokenize(ctc.greedy_decode(self._onehot([T_, BLANK, T_]))) == "tt"
        assert ctc.greedy_decode(self._onehot([BLANK] * 4)) == []

    def test_tie_goes_to_lowest_index(self):
        assert ctc.greedy_path(np.full((1, 29), 1 / 29))[0] == 0

    @given(st.lists(st.integers(0, 28), max_size=30))
    def test_collapse_properties(self, path):
        out = ctc.collapse(path)
        assert BLANK not in out
        # re-aligning the decoded transcript and collapsing again is stable
        realigned = [t for tok in out for t in (tok, BLANK)]
        assert ctc.collapse(realigned) == out
