import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metricval import ChrfConfig, chrf, corpus_chrf
from metricval.metrics import chrf_statistics

from oracles import chrf_naive

text = st.text(alphabet="abcde ", min_size=0, max_size=20)
nonempty = st.text(alphabet="abcde ", min_size=1, max_size=20)


class TestChrf:
    def test_hand_value(self):
        # "cat" vs "cab": unigram 2/3, bigram 1/2, trigram 0; orders 4..6 empty
        assert chrf("cat", ("cab",)) == pytest.approx(7 / 18, abs=1e-12)

    def test_identity_is_exactly_one(self):
        assert chrf("the cat sat", ("the cat sat",)) == 1.0

    def test_whitespace_removed_by_default(self):
        assert chrf("thecat", ("the cat",)) == 1.0
        assert chrf("t h e c a t", ("thecat",)) == 1.0

    def test_whitespace_kept_when_configured(self):
        config = ChrfConfig(include_whitespace=True)
        assert chrf("thecat", ("the cat",), config) < 1.0
        assert chrf("the cat", ("the cat",), config) == 1.0

    def test_multiple_references_take_best(self):
        refs = ("zzzz", "cat")
        assert chrf("cat", refs) == 1.0
        assert chrf("cat", refs) >= chrf("cat", ("zzzz",))

    def test_empty_hypothesis(self):
        assert chrf("", ("cat",)) == 0.0

    def test_empty_reference(self):
        assert chrf("cat", ("",)) == 0.0

    def test_both_empty(self):
        assert chrf("", ("",)) == 0.0
        assert chrf("   ", ("  ",)) == 0.0  # whitespace-only strips to empty

    def test_beta_weights_recall(self):
        # hyp has extra content: precision suffers, recall perfect
        hyp, ref = "catx", "cat"
        p_heavy = chrf(hyp, (ref,), ChrfConfig(beta=0.25))
        r_heavy = chrf(hyp, (ref,), ChrfConfig(beta=4.0))
        assert r_heavy > p_heavy

    def test_statistics_shape(self):
        stats = chrf_statistics("cat", "cab", 6)
        # one (overlap, hyp_total, ref_total) triple per order
        assert len(stats) == 6
        assert stats[0] == (2, 3, 3)
        assert stats[1] == (1, 2, 2)
        assert stats[2] == (0, 1, 1)
        assert stats[3] == (0, 0, 0)

    def test_config_validation(self):
        with pytest.raises(Exception):
            ChrfConfig(char_n=0)
        with pytest.raises(Exception):
            ChrfConfig(beta=0)

    @given(nonempty, nonempty)
    @settings(max_examples=200, deadline=None)
    def test_matches_naive(self, hyp, ref):
        got = chrf(hyp, (ref,))
        want = chrf_naive(hyp, ref)
        assert got == pytest.approx(want, abs=1e-12)

    @given(text, st.lists(nonempty, min_size=1, max_size=3))
    @settings(max_examples=150, deadline=None)
    def test_bounded_and_best_ref(self, hyp, refs):
        score = chrf(hyp, tuple(refs))
        assert 0.0 <= score <= 1.0
        assert score == pytest.approx(
            max(chrf_naive(hyp, r) for r in refs), abs=1e-12
        )

    @given(nonempty)
    @settings(max_examples=100, deadline=None)
    def test_identity_property(self, s):
        if "".join(s.split()) == "":
            assert chrf(s, (s,)) == 0.0
        else:
            assert chrf(s, (s,)) == 1.0


class TestCorpusChrf:
    def test_identity(self):
        pairs = [("the cat", ("the cat",)), ("a dog", ("a dog",))]
        assert corpus_chrf(pairs) == 1.0

    def test_pools_statistics(self):
        # two one-char segments: pooled unigrams 1 match of 2
        pairs = [("a", ("a",)), ("b", ("c",))]
        score = corpus_chrf(pairs)
        # P = R = 1/2 at order 1; orders 2+ have no n-grams anywhere
        assert score == pytest.approx(0.5, abs=1e-12)

    def test_uses_best_reference_per_segment(self):
        pairs = [("cat", ("zzz", "cat"))]
        assert corpus_chrf(pairs) == 1.0

    def test_differs_from_mean_of_segments(self):
        pairs = [("abcdef", ("abcdef",)), ("a", ("b",))]
        pooled = corpus_chrf(pairs)
        mean = (chrf("abcdef", ("abcdef",)) + chrf("a", ("b",))) / 2
        assert pooled != pytest.approx(mean, abs=1e-6)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            corpus_chrf([])
