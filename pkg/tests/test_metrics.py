import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from actiforest.metrics import average_precision, roc_auc
from refimpl import brute_average_precision, brute_roc_auc


class TestAveragePrecision:
    def test_perfect_ranking(self):
        assert average_precision([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0

    def test_interleaved_example(self):
        # (1/1)*(1/2) + (2/3)*(1/2) = 5/6
        assert average_precision([0.9, 0.8, 0.7], [1, 0, 1]) == pytest.approx(
            5.0 / 6.0, abs=1e-12
        )

    def test_single_positive_ranked_last(self):
        for n in (2, 5, 9):
            scores = np.arange(n, dtype=float)[::-1]
            labels = np.zeros(n, dtype=int)
            labels[-1] = 1
            assert average_precision(scores, labels) == pytest.approx(1.0 / n, abs=1e-12)

    def test_all_tied_scores_give_prevalence(self):
        assert average_precision([0.5] * 8, [1, 0, 0, 1, 0, 0, 0, 0]) == 2.0 / 8.0

    def test_no_anomalies_undefined(self):
        with pytest.raises(ValueError):
            average_precision([0.1, 0.2], [0, 0])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            average_precision([0.1, 0.2], [1])


class TestRocAuc:
    def test_perfect_separation(self):
        assert roc_auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0

    def test_all_ties_is_half(self):
        assert roc_auc([0.3] * 6, [1, 0, 1, 0, 0, 0]) == 0.5

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            roc_auc([0.1, 0.2], [1, 1])
        with pytest.raises(ValueError):
            roc_auc([0.1, 0.2], [0, 0])

    def test_matches_pairwise_brute_force_bitwise(self):
        rng = np.random.default_rng(0)
        for _ in range(500):
            n = int(rng.integers(2, 13))
            labels = rng.integers(0, 2, size=n)
            if labels.sum() in (0, n):
                continue
            scores = rng.integers(0, 5, size=n).astype(float)
            assert roc_auc(scores, labels) == brute_roc_auc(scores, labels)


class TestProperties:
    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            n = int(rng.integers(3, 40))
            labels = rng.integers(0, 2, size=n)
            if labels.sum() in (0, n):
                continue
            scores = rng.normal(size=n)
            # power-of-two scaling is exact, strictly increasing, tie-preserving
            assert average_precision(scores * 4.0, labels) == average_precision(
                scores, labels
            )
            assert roc_auc(scores * 0.25, labels) == roc_auc(scores, labels)

    def test_auc_negation_symmetry(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            n = int(rng.integers(2, 30))
            labels = rng.integers(0, 2, size=n)
            if labels.sum() in (0, n):
                continue
            scores = rng.normal(size=n)
            assert roc_auc(-scores, labels) == pytest.approx(
                1.0 - roc_auc(scores, labels), abs=1e-12
            )

    @given(
        st.lists(
            st.tuples(st.integers(0, 6), st.integers(0, 1)), min_size=2, max_size=12
        )
    )
    @settings(max_examples=300, deadline=None)
    def test_hypothesis_against_brute_force(self, pairs):
        scores = np.array([float(s) for s, _ in pairs])
        labels = np.array([l for _, l in pairs])
        if labels.sum() > 0:
            assert average_precision(scores, labels) == pytest.approx(
                brute_average_precision(scores, labels), abs=1e-12
            )
        if 0 < labels.sum() < len(labels):
            assert roc_auc(scores, labels) == brute_roc_auc(scores, labels)
