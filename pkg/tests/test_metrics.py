import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rfvimp.metrics import SingleClassError, _average_ranks, accuracy, auc


def pairwise_auc(scores, labels):
    """O(k^2) oracle: mean over (positive, negative) pairs of
    1 / 0.5 / 0 for higher / tied / lower positive score."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    total = 0.0
    for a in pos:
        for b in neg:
            total += 1.0 if a > b else (0.5 if a == b else 0.0)
    return total / (len(pos) * len(neg))


def trapezoid_auc(scores, labels):
    """Independent oracle: trapezoidal integration of the ROC curve."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    order = np.argsort(-scores, kind="stable")
    s, y = scores[order], labels[order]
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    tp = fp = 0
    tps, fps = [0], [0]
    for i in range(len(y)):
        if y[i] == 1:
            tp += 1
        else:
            fp += 1
        if i == len(y) - 1 or s[i + 1] != s[i]:
            tps.append(tp)
            fps.append(fp)
    return float(np.trapezoid(np.asarray(tps) / n_pos, np.asarray(fps) / n_neg))


class TestAucExamples:
    def test_four_point_example(self):
        scores = [0.9, 0.8, 0.3, 0.2]
        labels = [1, 0, 1, 0]
        assert auc(scores, labels) == 0.75
        assert pairwise_auc(scores, labels) == 0.75

    def test_perfect_separation(self):
        assert auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0

    def test_all_tied(self):
        assert auc([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0]) == 0.5

    def test_single_class_raises(self):
        with pytest.raises(SingleClassError):
            auc([0.1, 0.2], [1, 1])
        with pytest.raises(SingleClassError):
            auc([0.1, 0.2], [0, 0])


class TestAucOracles:
    def test_matches_pairwise_on_random_inputs_with_ties(self):
        rng = np.random.default_rng(99)
        for _ in range(300):
            k = int(rng.integers(2, 40))
            # coarse quantization forces plenty of ties
            scores = np.round(rng.random(k), 1)
            labels = rng.integers(0, 2, size=k)
            labels[rng.integers(0, k)] = 0
            labels[rng.integers(0, k)] = 1
            if labels.min() == labels.max():
                continue
            assert abs(auc(scores, labels) - pairwise_auc(scores, labels)) <= 1e-12

    def test_matches_trapezoid_on_random_inputs(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            k = int(rng.integers(2, 40))
            scores = np.round(rng.random(k), 1)
            labels = rng.integers(0, 2, size=k)
            if labels.min() == labels.max():
                continue
            assert abs(auc(scores, labels) - trapezoid_auc(scores, labels)) <= 1e-12


@st.composite
def scored_labels(draw):
    k = draw(st.integers(2, 30))
    scores = draw(st.lists(
        st.floats(-100, 100, allow_nan=False), min_size=k, max_size=k))
    labels = draw(st.lists(st.integers(0, 1), min_size=k, max_size=k))
    labels[0], labels[-1] = 0, 1
    return np.array(scores), np.array(labels)


class TestAucProperties:
    @settings(deadline=None, max_examples=100)
    @given(scored_labels())
    def test_label_flip_identity(self, data):
        scores, labels = data
        assert auc(scores, labels) + auc(scores, 1 - labels) == 1.0

    @settings(deadline=None, max_examples=100)
    @given(scored_labels())
    def test_in_unit_interval(self, data):
        scores, labels = data
        assert 0.0 <= auc(scores, labels) <= 1.0

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(11)
        scores = rng.normal(size=50)
        labels = rng.integers(0, 2, size=50)
        labels[:2] = [0, 1]
        base = auc(scores, labels)
        assert auc(np.exp(scores), labels) == base
        assert auc(3.0 * scores + 7.0, labels) == base


class TestAccuracy:
    def test_both_correct(self):
        assert accuracy([0.9, 0.1], [1, 0]) == 1.0

    def test_both_wrong(self):
        assert accuracy([0.9, 0.1], [0, 1]) == 0.0

    def test_all_majority_predictor_scores_high_under_imbalance(self):
        labels = np.array([0] * 9 + [1])
        assert accuracy(np.zeros(10), labels) == 0.9

    def test_threshold_is_strict(self):
        # a score exactly at the threshold predicts class 0
        assert accuracy([0.5], [0]) == 1.0
        assert accuracy([0.5], [1]) == 0.0


def test_average_ranks_with_ties():
    ranks = _average_ranks(np.array([10.0, 20.0, 20.0, 5.0]))
    np.testing.assert_array_equal(ranks, [2.0, 3.5, 3.5, 1.0])
