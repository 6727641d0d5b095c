import numpy as np
import pytest

from madgan.detector import ScoreSeries
from madgan.metrics import (ConfusionCounts, confusion, f1, is_degenerate,
                            precision, recall, sweep_tau)


def confusion_bruteforce(pred, truth, mask=None):
    """Independent per-element loop over the four confusion cells."""
    tp = fp = tn = fn = 0
    for i in range(len(pred)):
        if mask is not None and not mask[i]:
            continue
        if pred[i] and truth[i]:
            tp += 1
        elif pred[i] and not truth[i]:
            fp += 1
        elif not pred[i] and truth[i]:
            fn += 1
        else:
            tn += 1
    return tp, fp, tn, fn


class TestConfusion:
    def test_hand_example(self):
        c = confusion([1, 1, 0, 0, 1], [1, 0, 0, 1, 1])
        assert (c.tp, c.fp, c.tn, c.fn) == (2, 1, 1, 1)
        assert c.total == 5

    def test_mask_excludes_timesteps(self):
        c = confusion([1, 1, 0], [1, 0, 0], mask=np.array([True, False, True]))
        assert (c.tp, c.fp, c.tn, c.fn) == (1, 0, 1, 0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            confusion([1, 0], [1, 0, 0])

    def test_randomized_against_loop_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            n = 1000
            pred = rng.integers(0, 2, n)
            truth = rng.integers(0, 2, n)
            mask = rng.random(n) < 0.8
            c = confusion(pred, truth, mask=mask)
            assert (c.tp, c.fp, c.tn, c.fn) == confusion_bruteforce(pred, truth, mask)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(1)
        pred = rng.integers(0, 2, 200)
        truth = rng.integers(0, 2, 200)
        perm = rng.permutation(200)
        assert confusion(pred, truth) == confusion(pred[perm], truth[perm])


class TestScores:
    def test_formula_values(self):
        c = ConfusionCounts(tp=6, fp=2, tn=10, fn=4)
        assert precision(c) == 6 / 8
        assert recall(c) == 6 / 10
        expected_f1 = 2 * (6 / 8) * (6 / 10) / ((6 / 8) + (6 / 10))
        assert abs(f1(c) - expected_f1) < 1e-12

    def test_zero_denominators_define_zero(self):
        no_pred = ConfusionCounts(tp=0, fp=0, tn=5, fn=3)
        assert precision(no_pred) == 0.0
        assert f1(no_pred) == 0.0
        no_true = ConfusionCounts(tp=0, fp=4, tn=5, fn=0)
        assert recall(no_true) == 0.0
        assert is_degenerate(no_pred) and is_degenerate(no_true)
        assert not is_degenerate(ConfusionCounts(1, 1, 1, 1))

    def test_perfect_prediction(self):
        c = ConfusionCounts(tp=7, fp=0, tn=13, fn=0)
        assert precision(c) == recall(c) == f1(c) == 1.0


class TestSweep:
    def _scores(self, drs, lc=None):
        drs = np.asarray(drs, dtype=float)
        if lc is None:
            lc = np.ones(len(drs), dtype=np.int64)
        return ScoreSeries(drs, lc, drs, drs, 1.0)

    def test_separable_scores_reach_perfect_f1(self):
        drs = np.concatenate([np.full(90, 0.1), np.full(10, 0.9)])
        truth = np.concatenate([np.zeros(90, int), np.ones(10, int)])
        table = sweep_tau(self._scores(drs), truth)
        assert table.best_f1.f1 == 1.0
        assert 0.1 <= table.best_f1.tau < 0.9

    def test_row_count_matches_grid(self):
        drs = np.random.default_rng(2).random(50)
        truth = np.zeros(50, int)
        table = sweep_tau(self._scores(drs), truth, grid=np.linspace(0, 1, 11))
        assert len(table.rows) == 11

    def test_best_rows_are_argmaxes(self):
        rng = np.random.default_rng(3)
        drs = rng.random(200)
        truth = (drs + 0.3 * rng.standard_normal(200) > 0.7).astype(int)
        table = sweep_tau(self._scores(drs), truth)
        assert table.best_f1.f1 == max(r.f1 for r in table.rows)
        assert table.best_precision.precision == max(r.precision for r in table.rows)
        assert table.best_recall.recall == max(r.recall for r in table.rows)

    def test_lowest_quantile_maximizes_recall(self):
        rng = np.random.default_rng(4)
        drs = rng.random(100)
        truth = rng.integers(0, 2, 100)
        table = sweep_tau(self._scores(drs), truth)
        # tau at the 0-quantile equals the min score; strictly-greater
        # labeling still marks everything above the minimum
        assert table.best_recall.recall >= table.rows[-1].recall

    def test_uncovered_timesteps_excluded_from_counts(self):
        drs = np.array([0.9, 0.9, 0.1, 0.1])
        lc = np.array([1, 0, 1, 1])
        truth = np.array([1, 1, 0, 0])
        table = sweep_tau(self._scores(drs, lc), truth, grid=np.array([0.5]))
        row = table.rows[0]
        # the uncovered high scorer (index 1) must not be counted
        assert row.recall == 1.0 and row.precision == 1.0

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            sweep_tau(self._scores(np.ones(5)), np.zeros(5, int), grid=np.array([]))
