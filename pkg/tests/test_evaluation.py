"""Tests for confusion matrices, metrics and the comparison table."""
import logging

import numpy as np
import pytest

from sentibench.errors import EvaluationError
from sentibench.evaluation import (
    ConfusionMatrix,
    comparison_table,
    compute_metrics,
    confusion_matrix,
    evaluate_predictions,
    render_text,
)


def _oracle(gold, pred):
    """Per-example tallies, no matrix."""
    out = {}
    for label in (-1, 0, 1):
        tp = sum(1 for g, p in zip(gold, pred) if g == label and p == label)
        fp = sum(1 for g, p in zip(gold, pred) if g != label and p == label)
        fn = sum(1 for g, p in zip(gold, pred) if g == label and p != label)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        out[label] = (precision, recall, f1)
    return out


class TestConfusionMatrix:
    """Test counting and merging."""

    def test_counts_cells(self):
        cm = confusion_matrix([1, 1, 0], [1, 0, 0])
        assert cm.cell(1, 1) == 1
        assert cm.cell(1, 0) == 1
        assert cm.cell(0, 0) == 1
        assert cm.total == 3
        assert cm.to_list() == [[0, 0, 0], [0, 1, 0], [0, 1, 1]]

    def test_perfect_predictions_are_diagonal(self):
        labels = [-1, 0, 1, 1, 0]
        assert confusion_matrix(labels, labels).to_list() == [[1, 0, 0], [0, 2, 0], [0, 0, 2]]

    def test_length_mismatch(self):
        with pytest.raises(EvaluationError, match="labels"):
            confusion_matrix([1, 0], [1])

    def test_empty_input(self):
        with pytest.raises(EvaluationError, match="empty"):
            confusion_matrix([], [])

    def test_shards_add_up(self):
        gold = [1, 0, -1, 1, 0, 0, -1]
        pred = [1, 1, -1, 0, 0, -1, -1]
        merged = confusion_matrix(gold[:3], pred[:3]) + confusion_matrix(gold[3:], pred[3:])
        assert merged == confusion_matrix(gold, pred)

    @pytest.mark.parametrize("counts", [np.zeros((2, 2)), -np.ones((3, 3))])
    def test_invalid_counts(self, counts):
        with pytest.raises(EvaluationError):
            ConfusionMatrix(counts)


class TestComputeMetrics:
    """Test accuracy, per-class and averaged metrics."""

    def test_perfect(self):
        report = evaluate_predictions([-1, 0, 1], [-1, 0, 1])
        assert report.accuracy == 1.0
        assert all(v == 1.0 for v in report.macro.values())
        assert all(v == 1.0 for v in report.weighted.values())
        assert report.zero_division == ()

    def test_hand_computed_example(self):
        report = evaluate_predictions([1, 1, 0, -1], [1, 0, 0, -1])
        by_label = {m.label: m for m in report.per_class}
        assert report.accuracy == 0.75
        assert (by_label[1].precision, by_label[1].recall) == (1.0, 0.5)
        assert by_label[1].f1 == pytest.approx(2 / 3)
        assert (by_label[0].precision, by_label[0].recall) == (0.5, 1.0)
        assert by_label[0].f1 == pytest.approx(2 / 3)
        assert (by_label[-1].precision, by_label[-1].recall, by_label[-1].f1) == (1.0, 1.0, 1.0)
        assert report.macro["f1"] == pytest.approx(0.7778, abs=1e-4)
        assert [m.support for m in report.per_class] == [1, 1, 2]

    def test_absent_class_is_zero_and_flagged(self, caplog):
        with caplog.at_level(logging.WARNING, logger="sentibench.evaluation"):
            report = evaluate_predictions([1, 1, 0], [1, 0, 0])
        negative = report.per_class[0]
        assert (negative.precision, negative.recall, negative.f1, negative.support) == (0.0, 0.0, 0.0, 0)
        assert set(report.zero_division) == {"precision[-1]", "recall[-1]"}
        assert report.weighted["recall"] == pytest.approx(report.accuracy, abs=1e-12)
        assert "zero denominator" in caplog.text

    def test_empty_matrix(self):
        with pytest.raises(EvaluationError, match="empty"):
            compute_metrics(ConfusionMatrix(np.zeros((3, 3))))

    def test_weighted_recall_is_accuracy(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            counts = rng.integers(0, 20, size=(3, 3))
            if counts.sum() == 0:
                continue
            report = compute_metrics(ConfusionMatrix(counts))
            assert abs(report.weighted["recall"] - report.accuracy) < 1e-12
            f1s = [m.f1 for m in report.per_class]
            assert min(f1s) - 1e-12 <= report.macro["f1"] <= max(f1s) + 1e-12
            values = [report.accuracy, *report.macro.values(), *report.weighted.values()]
            assert all(0.0 <= v <= 1.0 + 1e-12 for v in values)

    def test_matches_per_example_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            n = int(rng.integers(1, 30))
            gold = rng.choice([-1, 0, 1], size=n).tolist()
            pred = rng.choice([-1, 0, 1], size=n).tolist()
            report = evaluate_predictions(gold, pred)
            expected = _oracle(gold, pred)
            for m in report.per_class:
                assert (m.precision, m.recall, m.f1) == pytest.approx(expected[m.label], abs=1e-12)
            assert report.accuracy == pytest.approx(sum(g == p for g, p in zip(gold, pred)) / n, abs=1e-12)

    def test_order_does_not_matter(self):
        rng = np.random.default_rng(2)
        gold = rng.choice([-1, 0, 1], size=50)
        pred = rng.choice([-1, 0, 1], size=50)
        order = rng.permutation(50)
        a = evaluate_predictions(gold.tolist(), pred.tolist())
        b = evaluate_predictions(gold[order].tolist(), pred[order].tolist())
        assert a.to_dict() == b.to_dict()

    def test_to_dict_layout(self):
        data = evaluate_predictions([1, 1, 0, -1], [1, 0, 0, -1]).to_dict()
        assert set(data) == {"accuracy", "macro", "weighted", "per_class", "total", "confusion_matrix", "zero_division"}
        assert set(data["per_class"]) == {"-1", "0", "1"}
        assert data["confusion_matrix"] == [[1, 0, 0], [0, 1, 0], [0, 1, 1]]


class TestComparisonTable:
    """Test the model-by-metric rendering."""

    def test_columns_and_rows(self):
        report = evaluate_predictions([1, 1, 0, -1], [1, 0, 0, -1])
        table = comparison_table({"nb": report, "bilstm": None})
        assert len(table.columns) == 8
        assert table.row_count == 2
        text = render_text(table)
        assert "0.7500" in text
        assert "F1 (macro)" in text
        assert "failed" in text
        assert "\x1b[" not in text
