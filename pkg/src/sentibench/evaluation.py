"""Confusion matrices, accuracy/precision/recall/F1 and their tabular rendering."""
import io
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from rich.console import Console
from rich.table import Table

from .corpus import LABELS, NUM_CLASSES, labels_to_indices
from .errors import EvaluationError

logger = logging.getLogger(__name__)

METRIC_NAMES = ("accuracy", "precision", "recall", "f1")


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """3x3 counts; rows are gold labels, columns predictions, both ordered (-1, 0, 1)."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (NUM_CLASSES, NUM_CLASSES) or (counts < 0).any():
            raise EvaluationError(f"confusion matrix must be a nonnegative 3x3 array, got shape {counts.shape}")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def cell(self, gold, pred) -> int:
        g, p = labels_to_indices([gold, pred])
        return int(self.counts[g, p])

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts + other.counts)

    def __eq__(self, other) -> bool:
        return isinstance(other, ConfusionMatrix) and np.array_equal(self.counts, other.counts)

    def to_list(self) -> List[List[int]]:
        return self.counts.tolist()


def confusion_matrix(gold: Sequence, pred: Sequence) -> ConfusionMatrix:
    if len(gold) != len(pred):
        raise EvaluationError(f"gold has {len(gold)} labels but pred has {len(pred)}")
    if len(gold) == 0:
        raise EvaluationError("cannot evaluate an empty prediction set")
    g = labels_to_indices(gold)
    p = labels_to_indices(pred)
    counts = np.bincount(g * NUM_CLASSES + p, minlength=NUM_CLASSES * NUM_CLASSES)
    return ConfusionMatrix(counts.reshape(NUM_CLASSES, NUM_CLASSES))


@dataclass(frozen=True)
class ClassMetrics:
    label: int
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    per_class: Tuple[ClassMetrics, ...]
    macro: Dict[str, float]
    weighted: Dict[str, float]
    total: int
    confusion: ConfusionMatrix
    # e.g. "precision[0]" when class 0 was never predicted
    zero_division: Tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro": dict(self.macro),
            "weighted": dict(self.weighted),
            "per_class": {
                str(m.label): {"precision": m.precision, "recall": m.recall, "f1": m.f1, "support": m.support}
                for m in self.per_class
            },
            "total": self.total,
            "confusion_matrix": self.confusion.to_list(),
            "zero_division": list(self.zero_division),
        }


def _safe_ratio(num: float, den: float) -> Tuple[float, bool]:
    if den == 0:
        return 0.0, True
    return num / den, False


def compute_metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Accuracy plus per-class, macro and support-weighted precision/recall/F1.

    Undefined ratios are reported as 0 and listed in ``zero_division``.
    """
    total = cm.total
    if total == 0:
        raise EvaluationError("cannot compute metrics on an empty confusion matrix")
    counts = cm.counts
    tp = np.diag(counts)
    predicted = counts.sum(axis=0)
    support = counts.sum(axis=1)

    per_class: List[ClassMetrics] = []
    flagged: List[str] = []
    for c, label in enumerate(LABELS):
        precision, p_zero = _safe_ratio(tp[c], predicted[c])
        recall, r_zero = _safe_ratio(tp[c], support[c])
        f1, _ = _safe_ratio(2 * precision * recall, precision + recall)
        if p_zero:
            flagged.append(f"precision[{int(label)}]")
        if r_zero:
            flagged.append(f"recall[{int(label)}]")
        per_class.append(ClassMetrics(int(label), float(precision), float(recall), float(f1), int(support[c])))
    if flagged:
        logger.warning("zero denominator for %s; reported as 0", ", ".join(flagged))

    weights = support / total
    macro = {name: float(np.mean([getattr(m, name) for m in per_class])) for name in ("precision", "recall", "f1")}
    weighted = {
        name: float(sum(w * getattr(m, name) for w, m in zip(weights, per_class)))
        for name in ("precision", "recall", "f1")
    }
    return MetricsReport(
        accuracy=float(np.trace(counts) / total),
        per_class=tuple(per_class),
        macro=macro,
        weighted=weighted,
        total=total,
        confusion=cm,
        zero_division=tuple(flagged),
    )


def evaluate_predictions(gold: Sequence, pred: Sequence) -> MetricsReport:
    return compute_metrics(confusion_matrix(gold, pred))


def comparison_table(reports: Mapping[str, Optional[MetricsReport]], title: str = "Model comparison") -> Table:
    """Models as rows; accuracy then macro and weighted precision/recall/F1 as columns.

    A ``None`` report renders as a failed row.
    """
    table = Table(title=title)
    table.add_column("Model", style="cyan")
    table.add_column("Accuracy", justify="right")
    for avg in ("macro", "weighted"):
        for name in ("precision", "recall", "f1"):
            table.add_column(f"{name.capitalize() if name != 'f1' else 'F1'} ({avg})", justify="right")
    for model, report in reports.items():
        if report is None:
            table.add_row(model, *(["[red]failed[/red]"] * 7))
            continue
        cells = [f"{report.accuracy:.4f}"]
        for avg in (report.macro, report.weighted):
            cells.extend(f"{avg[name]:.4f}" for name in ("precision", "recall", "f1"))
        table.add_row(model, *cells)
    return table


def render_text(table: Table, width: int = 140) -> str:
    """Plain aligned text for a rich table, without color codes."""
    buffer = io.StringIO()
    Console(file=buffer, width=width, color_system=None, force_terminal=False).print(table)
    return buffer.getvalue()
