"""Per-class and macro classification metrics plus report emitters.

Conventions: precision = TP/(TP+FP) and recall = TP/(TP+FN), both defined
as 0 when the denominator is 0; F1 is their harmonic mean (0 when both are
0); macro scores are unweighted class means. The confusion matrix is
truth-major: rows are true classes, columns predictions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import ActivityLabel
from .errors import InvalidValue

METRICS_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class MetricsReport:
    per_class: tuple[tuple[float, float, float], ...]
    macro: tuple[float, float, float]
    accuracy: float
    confusion: np.ndarray

    def __post_init__(self):
        confusion = np.asarray(self.confusion, dtype=np.int64)
        if confusion.ndim != 2 or confusion.shape[0] != confusion.shape[1]:
            raise InvalidValue("confusion matrix must be square")
        if confusion.shape[0] != len(self.per_class):
            raise InvalidValue("per-class metrics must match the confusion size")
        confusion.setflags(write=False)
        object.__setattr__(self, "confusion", confusion)
        object.__setattr__(self, "per_class", tuple(tuple(row) for row in self.per_class))

    @property
    def class_count(self) -> int:
        return self.confusion.shape[0]

    @property
    def macro_f1(self) -> float:
        return self.macro[2]

    def to_json(self, class_names: list[str] | None = None) -> str:
        payload = {
            "version": METRICS_SCHEMA_VERSION,
            "accuracy": self.accuracy,
            "macro": {
                "precision": self.macro[0],
                "recall": self.macro[1],
                "f1": self.macro[2],
            },
            "per_class": [
                {"precision": p, "recall": r, "f1": f} for p, r, f in self.per_class
            ],
            "confusion": self.confusion.tolist(),
        }
        if class_names is not None:
            payload["class_names"] = list(class_names)
        return json.dumps(payload, indent=2, sort_keys=True)

    def render_table(self, class_names: list[str] | None = None) -> str:
        """Fixed-width per-class table with a trailing macro-average row."""
        names = class_names or [f"class {i:02d}" for i in range(self.class_count)]
        width = max(len(n) for n in names + ["Macro Average"]) + 2
        lines = [f"{'Activity Class':<{width}} Precision  Recall  F1-Score"]
        for i, (p, r, f) in enumerate(self.per_class):
            lines.append(f"{names[i]:<{width}} {p:9.2f} {r:7.2f} {f:9.2f}")
        p, r, f = self.macro
        lines.append(f"{'Macro Average':<{width}} {p:9.2f} {r:7.2f} {f:9.2f}")
        return "\n".join(lines)


def _label_ids(labels, class_count: int, what: str) -> np.ndarray:
    ids = np.empty(len(labels), dtype=np.int64)
    for i, lab in enumerate(labels):
        ids[i] = lab.class_id if isinstance(lab, ActivityLabel) else int(lab)
        if not 0 <= ids[i] < class_count:
            raise InvalidValue(f"{what}[{i}] = {ids[i]} outside [0, {class_count})")
    return ids


def evaluate(predictions, truths, class_count: int) -> MetricsReport:
    """Score predictions against truths over ``class_count`` classes."""
    if len(predictions) != len(truths) or len(truths) == 0:
        raise InvalidValue(
            f"need equal, non-empty label lists, got {len(predictions)} and {len(truths)}"
        )
    if class_count < 1:
        raise InvalidValue("class_count must be >= 1")
    pred = _label_ids(predictions, class_count, "predictions")
    truth = _label_ids(truths, class_count, "truths")

    confusion = np.zeros((class_count, class_count), dtype=np.int64)
    np.add.at(confusion, (truth, pred), 1)

    per_class = []
    for c in range(class_count):
        tp = confusion[c, c]
        fp = confusion[:, c].sum() - tp
        fn = confusion[c, :].sum() - tp
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        per_class.append((float(precision), float(recall), float(f1)))
    macro = tuple(float(np.mean([m[i] for m in per_class])) for i in range(3))
    accuracy = float(np.trace(confusion) / len(truth))
    return MetricsReport(
        per_class=tuple(per_class), macro=macro, accuracy=accuracy, confusion=confusion
    )


def confusion_csv(report: MetricsReport, class_names: list[str] | None = None) -> str:
    """Truth-major CSV with a header row of class names."""
    names = class_names or [f"class_{i:02d}" for i in range(report.class_count)]
    lines = ["truth\\prediction," + ",".join(names)]
    for i, row in enumerate(report.confusion):
        lines.append(names[i] + "," + ",".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"


def confusion_svg(report: MetricsReport, class_names: list[str] | None = None) -> str:
    """Simple deterministic heatmap grid of the confusion matrix."""
    names = class_names or [f"class {i:02d}" for i in range(report.class_count)]
    n = report.class_count
    cell = 34
    margin_left, margin_top = 150, 120
    width = margin_left + n * cell + 20
    height = margin_top + n * cell + 20
    peak = max(1, int(report.confusion.max()))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="11">',
        '<style>text{fill:#222}</style>',
    ]
    for i in range(n):
        y = margin_top + i * cell
        parts.append(
            f'<text x="{margin_left - 6}" y="{y + cell * 0.65:.1f}" text-anchor="end">{names[i]}</text>'
        )
        x = margin_left + i * cell
        parts.append(
            f'<text x="{x + cell / 2:.1f}" y="{margin_top - 6}" text-anchor="start" '
            f'transform="rotate(-60 {x + cell / 2:.1f} {margin_top - 6})">{names[i]}</text>'
        )
        for j in range(n):
            v = int(report.confusion[i, j])
            shade = 255 - int(200 * v / peak)
            x = margin_left + j * cell
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="rgb({shade},{shade},255)" stroke="#999"/>'
            )
            if v:
                parts.append(
                    f'<text x="{x + cell / 2:.1f}" y="{y + cell * 0.65:.1f}" '
                    f'text-anchor="middle">{v}</text>'
                )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
