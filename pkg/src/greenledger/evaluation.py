"""Classification quality metrics and report formatting.

Weighted F1 is the headline number: per-class F1 weighted by gold support,
with the 0/0 precision or recall convention fixed at 0 so degenerate
classifiers score low instead of crashing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import DataValidationError, ParseError


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    weighted_f1: float
    per_class: dict[str, ClassMetrics]
    confusion: dict[str, dict[str, int]]
    n_examples: int


def _check_pairs(predictions: list[str], golds: list[str]) -> None:
    if len(predictions) != len(golds):
        raise DataValidationError(
            f"prediction/gold length mismatch: {len(predictions)} vs {len(golds)}"
        )
    if not golds:
        raise DataValidationError("cannot evaluate zero examples")


def per_class_metrics(predictions: list[str], golds: list[str]) -> dict[str, ClassMetrics]:
    """Precision/recall/F1/support for every label seen in golds or predictions."""
    _check_pairs(predictions, golds)
    labels = sorted(set(golds) | set(predictions))
    tp: dict[str, int] = {label: 0 for label in labels}
    pred_count: dict[str, int] = {label: 0 for label in labels}
    gold_count: dict[str, int] = {label: 0 for label in labels}
    for pred, gold in zip(predictions, golds):
        pred_count[pred] += 1
        gold_count[gold] += 1
        if pred == gold:
            tp[gold] += 1
    out = {}
    for label in labels:
        precision = tp[label] / pred_count[label] if pred_count[label] else 0.0
        recall = tp[label] / gold_count[label] if gold_count[label] else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        out[label] = ClassMetrics(precision=precision, recall=recall, f1=f1, support=gold_count[label])
    return out


def weighted_f1(predictions: list[str], golds: list[str]) -> float:
    """Support-weighted mean of per-class F1 over classes present in golds."""
    metrics = per_class_metrics(predictions, golds)
    total = len(golds)
    return math.fsum(m.f1 * m.support for m in metrics.values()) / total


def confusion_counts(predictions: list[str], golds: list[str]) -> dict[str, dict[str, int]]:
    """Sparse gold -> predicted -> count map; row sums equal gold supports."""
    _check_pairs(predictions, golds)
    table: dict[str, dict[str, int]] = {}
    for pred, gold in zip(predictions, golds):
        row = table.setdefault(gold, {})
        row[pred] = row.get(pred, 0) + 1
    return table


def evaluate_predictions(predictions: list[str], golds: list[str]) -> EvalReport:
    return EvalReport(
        weighted_f1=weighted_f1(predictions, golds),
        per_class=per_class_metrics(predictions, golds),
        confusion=confusion_counts(predictions, golds),
        n_examples=len(golds),
    )


def evaluate(model, examples) -> EvalReport:
    """Score a trained classifier on labeled examples.

    The model only needs a predict_batch(texts) method returning objects
    with a .label attribute.
    """
    if not examples:
        raise DataValidationError("cannot evaluate on an empty example list")
    texts = [ex.text for ex in examples]
    golds = [ex.label for ex in examples]
    predictions = [p.label for p in model.predict_batch(texts)]
    return evaluate_predictions(predictions, golds)


def flag_low_performance(report: EvalReport, threshold: float = 0.7) -> list[tuple[str, float]]:
    """Classes with gold support whose F1 falls below threshold, worst first."""
    if not 0.0 < threshold < 1.0:
        raise DataValidationError(f"threshold must be in (0, 1), got {threshold}")
    flagged = [
        (label, m.f1)
        for label, m in report.per_class.items()
        if m.support > 0 and m.f1 < threshold
    ]
    flagged.sort(key=lambda item: (item[1], item[0]))
    return flagged


def compare(reports: dict[str, EvalReport]) -> list[tuple[str, float]]:
    """(name, weighted_f1) rows sorted by score descending; ties sort by
    name so the table is deterministic."""
    if not reports:
        raise DataValidationError("cannot compare zero reports")
    rows = [(name, report.weighted_f1) for name, report in reports.items()]
    rows.sort(key=lambda item: (-item[1], item[0]))
    return rows


def report_to_json(report: EvalReport) -> str:
    payload = {
        "format": "eval-report",
        "version": 1,
        "weighted_f1": report.weighted_f1,
        "n_examples": report.n_examples,
        "per_class": {
            label: {
                "precision": m.precision,
                "recall": m.recall,
                "f1": m.f1,
                "support": m.support,
            }
            for label, m in sorted(report.per_class.items())
        },
        "confusion": {g: dict(sorted(row.items())) for g, row in sorted(report.confusion.items())},
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def report_from_json(text: str) -> EvalReport:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed evaluation report: {exc}") from exc
    if payload.get("format") != "eval-report" or payload.get("version") != 1:
        raise ParseError("not a version-1 evaluation report")
    per_class = {
        label: ClassMetrics(
            precision=m["precision"], recall=m["recall"], f1=m["f1"], support=m["support"]
        )
        for label, m in payload["per_class"].items()
    }
    return EvalReport(
        weighted_f1=payload["weighted_f1"],
        per_class=per_class,
        confusion={g: {p: int(c) for p, c in row.items()} for g, row in payload["confusion"].items()},
        n_examples=payload["n_examples"],
    )


def save_report(report: EvalReport, path: str | Path) -> None:
    Path(path).write_text(report_to_json(report), encoding="utf-8")


def load_report(path: str | Path) -> EvalReport:
    return report_from_json(Path(path).read_text(encoding="utf-8"))


def report_table(report: EvalReport) -> str:
    """Aligned per-class metrics table for terminal reading."""
    rows = [("class", "precision", "recall", "f1", "support")]
    for label, m in sorted(report.per_class.items()):
        rows.append((label, f"{m.precision:.4f}", f"{m.recall:.4f}", f"{m.f1:.4f}", str(m.support)))
    rows.append(("weighted_f1", "", "", f"{report.weighted_f1:.4f}", str(report.n_examples)))
    widths = [max(len(row[i]) for row in rows) for i in range(5)]
    lines = []
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"


def comparison_table(rows: list[tuple[str, float]]) -> str:
    """Aligned (model, weighted_f1) table, best first."""
    width = max(len("model"), max((len(name) for name, _ in rows), default=0))
    lines = ["model".ljust(width) + "  weighted_f1"]
    for name, score in rows:
        lines.append(name.ljust(width) + f"  {score:.4f}")
    return "\n".join(lines) + "\n"


def plot_learning_curve(epoch_logs, path: str | Path) -> None:
    """Train/validation loss per epoch as a PNG."""
    if not epoch_logs:
        raise DataValidationError("cannot plot an empty epoch log")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    epochs = [log.epoch for log in epoch_logs]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(epochs, [log.train_loss for log in epoch_logs], marker="o", label="train loss")
    ax.plot(epochs, [log.validation_loss for log in epoch_logs], marker="s", label="validation loss")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
