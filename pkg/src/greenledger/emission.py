"""Spend-based emission estimation: emission = spend x class factor.

Aggregation uses math.fsum so per-class and overall totals are exact
(correctly rounded) sums of line values, independent of line order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

from .classifiers.base import Prediction
from .corpus import TransactionRecord
from .errors import DataValidationError
from .taxonomy import Taxonomy

DEFAULT_CONFIDENCE_THRESHOLD = 0.5


@dataclass(frozen=True)
class LineEstimate:
    record_id: str
    text: str
    label: str | None
    score: float | None
    spend: float | None
    factor: float | None
    emission: float | None
    review_flag: bool
    unmapped_reason: str | None = None

    @property
    def mapped(self) -> bool:
        return self.unmapped_reason is None


@dataclass(frozen=True)
class ClassTotals:
    total_spend: float
    total_emission: float
    line_count: int


@dataclass(frozen=True)
class EmissionReport:
    per_class: dict[str, ClassTotals]
    total_spend: float
    total_emission: float
    mapped_count: int
    unmapped: tuple[str, ...]


def estimate_line(
    record: TransactionRecord,
    prediction: Prediction,
    tax: Taxonomy,
    confidence_threshold: float = DEFAULT_CONFIDENCE_THRESHOLD,
) -> LineEstimate:
    """Price one ledger line. Missing amounts and missing factors produce
    unmapped lines, never a crash; low confidence, negative spend, and
    currency labels that disagree with the factor basis set review_flag."""
    if record.amount is None:
        return LineEstimate(
            record_id=record.id, text=record.text, label=prediction.label,
            score=prediction.score, spend=None, factor=None, emission=None,
            review_flag=True, unmapped_reason="missing amount",
        )
    if prediction.label not in tax.classes:
        return LineEstimate(
            record_id=record.id, text=record.text, label=prediction.label,
            score=prediction.score, spend=record.amount, factor=None, emission=None,
            review_flag=True, unmapped_reason=f"unknown class {prediction.label!r}",
        )
    factor = tax.factors.get(prediction.label)
    if factor is None:
        return LineEstimate(
            record_id=record.id, text=record.text, label=prediction.label,
            score=prediction.score, spend=record.amount, factor=None, emission=None,
            review_flag=True, unmapped_reason=f"no emission factor for class {prediction.label!r}",
        )
    review = prediction.score < confidence_threshold or record.amount < 0
    if record.currency and not factor.currency_basis.upper().startswith(record.currency.upper()):
        review = True
    return LineEstimate(
        record_id=record.id, text=record.text, label=prediction.label,
        score=prediction.score, spend=record.amount, factor=factor.factor,
        emission=record.amount * factor.factor, review_flag=review,
    )


def estimate_ledger(
    records: list[TransactionRecord],
    predictions: list[Prediction],
    tax: Taxonomy,
    confidence_threshold: float = DEFAULT_CONFIDENCE_THRESHOLD,
) -> list[LineEstimate]:
    if len(records) != len(predictions):
        raise DataValidationError(
            f"record/prediction length mismatch: {len(records)} vs {len(predictions)}"
        )
    return [
        estimate_line(rec, pred, tax, confidence_threshold)
        for rec, pred in zip(records, predictions)
    ]


def aggregate(estimates: list[LineEstimate]) -> EmissionReport:
    """Per-class and overall totals over mapped lines; order-independent."""
    by_class: dict[str, list[LineEstimate]] = {}
    unmapped = []
    for est in estimates:
        if est.mapped:
            by_class.setdefault(est.label, []).append(est)
        else:
            unmapped.append(est.record_id)
    per_class = {}
    for label in sorted(by_class):
        lines = by_class[label]
        per_class[label] = ClassTotals(
            total_spend=math.fsum(line.spend for line in lines),
            total_emission=math.fsum(line.emission for line in lines),
            line_count=len(lines),
        )
    return EmissionReport(
        per_class=per_class,
        total_spend=math.fsum(t.total_spend for t in per_class.values()),
        total_emission=math.fsum(t.total_emission for t in per_class.values()),
        mapped_count=sum(t.line_count for t in per_class.values()),
        unmapped=tuple(sorted(unmapped)),
    )


def export_report_csv(report: EmissionReport, tax: Taxonomy, path: str | Path) -> None:
    """Per-class totals plus a TOTAL row; byte-stable for fixed inputs."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["class_code", "class_title", "total_spend", "total_emission_kg", "line_count"])
        for code in sorted(report.per_class):
            totals = report.per_class[code]
            title = tax.classes[code].title if code in tax.classes else ""
            w.writerow([code, title, repr(totals.total_spend), repr(totals.total_emission), totals.line_count])
        w.writerow(["TOTAL", "", repr(report.total_spend), repr(report.total_emission), report.mapped_count])


def export_line_audit_csv(estimates: list[LineEstimate], path: str | Path) -> None:
    """One row per input line, mapped or not, for manual review."""

    def fmt(value: float | None) -> str:
        return "" if value is None else repr(value)

    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow([
            "record_id", "text", "label", "score", "spend", "factor",
            "emission_kg", "review_flag", "unmapped_reason",
        ])
        for est in estimates:
            w.writerow([
                est.record_id, est.text, est.label or "", fmt(est.score), fmt(est.spend),
                fmt(est.factor), fmt(est.emission), str(est.review_flag).lower(),
                est.unmapped_reason or "",
            ])


def plot_spend_emission(report: EmissionReport, path: str | Path) -> None:
    """Grouped per-class bars of spend share vs emission share."""
    if not report.per_class:
        raise DataValidationError("cannot plot an empty emission report")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    codes = sorted(report.per_class)
    spend = np.array([report.per_class[c].total_spend for c in codes])
    emission = np.array([report.per_class[c].total_emission for c in codes])
    spend_share = spend / report.total_spend if report.total_spend else spend
    emission_share = emission / report.total_emission if report.total_emission else emission

    x = np.arange(len(codes))
    width = 0.4
    fig, ax = plt.subplots(figsize=(max(7.0, 0.35 * len(codes)), 4.5))
    ax.bar(x - width / 2, spend_share, width, label="spend share")
    ax.bar(x + width / 2, emission_share, width, label="emission share")
    ax.set_xticks(x)
    ax.set_xticklabels(codes, rotation=90, fontsize=7)
    ax.set_ylabel("share of total")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
