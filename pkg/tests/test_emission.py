import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import greenledger as gl
from greenledger import emission as em
from greenledger.classifiers.base import Prediction
from greenledger.corpus import TransactionRecord
from greenledger.errors import DataValidationError


def pred(label, score=0.9):
    return Prediction(label=label, score=score, topk=((label, score),), kind="probability")


def rec(rid, text="line", amount=100.0, currency="USD"):
    return TransactionRecord(id=rid, text=text, amount=amount, currency=currency)


def test_line_emission_is_spend_times_factor(tax):
    est = em.estimate_line(rec("a", amount=250.0), pred("22"), tax)
    assert est.mapped
    assert est.factor == tax.factors["22"].factor
    assert est.emission == 250.0 * tax.factors["22"].factor
    assert est.review_flag is False


def test_low_confidence_sets_review_flag(tax):
    est = em.estimate_line(rec("a"), pred("22", score=0.4), tax)
    assert est.mapped and est.review_flag is True
    est = em.estimate_line(rec("a"), pred("22", score=0.5), tax)
    assert est.review_flag is False  # threshold is strict-below
    est = em.estimate_line(rec("a"), pred("22", score=0.6), tax, confidence_threshold=0.7)
    assert est.review_flag is True


def test_negative_amount_passes_through_flagged(tax):
    est = em.estimate_line(rec("a", amount=-50.0), pred("22"), tax)
    assert est.mapped and est.review_flag is True
    assert est.emission == -50.0 * tax.factors["22"].factor


def test_currency_mismatch_flags_but_maps(tax):
    est = em.estimate_line(rec("a", currency="EUR"), pred("22"), tax)
    assert est.mapped and est.review_flag is True
    est = em.estimate_line(rec("a", currency="usd"), pred("22"), tax)
    assert est.review_flag is False
    est = em.estimate_line(rec("a", currency=None), pred("22"), tax)
    assert est.review_flag is False


def test_missing_amount_is_unmapped_with_reason(tax):
    est = em.estimate_line(rec("a", amount=None), pred("22"), tax)
    assert not est.mapped
    assert est.unmapped_reason == "missing amount"
    assert est.emission is None and est.review_flag is True


def test_unknown_class_is_unmapped(tax):
    est = em.estimate_line(rec("a"), pred("9999"), tax)
    assert not est.mapped
    assert "unknown class" in est.unmapped_reason


def test_missing_factor_is_unmapped():
    classes = {"X": gl.CommodityClass(code="X", title="Thing", naics_codes=("1",))}
    bare = gl.Taxonomy(classes=classes, factors={})
    est = em.estimate_line(rec("a"), pred("X"), bare)
    assert not est.mapped
    assert "no emission factor" in est.unmapped_reason


def test_estimate_ledger_length_check(tax):
    with pytest.raises(DataValidationError):
        em.estimate_ledger([rec("a")], [], tax)


def test_aggregate_groups_and_conserves(tax):
    estimates = em.estimate_ledger(
        [rec("a", amount=100.0), rec("b", amount=50.0), rec("c", amount=10.0),
         rec("d", amount=None)],
        [pred("22"), pred("22"), pred("5411"), pred("22")],
        tax,
    )
    report = em.aggregate(estimates)
    assert report.per_class["22"].line_count == 2
    assert report.per_class["22"].total_spend == 150.0
    assert report.mapped_count == 3
    assert report.unmapped == ("d",)
    mapped = [e for e in estimates if e.mapped]
    assert report.total_emission == math.fsum(e.emission for e in mapped)
    assert report.total_spend == math.fsum(e.spend for e in mapped)
    assert report.total_emission == math.fsum(t.total_emission for t in report.per_class.values())


def test_aggregate_empty_is_zero_totals():
    report = em.aggregate([])
    assert report.total_spend == 0.0
    assert report.total_emission == 0.0
    assert report.mapped_count == 0
    assert report.per_class == {}


@settings(max_examples=60, deadline=None)
@given(
    data=st.lists(
        st.tuples(
            st.sampled_from(["22", "5411", "311FT", "562"]),
            st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
        ),
        max_size=40,
    ),
    seed=st.integers(min_value=0, max_value=1000),
)
def test_aggregate_permutation_invariant(tax, data, seed):
    records = [rec(f"r{i}", amount=amount) for i, (_, amount) in enumerate(data)]
    preds = [pred(label) for label, _ in data]
    estimates = em.estimate_ledger(records, preds, tax)
    report = em.aggregate(estimates)
    shuffled = list(estimates)
    random.Random(seed).shuffle(shuffled)
    report2 = em.aggregate(shuffled)
    assert report2 == report
    assert report.total_spend == math.fsum(t.total_spend for t in report.per_class.values())


def test_export_report_csv_deterministic(tmp_path, tax):
    estimates = em.estimate_ledger(
        [rec("a", amount=100.0), rec("b", amount=10.5)],
        [pred("22"), pred("5411")],
        tax,
    )
    report = em.aggregate(estimates)
    p1 = tmp_path / "r1.csv"
    p2 = tmp_path / "r2.csv"
    em.export_report_csv(report, tax, p1)
    em.export_report_csv(em.aggregate(list(reversed(estimates))), tax, p2)
    assert p1.read_bytes() == p2.read_bytes()
    lines = p1.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("class_code,")
    assert lines[-1].startswith("TOTAL,")
    codes = [line.split(",")[0] for line in lines[1:-1]]
    assert codes == sorted(codes)


def test_export_line_audit_includes_unmapped(tmp_path, tax):
    estimates = em.estimate_ledger(
        [rec("a"), rec("b", amount=None)], [pred("22"), pred("22")], tax
    )
    path = tmp_path / "audit.csv"
    em.export_line_audit_csv(estimates, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 3
    assert "missing amount" in lines[2]
    assert lines[1].split(",")[7] == "false"  # review_flag column


def test_plot_spend_emission(tmp_path, tax):
    estimates = em.estimate_ledger(
        [rec("a", amount=100.0), rec("b", amount=40.0)],
        [pred("22"), pred("5411")],
        tax,
    )
    out = tmp_path / "bars.png"
    em.plot_spend_emission(em.aggregate(estimates), out)
    assert out.stat().st_size > 0
    with pytest.raises(DataValidationError):
        em.plot_spend_emission(em.aggregate([]), tmp_path / "empty.png")
