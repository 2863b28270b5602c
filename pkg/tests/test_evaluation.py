import math
import random

import pytest

from greenledger import evaluation as ev
from greenledger.classifiers.base import EpochLog
from greenledger.errors import DataValidationError, ParseError


def test_weighted_f1_hand_case():
    # golds [A,A,B], preds [A,B,B]:
    #   A: p=1, r=1/2, f1=2/3, support 2; B: p=1/2, r=1, f1=2/3, support 1
    #   weighted: (2/3*2 + 2/3*1)/3 = 2/3
    assert ev.weighted_f1(["A", "B", "B"], ["A", "A", "B"]) == pytest.approx(2 / 3, abs=1e-12)


def test_weighted_f1_constant_prediction_on_balanced_pair():
    # constant A on balanced golds: A: p=1/2, r=1, f1=2/3; B: f1=0
    #   weighted: (2/3*2 + 0*2)/4 = 1/3
    assert ev.weighted_f1(["A", "A", "A", "A"], ["A", "B", "A", "B"]) == pytest.approx(
        1 / 3, abs=1e-12
    )


def test_perfect_and_zero_scores():
    assert ev.weighted_f1(["A", "B"], ["A", "B"]) == 1.0
    assert ev.weighted_f1(["B", "A"], ["A", "B"]) == 0.0


def test_zero_over_zero_f1_is_zero():
    # label C never predicted and never gold-supported except as a miss
    metrics = ev.per_class_metrics(["A", "A"], ["A", "C"])
    assert metrics["C"].f1 == 0.0
    assert metrics["C"].support == 1


def test_matches_sklearn_weighted_f1():
    from sklearn.metrics import f1_score

    rng = random.Random(99)
    labels = [f"L{i}" for i in range(12)]
    golds = [rng.choice(labels) for _ in range(500)]
    preds = [rng.choice(labels) for _ in range(500)]
    ours = ev.weighted_f1(preds, golds)
    theirs = f1_score(golds, preds, average="weighted", zero_division=0)
    assert ours == pytest.approx(theirs, abs=1e-9)


def test_length_mismatch_and_empty_rejected():
    with pytest.raises(DataValidationError):
        ev.weighted_f1(["A"], ["A", "B"])
    with pytest.raises(DataValidationError):
        ev.weighted_f1([], [])


def test_confusion_row_sums_equal_gold_support():
    golds = ["A", "A", "B", "C", "C", "C"]
    preds = ["A", "B", "B", "A", "C", "C"]
    table = ev.confusion_counts(preds, golds)
    for label in set(golds):
        support = sum(1 for g in golds if g == label)
        assert sum(table[label].values()) == support
    assert table["C"]["A"] == 1 and table["C"]["C"] == 2


def test_evaluate_report_fields():
    report = ev.evaluate_predictions(["A", "B", "B"], ["A", "A", "B"])
    assert report.n_examples == 3
    assert report.weighted_f1 == pytest.approx(2 / 3)
    assert report.per_class["A"].precision == 1.0
    assert report.per_class["A"].recall == 0.5


class _Fixed:
    def __init__(self, mapping):
        self.mapping = mapping

    def predict_batch(self, texts):
        class P:
            def __init__(self, label):
                self.label = label

        return [P(self.mapping[t]) for t in texts]


def test_evaluate_uses_model_predictions(small_split):
    model = _Fixed({ex.text: ex.label for ex in small_split.test})
    report = ev.evaluate(model, list(small_split.test))
    assert report.weighted_f1 == 1.0


def test_evaluate_rejects_empty():
    with pytest.raises(DataValidationError):
        ev.evaluate(_Fixed({}), [])


def test_flag_low_performance_sorted_ascending():
    report = ev.evaluate_predictions(
        ["A", "A", "B", "C", "A", "C"], ["A", "A", "B", "B", "C", "C"]
    )
    flagged = ev.flag_low_performance(report, threshold=0.99)
    scores = [f1 for _, f1 in flagged]
    assert scores == sorted(scores)
    assert all(f1 < 0.99 for _, f1 in flagged)
    labels = [label for label, _ in flagged]
    assert "A" in labels  # precision hit by stray prediction


def test_flag_threshold_range():
    report = ev.evaluate_predictions(["A"], ["A"])
    for bad in (0.0, 1.0, -0.1, 2.0):
        with pytest.raises(DataValidationError):
            ev.flag_low_performance(report, threshold=bad)


def test_flag_ignores_prediction_only_labels():
    report = ev.evaluate_predictions(["B"], ["A"])
    flagged = dict(ev.flag_low_performance(report, threshold=0.9))
    assert "A" in flagged and "B" not in flagged


def test_compare_sorts_descending_with_name_ties():
    r_high = ev.evaluate_predictions(["A"], ["A"])
    r_low = ev.evaluate_predictions(["B"], ["A"])
    rows = ev.compare({"zeta": r_low, "alpha": r_high, "beta": r_high})
    assert [name for name, _ in rows] == ["alpha", "beta", "zeta"]
    with pytest.raises(DataValidationError):
        ev.compare({})


def test_report_json_round_trip(tmp_path):
    report = ev.evaluate_predictions(["A", "B", "B"], ["A", "A", "B"])
    path = tmp_path / "report.json"
    ev.save_report(report, path)
    again = ev.load_report(path)
    assert again == report
    with pytest.raises(ParseError):
        ev.report_from_json('{"format": "nope"}')


def test_report_table_is_aligned():
    report = ev.evaluate_predictions(["A", "B", "B"], ["A", "A", "B"])
    table = ev.report_table(report)
    lines = table.splitlines()
    assert lines[0].split() == ["class", "precision", "recall", "f1", "support"]
    assert lines[-1].startswith("weighted_f1")
    # column starts align between header and body rows
    assert lines[0].index("precision") == lines[1].index("1.0000")


def test_comparison_table_format():
    r = ev.evaluate_predictions(["A"], ["A"])
    text = ev.comparison_table([("modelname", r.weighted_f1)])
    assert text.splitlines()[0].startswith("model")
    assert "1.0000" in text


def test_learning_curve_plot(tmp_path):
    logs = [EpochLog(epoch=i, train_loss=2.0 / i, validation_loss=2.5 / i) for i in range(1, 6)]
    out = tmp_path / "curve.png"
    ev.plot_learning_curve(logs, out)
    assert out.stat().st_size > 0
    with pytest.raises(DataValidationError):
        ev.plot_learning_curve([], tmp_path / "empty.png")


def test_weighted_f1_uses_exact_summation():
    golds = ["A"] * 1000 + ["B"] * 3
    preds = ["A"] * 1000 + ["A"] * 3
    expected = (1000 * (2 * (1000 / 1003) / (1 + 1000 / 1003))) / 1003
    assert ev.weighted_f1(preds, golds) == pytest.approx(expected, abs=1e-12)
    assert math.isfinite(ev.weighted_f1(preds, golds))
