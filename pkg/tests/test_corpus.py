import json
import logging
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import greenledger as gl
from greenledger import corpus as cp
from greenledger.errors import DataValidationError, ParseError


def make_examples(per_class: dict[str, int]) -> list[cp.LabeledExample]:
    out = []
    for label, n in per_class.items():
        out.extend(cp.LabeledExample(text=f"item {label} {i}", label=label) for i in range(n))
    return out


def test_load_labeled_round_trip(tmp_path, tax):
    examples = [
        cp.LabeledExample(text="monthly legal retainer", label="5411"),
        cp.LabeledExample(text="grid power bill", label="22"),
    ]
    path = tmp_path / "labeled.csv"
    cp.write_labeled(path, examples)
    assert cp.load_labeled(path, tax) == examples


def test_load_labeled_rejects_unknown_label(tmp_path, tax):
    path = tmp_path / "bad.csv"
    path.write_text("text,label\nsomething,NOPE\n", encoding="utf-8")
    with pytest.raises(DataValidationError, match="line 2"):
        cp.load_labeled(path, tax)


def test_load_labeled_normalizes_text(tmp_path, tax):
    path = tmp_path / "n.csv"
    path.write_text("text,label\n  Mixed   CASE  ,22\n", encoding="utf-8")
    assert cp.load_labeled(path, tax)[0].text == "mixed case"


def test_load_ledger_parses_amounts_and_blanks(tmp_path):
    path = tmp_path / "ledger.csv"
    path.write_text(
        "id,text,amount,currency\na,desk lamps,12.50,USD\nb,unknown thing,,\n",
        encoding="utf-8",
    )
    records = cp.load_ledger(path)
    assert records[0].amount == 12.50
    assert records[1].amount is None
    assert records[1].currency is None


def test_load_ledger_rejects_duplicate_ids(tmp_path):
    path = tmp_path / "dup.csv"
    path.write_text("id,text,amount,currency\na,x,1,\na,y,2,\n", encoding="utf-8")
    with pytest.raises(DataValidationError, match="duplicate record id"):
        cp.load_ledger(path)


def test_load_ledger_rejects_bad_amount(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,text,amount,currency\na,x,12f,\n", encoding="utf-8")
    with pytest.raises(ParseError, match="non-numeric amount"):
        cp.load_ledger(path)


def test_example_id_stable_and_content_addressed():
    a = cp.LabeledExample(text="x", label="22")
    assert cp.example_id(a) == cp.example_id(cp.LabeledExample(text="x", label="22"))
    assert cp.example_id(a) != cp.example_id(cp.LabeledExample(text="x", label="23"))


def test_split_exact_sizes_for_balanced_100():
    examples = make_examples({f"c{i}": 10 for i in range(10)})
    ds = cp.split(examples, ratios=(0.7, 0.2, 0.1), seed=7)
    assert (len(ds.train), len(ds.validation), len(ds.test)) == (70, 20, 10)
    for label in {ex.label for ex in examples}:
        assert sum(1 for ex in ds.train if ex.label == label) == 7
        assert sum(1 for ex in ds.validation if ex.label == label) == 2
        assert sum(1 for ex in ds.test if ex.label == label) == 1


def test_split_partitions_input():
    examples = make_examples({"a": 9, "b": 5, "c": 17})
    ds = cp.split(examples, seed=3)
    parts = [set(ds.train), set(ds.validation), set(ds.test)]
    assert parts[0] | parts[1] | parts[2] == set(examples)
    assert not (parts[0] & parts[1] or parts[0] & parts[2] or parts[1] & parts[2])


def test_split_deterministic_per_seed():
    examples = make_examples({"a": 8, "b": 12})
    d1 = cp.split(examples, seed=11)
    d2 = cp.split(examples, seed=11)
    assert d1 == d2
    d3 = cp.split(examples, seed=12)
    assert set(d3.train) != set(d1.train)


@settings(max_examples=40, deadline=None)
@given(
    counts=st.dictionaries(
        st.text("abcdefgh", min_size=1, max_size=3),
        st.integers(min_value=3, max_value=50),
        min_size=1,
        max_size=8,
    ),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_split_properties(counts, seed):
    examples = make_examples(counts)
    ds = cp.split(examples, ratios=(0.7, 0.2, 0.1), seed=seed)
    assert len(ds.train) + len(ds.validation) + len(ds.test) == len(examples)
    assert set(ds.train) | set(ds.validation) | set(ds.test) == set(examples)
    for label, n in counts.items():
        got = sum(1 for ex in ds.train if ex.label == label)
        assert abs(got - 0.7 * n) < 1.0 or abs(got - 0.7 * n) == pytest.approx(1.0)
        assert abs(got / n - 0.7) <= 1.0 / n + 1e-12


def test_split_rejects_tiny_class():
    examples = make_examples({"a": 2, "b": 5})
    with pytest.raises(DataValidationError, match="'a'"):
        cp.split(examples)


def test_split_rejects_bad_ratios():
    examples = make_examples({"a": 5})
    with pytest.raises(DataValidationError):
        cp.split(examples, ratios=(0.7, 0.2, 0.2))
    with pytest.raises(DataValidationError):
        cp.split(examples, ratios=(1.0, 0.0, 0.0))


def test_split_dedupes_with_warning(caplog):
    examples = make_examples({"a": 6}) + [cp.LabeledExample(text="item a 0", label="a")]
    with caplog.at_level(logging.WARNING):
        ds = cp.split(examples)
    assert len(ds.train) + len(ds.validation) + len(ds.test) == 6
    assert any("duplicate" in r.message for r in caplog.records)


def test_subsample_full_fraction_is_identity():
    examples = make_examples({"a": 10, "b": 20})
    ds = cp.split(examples, seed=5)
    sub = cp.subsample(ds, 1.0, seed=5)
    assert sub.train == ds.train
    assert sub.validation == ds.validation
    assert sub.test == ds.test


def test_subsample_halves_per_class_with_ceiling():
    examples = make_examples({"a": 10, "b": 20, "c": 13})
    ds = cp.split(examples, ratios=(0.7, 0.2, 0.1), seed=5)
    sub = cp.subsample(ds, 0.5, seed=5)
    train_before = Counter(ex.label for ex in ds.train)
    train_after = Counter(ex.label for ex in sub.train)
    for label, n in train_before.items():
        assert train_after[label] == -(-n // 2)  # ceil
    assert sub.test == ds.test


def test_subsample_deterministic_and_validates_fraction():
    examples = make_examples({"a": 12, "b": 12})
    ds = cp.split(examples, seed=5)
    assert cp.subsample(ds, 0.4, seed=9) == cp.subsample(ds, 0.4, seed=9)
    for bad in (0.0, -0.5, 1.5):
        with pytest.raises(DataValidationError):
            cp.subsample(ds, bad)


def test_synth_generate_counts_and_uniqueness(tax):
    examples = gl.synth_generate(tax, n_per_class=15, seed=3)
    counts = Counter(ex.label for ex in examples)
    assert set(counts) == set(tax.classes)
    assert set(counts.values()) == {15}
    assert len({(ex.text, ex.label) for ex in examples}) == len(examples)


def test_synth_generate_deterministic(tax):
    a = gl.synth_generate(tax, n_per_class=5, seed=21)
    b = gl.synth_generate(tax, n_per_class=5, seed=21)
    assert a == b
    c = gl.synth_generate(tax, n_per_class=5, seed=22)
    assert a != c


def test_synth_single_class_uses_title_tokens():
    classes = {
        "T1": gl.CommodityClass(code="T1", title="Underwater Basketry", naics_codes=("1",))
    }
    tax = gl.Taxonomy(classes=classes, factors={})
    (ex,) = gl.synth_generate(tax, n_per_class=1, seed=7)
    assert "underwater" in ex.text or "basketry" in ex.text


def test_synth_rejects_empty_taxonomy():
    with pytest.raises(DataValidationError):
        gl.synth_generate(gl.Taxonomy(classes={}, factors={}), n_per_class=1)


def test_split_manifest_round_trip(tmp_path):
    examples = make_examples({"a": 5, "b": 7})
    ds = cp.split(examples, seed=13)
    path = tmp_path / "manifest.json"
    cp.write_split_manifest(ds, path)
    payload = cp.read_split_manifest(path)
    assert payload["seed"] == 13
    assert payload["ratios"] == [0.7, 0.2, 0.1]
    assert payload["counts"]["train"] == len(ds.train)
    assert payload["member_ids"]["train"] == [cp.example_id(ex) for ex in ds.train]
    # ids across parts are disjoint and cover the corpus
    ids = sum((payload["member_ids"][p] for p in ("train", "validation", "test")), [])
    assert len(set(ids)) == len(examples)


def test_read_split_manifest_rejects_other_json(tmp_path):
    path = tmp_path / "x.json"
    path.write_text(json.dumps({"format": "other"}), encoding="utf-8")
    with pytest.raises(ParseError):
        cp.read_split_manifest(path)
