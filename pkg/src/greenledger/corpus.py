"""Labeled and unlabeled transaction text: loading, splitting, synthesis.

All operations are pure given (inputs, seed). Splits are stratified by label
with largest-remainder rounding, so per-class proportions stay within one
example of the requested ratios.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import random
from dataclasses import dataclass
from pathlib import Path

from .errors import DataValidationError, ParseError
from .taxonomy import Taxonomy
from .text import normalize_text, tokenize

logger = logging.getLogger(__name__)

LABELED_HEADER = ["text", "label"]
LEDGER_HEADER = ["id", "text", "amount", "currency"]


@dataclass(frozen=True)
class TransactionRecord:
    """One ledger line: free text plus optional spend amount."""

    id: str
    text: str
    amount: float | None = None
    currency: str | None = None


@dataclass(frozen=True)
class LabeledExample:
    """A ledger description paired with its commodity-class code."""

    text: str
    label: str


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[LabeledExample, ...]
    validation: tuple[LabeledExample, ...]
    test: tuple[LabeledExample, ...]
    seed: int
    ratios: tuple[float, float, float]

    def part(self, name: str) -> tuple[LabeledExample, ...]:
        try:
            return {"train": self.train, "validation": self.validation, "test": self.test}[name]
        except KeyError:
            raise ValueError(f"unknown split part {name!r}") from None


def example_id(example: LabeledExample) -> str:
    """Stable content-addressed id for audit manifests."""
    digest = hashlib.blake2b(f"{example.text}\x1f{example.label}".encode("utf-8"), digest_size=8)
    return digest.hexdigest()


def load_labeled(path: str | Path, tax: Taxonomy) -> list[LabeledExample]:
    """Load a `text,label` file, normalizing text and validating labels."""
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if not rows or rows[0] != LABELED_HEADER:
        raise ParseError(f"{path}: expected header {LABELED_HEADER}")
    examples = []
    for i, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise ParseError(f"{path}: line {i}: expected 2 columns, got {len(row)}")
        text, label = normalize_text(row[0]), row[1].strip()
        if not text:
            raise DataValidationError(f"{path}: line {i}: text empty after normalization")
        if label not in tax.classes:
            raise DataValidationError(f"{path}: line {i}: unknown label {label!r}")
        examples.append(LabeledExample(text=text, label=label))
    return examples


def write_labeled(path: str | Path, examples: list[LabeledExample]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(LABELED_HEADER)
        for ex in examples:
            w.writerow([ex.text, ex.label])


def load_ledger(path: str | Path) -> list[TransactionRecord]:
    """Load an `id,text,amount,currency` ledger file; amount may be blank."""
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if not rows or rows[0] != LEDGER_HEADER:
        raise ParseError(f"{path}: expected header {LEDGER_HEADER}")
    records = []
    seen: set[str] = set()
    for i, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 4:
            raise ParseError(f"{path}: line {i}: expected 4 columns, got {len(row)}")
        rec_id, raw_text, raw_amount, currency = (c.strip() for c in row)
        if not rec_id:
            raise DataValidationError(f"{path}: line {i}: empty record id")
        if rec_id in seen:
            raise DataValidationError(f"{path}: line {i}: duplicate record id {rec_id!r}")
        seen.add(rec_id)
        text = normalize_text(raw_text)
        if not text:
            raise DataValidationError(f"{path}: line {i}: text empty after normalization")
        amount = None
        if raw_amount:
            try:
                amount = float(raw_amount)
            except ValueError:
                raise ParseError(f"{path}: line {i}: non-numeric amount {raw_amount!r}") from None
        records.append(TransactionRecord(id=rec_id, text=text, amount=amount, currency=currency or None))
    return records


def dedupe(examples: list[LabeledExample]) -> list[LabeledExample]:
    """Drop exact-duplicate (text, label) pairs, keeping first occurrences."""
    seen: set[tuple[str, str]] = set()
    unique = []
    for ex in examples:
        key = (ex.text, ex.label)
        if key in seen:
            continue
        seen.add(key)
        unique.append(ex)
    dropped = len(examples) - len(unique)
    if dropped:
        logger.warning("dropped %d duplicate (text, label) pairs before splitting", dropped)
    return unique


def _validate_ratios(ratios: tuple[float, float, float]) -> None:
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise DataValidationError(f"ratios must be three positive reals, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise DataValidationError(f"ratios must sum to 1, got {ratios} (sum {sum(ratios)})")


def _largest_remainder_counts(n: int, ratios: tuple[float, float, float]) -> list[int]:
    """Apportion n into three parts; remainders tie-break in part order."""
    exact = [n * r for r in ratios]
    counts = [math.floor(e) for e in exact]
    remainders = sorted(range(3), key=lambda i: (-(exact[i] - counts[i]), i))
    for i in range(n - sum(counts)):
        counts[remainders[i]] += 1
    return counts


def split(
    examples: list[LabeledExample],
    ratios: tuple[float, float, float] = (0.7, 0.2, 0.1),
    seed: int = 7,
) -> DatasetSplit:
    """Stratified train/validation/test split, deterministic per seed.

    Duplicate (text, label) pairs are dropped first so no pair can leak
    across parts. Every class must have at least 3 examples.
    """
    _validate_ratios(ratios)
    examples = dedupe(examples)
    by_label: dict[str, list[LabeledExample]] = {}
    for ex in examples:
        by_label.setdefault(ex.label, []).append(ex)

    for label in sorted(by_label):
        if len(by_label[label]) < 3:
            raise DataValidationError(
                f"class {label!r} has only {len(by_label[label])} examples; stratified split needs >= 3"
            )

    parts: tuple[list[LabeledExample], ...] = ([], [], [])
    for label in sorted(by_label):
        members = list(by_label[label])
        random.Random(f"{seed}:{label}").shuffle(members)
        counts = _largest_remainder_counts(len(members), ratios)
        offset = 0
        for part, count in zip(parts, counts):
            part.extend(members[offset : offset + count])
            offset += count
    train, validation, test = parts
    return DatasetSplit(train=tuple(train), validation=tuple(validation), test=tuple(test), seed=seed, ratios=tuple(ratios))


def subsample(dataset: DatasetSplit, fraction: float, seed: int = 7) -> DatasetSplit:
    """Reduce train and validation to ceil(fraction * n) per class; test untouched."""
    if not 0.0 < fraction <= 1.0:
        raise DataValidationError(f"fraction must be in (0, 1], got {fraction}")

    def reduce_part(part: tuple[LabeledExample, ...], part_name: str) -> tuple[LabeledExample, ...]:
        by_label: dict[str, list[int]] = {}
        for idx, ex in enumerate(part):
            by_label.setdefault(ex.label, []).append(idx)
        keep: set[int] = set()
        for label in sorted(by_label):
            indices = list(by_label[label])
            random.Random(f"{seed}:{part_name}:{label}").shuffle(indices)
            keep.update(indices[: math.ceil(fraction * len(indices))])
        return tuple(ex for idx, ex in enumerate(part) if idx in keep)

    return DatasetSplit(
        train=reduce_part(dataset.train, "train"),
        validation=reduce_part(dataset.validation, "validation"),
        test=dataset.test,
        seed=seed,
        ratios=dataset.ratios,
    )


# Phrase templates for synthetic ledger lines; {p} is a class keyphrase,
# {d} a distractor token.
_TEMPLATES = [
    "{p} expense",
    "cost of {p}",
    "{p} cost",
    "payment for {p}",
    "{p} invoice",
    "purchase of {p}",
    "{p} charges",
    "monthly {p} expense",
    "{p} expense {d}",
    "vendor payment {p}",
    "{p} purchase {d}",
    "{p} fees",
]

_DISTRACTORS = [
    "acct", "po", "inv", "net30", "ref", "batch", "q1", "q2", "q3", "q4",
    "dept", "fy24", "recurring", "annual",
]

# Connective words that carry no class signal in titles/descriptions.
_STOPWORDS = {"and", "of", "the", "except", "to", "in", "for", "other", "related"}


def _keyphrase_tokens(text: str) -> list[str]:
    return [t for t in tokenize(text) if t not in _STOPWORDS and len(t) > 1]


def _draw_phrase(rng: random.Random, tokens: list[str]) -> str:
    width = min(len(tokens), rng.choice([1, 2, 2, 3]))
    start = rng.randrange(len(tokens) - width + 1)
    return " ".join(tokens[start : start + width])


def synth_generate(tax: Taxonomy, n_per_class: int, seed: int = 7) -> list[LabeledExample]:
    """Generate templated expense phrases, exactly n_per_class per class.

    Keyphrases come from class titles and (when composed) descriptions,
    weighted toward descriptions since they carry more detail. Texts are
    unique within a class so deduplication never changes counts.
    """
    if tax.class_count == 0:
        raise DataValidationError("cannot generate from an empty taxonomy")
    if n_per_class < 1:
        raise DataValidationError(f"n_per_class must be >= 1, got {n_per_class}")

    examples = []
    for code in tax.label_order():
        cls = tax.classes[code]
        if not cls.title.strip():
            raise DataValidationError(f"class {code!r} has an empty title")
        title_tokens = _keyphrase_tokens(cls.title)
        desc_tokens = _keyphrase_tokens(cls.description) if cls.description else []
        if not title_tokens and not desc_tokens:
            raise DataValidationError(f"class {code!r} has no usable keyphrase tokens")

        rng = random.Random(f"{seed}:{code}")
        seen: set[str] = set()
        attempts = 0
        while len(seen) < n_per_class:
            if desc_tokens and (not title_tokens or rng.random() < 0.75):
                tokens = desc_tokens
            else:
                tokens = title_tokens
            text = _TEMPLATES[rng.randrange(len(_TEMPLATES))].format(
                p=_draw_phrase(rng, tokens),
                d=_DISTRACTORS[rng.randrange(len(_DISTRACTORS))],
            )
            if rng.random() < 0.15:
                text = f"{text} {_DISTRACTORS[rng.randrange(len(_DISTRACTORS))]}"
            text = normalize_text(text)
            attempts += 1
            if text in seen:
                if attempts <= 20 * n_per_class:
                    continue
                # Phrasing variety exhausted for a tiny class; counter keeps it unique.
                text = f"{text} {attempts}"
                if text in seen:
                    continue
            seen.add(text)
            examples.append(LabeledExample(text=text, label=code))
    return examples


def write_split_manifest(dataset: DatasetSplit, path: str | Path) -> None:
    """Record seed, ratios, and member ids for audit."""
    payload = {
        "format": "split-manifest",
        "version": 1,
        "seed": dataset.seed,
        "ratios": list(dataset.ratios),
        "counts": {
            "train": len(dataset.train),
            "validation": len(dataset.validation),
            "test": len(dataset.test),
        },
        "member_ids": {
            "train": [example_id(ex) for ex in dataset.train],
            "validation": [example_id(ex) for ex in dataset.validation],
            "test": [example_id(ex) for ex in dataset.test],
        },
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def read_split_manifest(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as f:
        payload = json.load(f)
    if payload.get("format") != "split-manifest":
        raise ParseError(f"{path}: not a split manifest")
    return payload
