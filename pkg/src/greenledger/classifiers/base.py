"""Shared classifier contracts: predictions, training config, persistence.

Every family saves to a directory with a manifest.json recording family,
label set, seed, and content fingerprints of its training inputs, so a
loaded model can be audited against the data that produced it.
"""

from __future__ import annotations

import csv
import hashlib
import json
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass
from pathlib import Path

from ..errors import DataValidationError, DegenerateInputError, ParseError
from ..text import normalize_text

MAX_LENGTH_CHOICES = (64, 128, 256, 512)
LEARNING_RATE_CHOICES = (5e-5, 5e-6)

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class Prediction:
    """A single classification: best label, its score, and runners-up.

    kind is "similarity" (unbounded cosine scores) or "probability"
    (scores over the label set summing to 1).
    """

    label: str
    score: float
    topk: tuple[tuple[str, float], ...]
    kind: str

    @classmethod
    def from_scores(
        cls, labels: list[str], scores: list[float], kind: str, k: int = 5
    ) -> "Prediction":
        """Rank labels by score descending; ties go to the lexicographically
        smallest label so argmax is deterministic."""
        if len(labels) != len(scores) or not labels:
            raise DataValidationError("labels and scores must be equal-length and non-empty")
        if kind not in ("similarity", "probability"):
            raise DataValidationError(f"unknown score kind {kind!r}")
        ranked = sorted(zip(labels, scores), key=lambda item: (-item[1], item[0]))
        top = tuple((label, float(score)) for label, score in ranked[:k])
        return cls(label=top[0][0], score=top[0][1], topk=top, kind=kind)


@dataclass(frozen=True)
class TrainingConfig:
    """Hyperparameters shared by the trainable families.

    max_length and learning_rate are restricted to the tuning grid so any
    persisted config names a reproducible cell of it.
    """

    max_length: int = 128
    learning_rate: float = 5e-5
    epochs: int = 20
    batch_size: int = 32
    seed: int = 7
    early_stopping_patience: int = 5

    def __post_init__(self) -> None:
        if self.max_length not in MAX_LENGTH_CHOICES:
            raise DataValidationError(
                f"max_length must be one of {MAX_LENGTH_CHOICES}, got {self.max_length}"
            )
        if self.learning_rate not in LEARNING_RATE_CHOICES:
            raise DataValidationError(
                f"learning_rate must be one of {LEARNING_RATE_CHOICES}, got {self.learning_rate}"
            )
        for name in ("epochs", "batch_size", "early_stopping_patience"):
            if getattr(self, name) < 1:
                raise DataValidationError(f"{name} must be >= 1, got {getattr(self, name)}")


@dataclass(frozen=True)
class EpochLog:
    epoch: int
    train_loss: float
    validation_loss: float


def write_epoch_logs(logs: list[EpochLog], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["epoch", "train_loss", "validation_loss"])
        for log in logs:
            w.writerow([log.epoch, repr(log.train_loss), repr(log.validation_loss)])


def read_epoch_logs(path: str | Path) -> list[EpochLog]:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows or rows[0] != ["epoch", "train_loss", "validation_loss"]:
        raise ParseError(f"{path}: not an epoch log file")
    return [
        EpochLog(epoch=int(r[0]), train_loss=float(r[1]), validation_loss=float(r[2]))
        for r in rows[1:]
        if r
    ]


def data_fingerprint(examples) -> str:
    """Order-independent digest of (text, label) pairs."""
    joined = "\n".join(sorted(f"{ex.text}\x1f{ex.label}" for ex in examples))
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()[:16]


def taxonomy_fingerprint(tax) -> str:
    """Digest of class codes, titles, and composition."""
    joined = "\n".join(
        f"{c.code}\x1f{c.title}\x1f{','.join(c.naics_codes)}"
        for c in (tax.classes[code] for code in tax.label_order())
    )
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()[:16]


class ClassifierModel(ABC):
    """Common surface of all trained classifiers.

    label_set is fixed at build time; predict rejects text that is empty
    after normalization.
    """

    family: str

    def __init__(self, label_set: list[str], metadata: dict) -> None:
        if not label_set:
            raise DataValidationError("label_set must be non-empty")
        self.label_set = list(label_set)
        self.metadata = dict(metadata)

    def predict(self, text: str) -> Prediction:
        if not normalize_text(text):
            raise DegenerateInputError("cannot classify text that is empty after normalization")
        return self._predict(text)

    @abstractmethod
    def _predict(self, text: str) -> Prediction: ...

    def predict_batch(self, texts: list[str]) -> list[Prediction]:
        return [self.predict(t) for t in texts]

    @abstractmethod
    def save(self, model_dir: str | Path) -> None: ...

    def _write_manifest(self, model_dir: Path, extra: dict | None = None) -> None:
        payload = {
            "format": "classifier-model",
            "version": 1,
            "family": self.family,
            "label_set": self.label_set,
            "metadata": self.metadata,
        }
        if extra:
            payload.update(extra)
        with open(model_dir / MANIFEST_NAME, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, sort_keys=True)
            f.write("\n")


def read_manifest(model_dir: str | Path) -> dict:
    path = Path(model_dir) / MANIFEST_NAME
    try:
        with open(path, encoding="utf-8") as f:
            payload = json.load(f)
    except OSError as exc:
        raise ParseError(f"cannot read model manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed model manifest {path}: {exc}") from exc
    if payload.get("format") != "classifier-model" or payload.get("version") != 1:
        raise ParseError(f"{path}: not a version-1 classifier manifest")
    return payload


def load_model(model_dir: str | Path) -> ClassifierModel:
    """Load any saved classifier, dispatching on the manifest's family."""
    from .classical import ClassicalModel
    from .finetune import FinetunedModel
    from .zeroshot import ZeroShotModel

    loaders = {
        "zeroshot": ZeroShotModel.load,
        "classical": ClassicalModel.load,
        "finetuned": FinetunedModel.load,
    }
    manifest = read_manifest(model_dir)
    family = manifest["family"]
    if family not in loaders:
        raise ParseError(f"unknown classifier family {family!r} in {model_dir}")
    return loaders[family](Path(model_dir))


def config_to_dict(config: TrainingConfig) -> dict:
    return asdict(config)


def config_from_dict(payload: dict) -> TrainingConfig:
    field_names = set(TrainingConfig.__dataclass_fields__)
    unknown = set(payload) - field_names
    if unknown:
        raise DataValidationError(f"unknown training config keys: {sorted(unknown)}")
    return TrainingConfig(**payload)
