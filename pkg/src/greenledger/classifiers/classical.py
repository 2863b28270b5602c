"""Classical supervised route: bag features into an ensemble of trees.

The featurizer (fitted tf-idf model or word-vector averaging) is stored
with the model so prediction accepts raw text.
"""

from __future__ import annotations

import json
from pathlib import Path

import joblib
import numpy as np
from sklearn.ensemble import RandomForestClassifier

from ..errors import DataValidationError, ParseError
from ..features import TfidfModel, WordAverageFeaturizer, get_word_provider
from .base import ClassifierModel, Prediction, data_fingerprint

DEFAULT_N_ESTIMATORS = 100


class ClassicalModel(ClassifierModel):
    family = "classical"

    def __init__(self, label_set: list[str], featurizer, forest, metadata: dict) -> None:
        super().__init__(label_set, metadata)
        self.featurizer = featurizer
        self.forest = forest

    def _predict(self, text: str) -> Prediction:
        features = self.featurizer.transform_text(text).reshape(1, -1)
        probs = self.forest.predict_proba(features)[0]
        labels = [str(c) for c in self.forest.classes_]
        return Prediction.from_scores(labels, probs.tolist(), kind="probability")

    def save(self, model_dir: str | Path) -> None:
        model_dir = Path(model_dir)
        model_dir.mkdir(parents=True, exist_ok=True)
        identity = self.featurizer.identity()
        if identity == "tfidf":
            self.featurizer.save(model_dir / "tfidf.json")
        elif identity.startswith("wordavg:file:"):
            raise DataValidationError(
                "file-backed word vectors cannot be persisted inside a model directory; "
                "keep the vector file and rebuild"
            )
        with open(model_dir / "classical.json", "w", encoding="utf-8") as f:
            json.dump({"featurizer": identity}, f, indent=2, sort_keys=True)
            f.write("\n")
        joblib.dump(self.forest, model_dir / "forest.joblib")
        self._write_manifest(model_dir)

    @classmethod
    def load(cls, model_dir: Path) -> "ClassicalModel":
        from .base import read_manifest

        manifest = read_manifest(model_dir)
        try:
            with open(model_dir / "classical.json", encoding="utf-8") as f:
                params = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read classical parameters in {model_dir}: {exc}") from exc
        identity = params["featurizer"]
        if identity == "tfidf":
            featurizer = TfidfModel.load(model_dir / "tfidf.json")
        elif identity.startswith("wordavg:"):
            featurizer = WordAverageFeaturizer(get_word_provider(identity.split(":", 1)[1]))
        else:
            raise ParseError(f"unknown featurizer {identity!r} in {model_dir}")
        forest = joblib.load(model_dir / "forest.joblib")
        return cls(
            label_set=manifest["label_set"],
            featurizer=featurizer,
            forest=forest,
            metadata=manifest["metadata"],
        )


def train_classical(
    examples,
    featurizer,
    seed: int = 7,
    n_estimators: int = DEFAULT_N_ESTIMATORS,
) -> ClassicalModel:
    """Fit a seeded random forest on featurized labeled examples."""
    if not examples:
        raise DataValidationError("cannot train on zero examples")
    labels = sorted({ex.label for ex in examples})
    if len(labels) < 2:
        raise DataValidationError("training needs at least 2 distinct labels")
    x = np.stack([featurizer.transform_text(ex.text) for ex in examples])
    y = np.array([ex.label for ex in examples])
    forest = RandomForestClassifier(n_estimators=n_estimators, random_state=seed)
    forest.fit(x, y)
    return ClassicalModel(
        label_set=labels,
        featurizer=featurizer,
        forest=forest,
        metadata={
            "featurizer": featurizer.identity(),
            "n_estimators": n_estimators,
            "seed": seed,
            "data_fingerprint": data_fingerprint(examples),
        },
    )
