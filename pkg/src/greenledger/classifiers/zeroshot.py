"""Zero-shot classification by embedding similarity.

Each class is represented by the embedding of its title or of its
composed sector description; an input is assigned to the class whose
embedding has the highest cosine similarity. No training data involved.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import DegenerateInputError, ParseError, ProviderError
from ..features import SentenceEmbeddingProvider, get_sentence_provider
from ..taxonomy import Taxonomy, class_text
from ..text import normalize_text
from .base import ClassifierModel, Prediction, taxonomy_fingerprint

CLASS_TEXT_MODES = ("title", "description")


class ZeroShotModel(ClassifierModel):
    family = "zeroshot"

    def __init__(
        self,
        label_set: list[str],
        class_matrix: np.ndarray,
        provider: SentenceEmbeddingProvider,
        mode: str,
        metadata: dict,
    ) -> None:
        super().__init__(label_set, metadata)
        # Rows are unit-normalized at build time, so dot products below
        # are cosines up to the input's own norm.
        self.class_matrix = class_matrix
        self.provider = provider
        self.mode = mode

    def _predict(self, text: str) -> Prediction:
        v = self.provider.embed([text])[0]
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise DegenerateInputError("text embeds to a zero vector; similarity is undefined")
        scores = (self.class_matrix @ (v / norm)).tolist()
        return Prediction.from_scores(self.label_set, scores, kind="similarity")

    def predict_batch(self, texts: list[str]) -> list[Prediction]:
        # One provider call for the whole batch; output order matches input.
        for text in texts:
            if not normalize_text(text):
                return super().predict_batch(texts)
        vectors = self.provider.embed(texts)
        out = []
        for text, v in zip(texts, vectors):
            norm = np.linalg.norm(v)
            if norm == 0.0:
                raise DegenerateInputError("text embeds to a zero vector; similarity is undefined")
            scores = (self.class_matrix @ (v / norm)).tolist()
            out.append(Prediction.from_scores(self.label_set, scores, kind="similarity"))
        return out

    def save(self, model_dir: str | Path) -> None:
        model_dir = Path(model_dir)
        model_dir.mkdir(parents=True, exist_ok=True)
        np.save(model_dir / "class_matrix.npy", self.class_matrix)
        with open(model_dir / "zeroshot.json", "w", encoding="utf-8") as f:
            json.dump(
                {"mode": self.mode, "provider": self.provider.identity()},
                f, indent=2, sort_keys=True,
            )
            f.write("\n")
        self._write_manifest(model_dir)

    @classmethod
    def load(cls, model_dir: Path) -> "ZeroShotModel":
        from .base import read_manifest

        manifest = read_manifest(model_dir)
        try:
            with open(model_dir / "zeroshot.json", encoding="utf-8") as f:
                params = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read zero-shot parameters in {model_dir}: {exc}") from exc
        matrix = np.load(model_dir / "class_matrix.npy")
        return cls(
            label_set=manifest["label_set"],
            class_matrix=matrix,
            provider=get_sentence_provider(params["provider"]),
            mode=params["mode"],
            metadata=manifest["metadata"],
        )


def build_zeroshot(
    provider: SentenceEmbeddingProvider, tax: Taxonomy, mode: str = "description"
) -> ZeroShotModel:
    """Embed every class text once and cache the matrix for prediction."""
    labels = tax.label_order()
    if not labels:
        raise DegenerateInputError("cannot build a zero-shot model from an empty taxonomy")
    texts = [class_text(tax.classes[code], mode) for code in labels]
    try:
        matrix = np.asarray(provider.embed(texts), dtype=np.float64)
    except ProviderError:
        raise
    except Exception as exc:
        raise ProviderError(f"class embedding failed: {exc}") from exc
    norms = np.linalg.norm(matrix, axis=1)
    for code, norm in zip(labels, norms):
        if norm == 0.0:
            raise ProviderError(f"provider produced a zero vector for class {code!r}")
    matrix = matrix / norms[:, None]
    return ZeroShotModel(
        label_set=labels,
        class_matrix=matrix,
        provider=provider,
        mode=mode,
        metadata={
            "mode": mode,
            "provider": provider.identity(),
            "taxonomy_fingerprint": taxonomy_fingerprint(tax),
        },
    )
