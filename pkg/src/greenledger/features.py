"""Text vectorization: TF-IDF, word/sentence embeddings, cosine similarity.

The TF-IDF variant is pinned so fitted models reproduce bit-for-bit:
raw term counts, idf(t) = ln((1 + N) / (1 + df(t))) + 1, L2-normalized
rows, vocabulary in lexicographic order, whitespace tokenization of
normalized text, out-of-vocabulary tokens ignored at transform time.
"""

from __future__ import annotations

import hashlib
import json
import math
from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataValidationError, DegenerateInputError, ParseError, ProviderError
from .text import tokenize


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.ndim != 1 or self.values.shape[0] == 0:
            raise DataValidationError("feature vector must be 1-dimensional and non-empty")

    @property
    def dimension(self) -> int:
        return int(self.values.shape[0])


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine of the angle between u and v; zero vectors are a domain error."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DataValidationError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = math.sqrt(float(np.dot(u, u)))
    nv = math.sqrt(float(np.dot(v, v)))
    if nu == 0.0 or nv == 0.0:
        raise DegenerateInputError("cosine similarity is undefined for zero vectors")
    return float(np.dot(u, v)) / (nu * nv)


@dataclass
class TfidfModel:
    """Fitted vocabulary and idf weights. transform() never mutates state."""

    vocabulary: dict[str, int]
    idf: np.ndarray
    doc_count: int
    _terms: list[str] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._terms = sorted(self.vocabulary, key=self.vocabulary.get)

    @property
    def dimension(self) -> int:
        return len(self.vocabulary)

    def transform(self, text: str) -> FeatureVector:
        values = np.zeros(self.dimension, dtype=np.float64)
        counts = Counter(tokenize(text))
        for token, count in counts.items():
            idx = self.vocabulary.get(token)
            if idx is not None:
                values[idx] = count * self.idf[idx]
        norm = math.sqrt(float(np.dot(values, values)))
        if norm > 0.0:
            values /= norm
        return FeatureVector(values=values)

    def transform_text(self, text: str) -> np.ndarray:
        return self.transform(text).values

    def identity(self) -> str:
        return "tfidf"

    def to_json(self) -> str:
        payload = {
            "format": "tfidf-model",
            "version": 1,
            "doc_count": self.doc_count,
            "terms": self._terms,
            "idf": [float(x) for x in self.idf],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "TfidfModel":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed tf-idf model: {exc}") from exc
        if payload.get("format") != "tfidf-model" or payload.get("version") != 1:
            raise ParseError("not a version-1 tf-idf model file")
        terms = payload["terms"]
        return cls(
            vocabulary={t: i for i, t in enumerate(terms)},
            idf=np.asarray(payload["idf"], dtype=np.float64),
            doc_count=int(payload["doc_count"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TfidfModel":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def fit_tfidf(texts: list[str]) -> TfidfModel:
    """Fit vocabulary and idf weights over a non-empty corpus."""
    if not texts:
        raise DataValidationError("cannot fit tf-idf on an empty corpus")
    df: Counter[str] = Counter()
    n = 0
    for text in texts:
        n += 1
        df.update(set(tokenize(text)))
    if not df:
        raise DegenerateInputError("corpus has no tokens after normalization")
    terms = sorted(df)
    idf = np.array([math.log((1 + n) / (1 + df[t])) + 1.0 for t in terms], dtype=np.float64)
    return TfidfModel(vocabulary={t: i for i, t in enumerate(terms)}, idf=idf, doc_count=n)


class WordEmbeddingProvider(ABC):
    """Maps single tokens to fixed-width vectors; None marks out-of-vocabulary."""

    kind = "word"

    @property
    @abstractmethod
    def dimension(self) -> int: ...

    @abstractmethod
    def vector(self, token: str) -> np.ndarray | None: ...

    @abstractmethod
    def identity(self) -> str: ...


class SentenceEmbeddingProvider(ABC):
    """Maps whole texts to fixed-width vectors, batch in, batch out."""

    kind = "sentence"

    @property
    @abstractmethod
    def dimension(self) -> int: ...

    @abstractmethod
    def embed(self, texts: list[str]) -> np.ndarray: ...

    @abstractmethod
    def identity(self) -> str: ...


def _token_vector(token: str, dimension: int, salt: str) -> np.ndarray:
    """Deterministic pseudo-random unit vector keyed by token content."""
    digest = hashlib.blake2b(f"{salt}\x1f{token}".encode("utf-8"), digest_size=8).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "big"))
    v = rng.standard_normal(dimension)
    return v / np.linalg.norm(v)


class HashedWordEmbeddings(WordEmbeddingProvider):
    """Content-hashed random unit vectors; every token is in-vocabulary.

    No semantics, but fully deterministic and offline, which is what the
    fast test paths need.
    """

    def __init__(self, dimension: int = 100) -> None:
        if dimension < 1:
            raise DataValidationError(f"dimension must be >= 1, got {dimension}")
        self._dimension = dimension
        self._cache: dict[str, np.ndarray] = {}

    @property
    def dimension(self) -> int:
        return self._dimension

    def vector(self, token: str) -> np.ndarray | None:
        hit = self._cache.get(token)
        if hit is None:
            hit = _token_vector(token, self._dimension, "word")
            self._cache[token] = hit
        return hit

    def identity(self) -> str:
        return f"hash:{self._dimension}"


class FileWordEmbeddings(WordEmbeddingProvider):
    """Pretrained word vectors from a text file: `count dim` header, then
    one `token v1 .. vd` line per word."""

    def __init__(self, vectors: dict[str, np.ndarray], dimension: int, source: str) -> None:
        self._vectors = vectors
        self._dimension = dimension
        self._source = source

    @property
    def dimension(self) -> int:
        return self._dimension

    def vector(self, token: str) -> np.ndarray | None:
        return self._vectors.get(token)

    def identity(self) -> str:
        return f"file:{self._source}"

    @classmethod
    def load(cls, path: str | Path) -> "FileWordEmbeddings":
        path = Path(path)
        try:
            with open(path, encoding="utf-8") as f:
                header = f.readline().split()
                if len(header) != 2:
                    raise ParseError(f"{path}: expected `count dim` header")
                try:
                    count, dim = int(header[0]), int(header[1])
                except ValueError:
                    raise ParseError(f"{path}: non-integer header {header}") from None
                vectors: dict[str, np.ndarray] = {}
                for i, line in enumerate(f, start=2):
                    parts = line.rstrip("\n").split(" ")
                    if len(parts) != dim + 1:
                        raise ParseError(f"{path}: line {i}: expected {dim + 1} fields, got {len(parts)}")
                    try:
                        vectors[parts[0]] = np.array([float(x) for x in parts[1:]], dtype=np.float64)
                    except ValueError:
                        raise ParseError(f"{path}: line {i}: non-numeric component") from None
        except OSError as exc:
            raise ParseError(f"cannot read {path}: {exc}") from exc
        if len(vectors) != count:
            raise ParseError(f"{path}: header promised {count} vectors, found {len(vectors)}")
        return cls(vectors=vectors, dimension=dim, source=str(path))


def write_word_vectors(path: str | Path, vectors: dict[str, np.ndarray]) -> None:
    if not vectors:
        raise DataValidationError("cannot write an empty vector table")
    dim = len(next(iter(vectors.values())))
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{len(vectors)} {dim}\n")
        for token in sorted(vectors):
            v = vectors[token]
            if len(v) != dim:
                raise DataValidationError(f"vector for {token!r} has dimension {len(v)}, expected {dim}")
            f.write(token + " " + " ".join(repr(float(x)) for x in v) + "\n")


class HashedSentenceEncoder(SentenceEmbeddingProvider):
    """Bag of content-hashed token vectors, L2-normalized per text."""

    def __init__(self, dimension: int = 256) -> None:
        if dimension < 1:
            raise DataValidationError(f"dimension must be >= 1, got {dimension}")
        self._dimension = dimension
        self._cache: dict[str, np.ndarray] = {}

    @property
    def dimension(self) -> int:
        return self._dimension

    def _token(self, token: str) -> np.ndarray:
        hit = self._cache.get(token)
        if hit is None:
            hit = _token_vector(token, self._dimension, "sentence")
            self._cache[token] = hit
        return hit

    def embed(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self._dimension), dtype=np.float64)
        for i, text in enumerate(texts):
            tokens = tokenize(text)
            if not tokens:
                continue
            v = np.sum([self._token(t) for t in tokens], axis=0)
            norm = np.linalg.norm(v)
            if norm > 0.0:
                out[i] = v / norm
        return out

    def identity(self) -> str:
        return f"hash:{self._dimension}"


class TransformerSentenceEncoder(SentenceEmbeddingProvider):
    """Pretrained general-purpose sentence encoder resolved by model name.

    Requires the sentence-transformers package and (on first use) network
    access to download weights; failures surface as ProviderError.
    """

    #: Named models selectable from configuration.
    KNOWN_MODELS = (
        "all-mpnet-base-v2",
        "all-MiniLM-L6-v2",
        "all-MiniLM-L12-v2",
    )

    def __init__(self, model_name: str) -> None:
        self._model_name = model_name
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise ProviderError(
                f"sentence encoder {model_name!r} needs the sentence-transformers package"
            ) from exc
        try:
            self._model = SentenceTransformer(model_name)
        except Exception as exc:
            raise ProviderError(f"cannot load sentence encoder {model_name!r}: {exc}") from exc
        self._dimension = int(self._model.get_sentence_embedding_dimension())

    @property
    def dimension(self) -> int:
        return self._dimension

    def embed(self, texts: list[str]) -> np.ndarray:
        return np.asarray(self._model.encode(texts, show_progress_bar=False), dtype=np.float64)

    def identity(self) -> str:
        return f"st:{self._model_name}"


def get_sentence_provider(spec: str) -> SentenceEmbeddingProvider:
    """Resolve a sentence provider spec: `hash[:dim]` or `st:<model-name>`.

    Bare known model names are accepted as shorthand for `st:<name>`.
    """
    if spec == "hash":
        return HashedSentenceEncoder()
    if spec.startswith("hash:"):
        return HashedSentenceEncoder(dimension=_parse_dim(spec))
    if spec.startswith("st:"):
        return TransformerSentenceEncoder(spec[3:])
    if spec in TransformerSentenceEncoder.KNOWN_MODELS:
        return TransformerSentenceEncoder(spec)
    raise ProviderError(f"unknown sentence provider {spec!r}")


def get_word_provider(spec: str) -> WordEmbeddingProvider:
    """Resolve a word provider spec: `hash[:dim]` or `file:<path>`."""
    if spec == "hash":
        return HashedWordEmbeddings()
    if spec.startswith("hash:"):
        return HashedWordEmbeddings(dimension=_parse_dim(spec))
    if spec.startswith("file:"):
        return FileWordEmbeddings.load(spec[5:])
    raise ProviderError(f"unknown word provider {spec!r}")


def _parse_dim(spec: str) -> int:
    try:
        return int(spec.split(":", 1)[1])
    except ValueError:
        raise ProviderError(f"bad provider dimension in {spec!r}") from None


def average_word_embeddings(provider: WordEmbeddingProvider, text: str) -> tuple[FeatureVector, bool]:
    """Mean of in-vocabulary token vectors. Returns (vector, all_oov_flag);
    an all-out-of-vocabulary text yields a zero vector and a True flag."""
    tokens = tokenize(text)
    found = [provider.vector(t) for t in tokens]
    found = [v for v in found if v is not None]
    if not found:
        return FeatureVector(values=np.zeros(provider.dimension, dtype=np.float64)), True
    return FeatureVector(values=np.mean(found, axis=0)), False


def embed_sentence(provider: SentenceEmbeddingProvider, text: str) -> FeatureVector:
    return FeatureVector(values=provider.embed([text])[0])


class WordAverageFeaturizer:
    """Text featurizer that averages word vectors; plugs into classifiers
    anywhere a fitted tf-idf model does."""

    def __init__(self, provider: WordEmbeddingProvider) -> None:
        self.provider = provider

    @property
    def dimension(self) -> int:
        return self.provider.dimension

    def transform_text(self, text: str) -> np.ndarray:
        vector, _ = average_word_embeddings(self.provider, text)
        return vector.values

    def identity(self) -> str:
        return f"wordavg:{self.provider.identity()}"
