"""Classify ledger line items into spend commodity classes and turn
classified spend into emission estimates."""

from .classifiers import (
    ClassifierModel,
    EpochLog,
    Prediction,
    TrainingConfig,
    build_zeroshot,
    finetune,
    load_model,
    train_classical,
)
from .corpus import (
    DatasetSplit,
    LabeledExample,
    TransactionRecord,
    load_labeled,
    load_ledger,
    split,
    subsample,
    synth_generate,
)
from .emission import (
    EmissionReport,
    LineEstimate,
    aggregate,
    estimate_ledger,
    estimate_line,
)
from .errors import (
    DataValidationError,
    DegenerateInputError,
    GreenLedgerError,
    MissingFactorError,
    ParseError,
    ProviderError,
    StateError,
    UnknownClassError,
)
from .evaluation import (
    EvalReport,
    compare,
    evaluate,
    flag_low_performance,
    weighted_f1,
)
from .features import (
    FeatureVector,
    TfidfModel,
    average_word_embeddings,
    cosine_similarity,
    embed_sentence,
    fit_tfidf,
    get_sentence_provider,
    get_word_provider,
)
from .taxonomy import (
    CommodityClass,
    EmissionFactorRecord,
    Taxonomy,
    canonical_naics_texts,
    canonical_taxonomy,
    compose_all,
    load_taxonomy,
)

__version__ = "0.1.0"

__all__ = [
    "ClassifierModel", "EpochLog", "Prediction", "TrainingConfig",
    "build_zeroshot", "finetune", "load_model", "train_classical",
    "DatasetSplit", "LabeledExample", "TransactionRecord",
    "load_labeled", "load_ledger", "split", "subsample", "synth_generate",
    "EmissionReport", "LineEstimate", "aggregate", "estimate_ledger", "estimate_line",
    "DataValidationError", "DegenerateInputError", "GreenLedgerError",
    "MissingFactorError", "ParseError", "ProviderError", "StateError", "UnknownClassError",
    "EvalReport", "compare", "evaluate", "flag_low_performance", "weighted_f1",
    "FeatureVector", "TfidfModel", "average_word_embeddings", "cosine_similarity",
    "embed_sentence", "fit_tfidf", "get_sentence_provider", "get_word_provider",
    "CommodityClass", "EmissionFactorRecord", "Taxonomy",
    "canonical_naics_texts", "canonical_taxonomy", "compose_all", "load_taxonomy",
    "__version__",
]
