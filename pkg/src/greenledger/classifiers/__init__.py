"""Interchangeable ledger-text classifiers: zero-shot similarity,
classical ensembles over bag features, and fine-tuned encoders."""

from .base import ClassifierModel, EpochLog, Prediction, TrainingConfig, load_model
from .classical import ClassicalModel, train_classical
from .finetune import FinetunedModel, finetune
from .zeroshot import ZeroShotModel, build_zeroshot

__all__ = [
    "ClassifierModel",
    "EpochLog",
    "Prediction",
    "TrainingConfig",
    "load_model",
    "ClassicalModel",
    "train_classical",
    "FinetunedModel",
    "finetune",
    "ZeroShotModel",
    "build_zeroshot",
]
