"""Fine-tuning an encoder backbone with a linear classification head.

Every epoch is logged (train loss, validation loss); the returned model
carries the weights of the epoch with the lowest validation loss, and
training stops early once validation stops improving for the configured
patience.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path

import torch
from torch import nn

from ..errors import DataValidationError, ParseError, ProviderError
from .base import (
    ClassifierModel,
    EpochLog,
    Prediction,
    TrainingConfig,
    config_from_dict,
    config_to_dict,
    data_fingerprint,
)
from .mini import MiniEncoder, Vocab, is_encoder_checkpoint, load_encoder, pad_batch, save_encoder


class MiniBackbone:
    """Locally pretrained transformer checkpoint as a fine-tunable body."""

    name = "mini"

    def __init__(self, encoder: MiniEncoder, vocab: Vocab) -> None:
        self.encoder = encoder
        self.vocab = vocab

    @property
    def dimension(self) -> int:
        return self.encoder.dim

    def encode_texts(self, texts: list[str], max_length: int) -> tuple[torch.Tensor, torch.Tensor]:
        rows = [self.vocab.encode(t, max_length) or [self.vocab.token_to_id["[UNK]"]] for t in texts]
        return pad_batch(rows)

    def forward(self, input_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        return self.encoder.pool(input_ids, attention_mask)

    def parameters(self):
        return self.encoder.parameters()

    def train(self) -> None:
        self.encoder.train()

    def eval(self) -> None:
        self.encoder.eval()

    def state_dict(self):
        return self.encoder.state_dict()

    def load_state_dict(self, state) -> None:
        self.encoder.load_state_dict(state)

    def save(self, out_dir: Path) -> None:
        save_encoder(self.encoder, self.vocab, out_dir)

    @classmethod
    def load(cls, checkpoint_dir: str | Path) -> "MiniBackbone":
        encoder, vocab = load_encoder(checkpoint_dir)
        return cls(encoder, vocab)


class TransformerBackbone:
    """Pretrained transformer resolved by model name via the transformers
    package. Needs downloaded weights; failures surface as ProviderError."""

    name = "transformer"

    def __init__(self, model_id: str) -> None:
        try:
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise ProviderError(
                f"encoder {model_id!r} needs the transformers package"
            ) from exc
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(model_id)
            self.model = AutoModel.from_pretrained(model_id)
        except Exception as exc:
            raise ProviderError(f"cannot load encoder {model_id!r}: {exc}") from exc
        self.model_id = model_id

    @property
    def dimension(self) -> int:
        return int(self.model.config.hidden_size)

    def encode_texts(self, texts: list[str], max_length: int) -> tuple[torch.Tensor, torch.Tensor]:
        batch = self.tokenizer(
            texts, truncation=True, max_length=max_length, padding="longest",
            return_tensors="pt",
        )
        return batch["input_ids"], batch["attention_mask"]

    def forward(self, input_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        h = self.model(input_ids=input_ids, attention_mask=attention_mask).last_hidden_state
        mask = attention_mask[:, :, None].to(h.dtype)
        return (h * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1.0)

    def parameters(self):
        return self.model.parameters()

    def train(self) -> None:
        self.model.train()

    def eval(self) -> None:
        self.model.eval()

    def state_dict(self):
        return self.model.state_dict()

    def load_state_dict(self, state) -> None:
        self.model.load_state_dict(state)

    def save(self, out_dir: Path) -> None:
        out_dir.mkdir(parents=True, exist_ok=True)
        self.model.save_pretrained(out_dir)
        self.tokenizer.save_pretrained(out_dir)

    @classmethod
    def load(cls, checkpoint_dir: str | Path) -> "TransformerBackbone":
        return cls(str(checkpoint_dir))


def resolve_backbone(encoder_id: str):
    """A directory holding a local checkpoint wins; anything else is
    treated as a transformers model name."""
    if is_encoder_checkpoint(encoder_id):
        return MiniBackbone.load(encoder_id)
    return TransformerBackbone(encoder_id)


class FinetunedModel(ClassifierModel):
    family = "finetuned"

    def __init__(self, label_set: list[str], backbone, head: nn.Module, max_length: int, metadata: dict) -> None:
        super().__init__(label_set, metadata)
        self.backbone = backbone
        self.head = head
        self.max_length = max_length

    def _predict(self, text: str) -> Prediction:
        return self.predict_batch([text])[0]

    def predict_batch(self, texts: list[str]) -> list[Prediction]:
        from ..text import normalize_text

        for text in texts:
            if not normalize_text(text):
                return super().predict_batch(texts)
        self.backbone.eval()
        self.head.eval()
        out = []
        with torch.no_grad():
            for start in range(0, len(texts), 64):
                chunk = texts[start : start + 64]
                input_ids, attention_mask = self.backbone.encode_texts(chunk, self.max_length)
                logits = self.head(self.backbone.forward(input_ids, attention_mask))
                probs = torch.softmax(logits, dim=-1)
                for row in probs:
                    out.append(
                        Prediction.from_scores(self.label_set, row.tolist(), kind="probability")
                    )
        return out

    def save(self, model_dir: str | Path) -> None:
        model_dir = Path(model_dir)
        model_dir.mkdir(parents=True, exist_ok=True)
        self.backbone.save(model_dir / "encoder")
        torch.save(self.head.state_dict(), model_dir / "head.pt")
        with open(model_dir / "finetuned.json", "w", encoding="utf-8") as f:
            json.dump(
                {"backbone": self.backbone.name, "max_length": self.max_length},
                f, indent=2, sort_keys=True,
            )
            f.write("\n")
        self._write_manifest(model_dir)

    @classmethod
    def load(cls, model_dir: Path) -> "FinetunedModel":
        from .base import read_manifest

        manifest = read_manifest(model_dir)
        try:
            with open(model_dir / "finetuned.json", encoding="utf-8") as f:
                params = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read fine-tuned parameters in {model_dir}: {exc}") from exc
        if params["backbone"] == MiniBackbone.name:
            backbone = MiniBackbone.load(model_dir / "encoder")
        else:
            backbone = TransformerBackbone.load(model_dir / "encoder")
        label_set = manifest["label_set"]
        head = nn.Linear(backbone.dimension, len(label_set))
        head.load_state_dict(torch.load(model_dir / "head.pt", weights_only=True))
        head.eval()
        return cls(
            label_set=label_set,
            backbone=backbone,
            head=head,
            max_length=int(params["max_length"]),
            metadata=manifest["metadata"],
        )


def _mean_loss(head: nn.Module, backbone, input_ids, attention_mask, targets, batch_size: int) -> float:
    """Full-pass example-mean cross entropy without gradients."""
    backbone.eval()
    head.eval()
    total = 0.0
    with torch.no_grad():
        for start in range(0, len(targets), batch_size):
            sl = slice(start, start + batch_size)
            logits = head(backbone.forward(input_ids[sl], attention_mask[sl]))
            loss = nn.functional.cross_entropy(logits, targets[sl], reduction="sum")
            total += float(loss.item())
    return total / len(targets)


def finetune(
    encoder_id: str,
    train_examples,
    validation_examples,
    config: TrainingConfig | None = None,
) -> tuple[FinetunedModel, list[EpochLog]]:
    """Train encoder plus head; return the best-validation-loss weights.

    encoder_id is a checkpoint directory or a transformers model name; it
    is loaded fresh so repeated calls share nothing but the checkpoint.
    """
    config = config or TrainingConfig()
    if not train_examples or not validation_examples:
        raise DataValidationError("fine-tuning needs non-empty train and validation sets")
    label_set = sorted({ex.label for ex in train_examples})
    if len(label_set) < 2:
        raise DataValidationError("fine-tuning needs at least 2 distinct labels")
    label_to_index = {label: i for i, label in enumerate(label_set)}
    for ex in validation_examples:
        if ex.label not in label_to_index:
            raise DataValidationError(f"validation label {ex.label!r} absent from training data")

    torch.manual_seed(config.seed)
    backbone = resolve_backbone(encoder_id)
    head = nn.Linear(backbone.dimension, len(label_set))
    # Zero-started head makes the first-epoch loss exactly ln(n_labels)
    # and keeps tiny learning rates from fighting random initial logits.
    nn.init.zeros_(head.weight)
    nn.init.zeros_(head.bias)

    train_ids, train_mask = backbone.encode_texts([ex.text for ex in train_examples], config.max_length)
    train_targets = torch.tensor([label_to_index[ex.label] for ex in train_examples], dtype=torch.long)
    val_ids, val_mask = backbone.encode_texts([ex.text for ex in validation_examples], config.max_length)
    val_targets = torch.tensor([label_to_index[ex.label] for ex in validation_examples], dtype=torch.long)

    optimizer = torch.optim.AdamW(
        list(backbone.parameters()) + list(head.parameters()), lr=config.learning_rate
    )
    generator = torch.Generator().manual_seed(config.seed)

    logs = []
    best_loss = float("inf")
    best_epoch = -1
    best_state = None
    since_best = 0
    n = len(train_examples)
    for epoch in range(1, config.epochs + 1):
        backbone.train()
        head.train()
        order = torch.randperm(n, generator=generator)
        epoch_total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            logits = head(backbone.forward(train_ids[idx], train_mask[idx]))
            loss = nn.functional.cross_entropy(logits, train_targets[idx])
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_total += float(loss.item()) * len(idx)
        train_loss = epoch_total / n
        validation_loss = _mean_loss(head, backbone, val_ids, val_mask, val_targets, config.batch_size)
        logs.append(EpochLog(epoch=epoch, train_loss=train_loss, validation_loss=validation_loss))
        if validation_loss < best_loss:
            best_loss = validation_loss
            best_epoch = epoch
            best_state = (
                copy.deepcopy(backbone.state_dict()),
                copy.deepcopy(head.state_dict()),
            )
            since_best = 0
        else:
            since_best += 1
            if since_best >= config.early_stopping_patience:
                break

    backbone.load_state_dict(best_state[0])
    head.load_state_dict(best_state[1])
    backbone.eval()
    head.eval()
    model = FinetunedModel(
        label_set=label_set,
        backbone=backbone,
        head=head,
        max_length=config.max_length,
        metadata={
            "encoder": str(encoder_id),
            "config": config_to_dict(config),
            "best_epoch": best_epoch,
            "best_validation_loss": best_loss,
            "epochs_run": len(logs),
            "data_fingerprint": data_fingerprint(list(train_examples)),
        },
    )
    return model, logs


def training_config_from_metadata(metadata: dict) -> TrainingConfig:
    return config_from_dict(metadata["config"])
