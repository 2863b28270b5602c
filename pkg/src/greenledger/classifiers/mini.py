"""A small transformer encoder that can be pretrained locally.

Fine-tuning needs a pretrained backbone, and this module provides one
that trains in minutes on CPU from a masked-token objective, with a
checkpoint directory format (config.json, vocab.txt, weights.pt) so
pretrain once, fine-tune many times.
"""

from __future__ import annotations

import json
from pathlib import Path

import torch
from torch import nn

from ..errors import DataValidationError, ParseError
from ..text import tokenize

PAD, UNK, MASK = "[PAD]", "[UNK]", "[MASK]"
SPECIALS = (PAD, UNK, MASK)


class Vocab:
    """Token table with fixed special ids: [PAD]=0, [UNK]=1, [MASK]=2."""

    def __init__(self, tokens: list[str]) -> None:
        if list(tokens[:3]) != list(SPECIALS):
            raise DataValidationError("vocabulary must start with [PAD], [UNK], [MASK]")
        if len(set(tokens)) != len(tokens):
            raise DataValidationError("vocabulary contains duplicate tokens")
        self.tokens = list(tokens)
        self.token_to_id = {t: i for i, t in enumerate(tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    @classmethod
    def build(cls, texts: list[str]) -> "Vocab":
        seen = sorted({t for text in texts for t in tokenize(text)} - set(SPECIALS))
        if not seen:
            raise DataValidationError("no tokens found to build a vocabulary")
        return cls(list(SPECIALS) + seen)

    def encode(self, text: str, max_length: int) -> list[int]:
        unk = self.token_to_id[UNK]
        ids = [self.token_to_id.get(t, unk) for t in tokenize(text)]
        return ids[:max_length]

    def save(self, path: Path) -> None:
        path.write_text("\n".join(self.tokens) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Path) -> "Vocab":
        tokens = path.read_text(encoding="utf-8").splitlines()
        if len(tokens) < len(SPECIALS):
            raise ParseError(f"{path}: vocabulary file too short")
        return cls(tokens)


class MiniEncoder(nn.Module):
    """Token + position embeddings into a transformer stack.

    pool() returns a fixed-width sentence vector: masked mean over token
    states times pool_scale. The scale widens logit range per unit of
    head weight, which keeps very small learning rates viable.
    """

    def __init__(
        self,
        vocab_size: int,
        dim: int = 96,
        layers: int = 2,
        heads: int = 4,
        ffn: int = 192,
        max_positions: int = 512,
        dropout: float = 0.1,
        pool_scale: float = 8.0,
    ) -> None:
        super().__init__()
        self.config = {
            "vocab_size": vocab_size, "dim": dim, "layers": layers, "heads": heads,
            "ffn": ffn, "max_positions": max_positions, "dropout": dropout,
            "pool_scale": pool_scale,
        }
        self.token_embedding = nn.Embedding(vocab_size, dim, padding_idx=0)
        self.position_embedding = nn.Embedding(max_positions, dim)
        layer = nn.TransformerEncoderLayer(
            d_model=dim, nhead=heads, dim_feedforward=ffn, dropout=dropout,
            batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers=layers, enable_nested_tensor=False)
        self.dropout = nn.Dropout(dropout)
        self.mlm_head = nn.Linear(dim, vocab_size)

    @property
    def dim(self) -> int:
        return self.config["dim"]

    def hidden_states(self, input_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(input_ids.shape[1], device=input_ids.device)
        x = self.token_embedding(input_ids) + self.position_embedding(positions)[None, :, :]
        x = self.dropout(x)
        return self.encoder(x, src_key_padding_mask=attention_mask == 0)

    def pool(self, input_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        h = self.hidden_states(input_ids, attention_mask)
        mask = attention_mask[:, :, None].to(h.dtype)
        summed = (h * mask).sum(dim=1)
        counts = mask.sum(dim=1).clamp(min=1.0)
        return summed / counts * self.config["pool_scale"]

    def mlm_logits(self, input_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        return self.mlm_head(self.hidden_states(input_ids, attention_mask))


def pad_batch(id_lists: list[list[int]]) -> tuple[torch.Tensor, torch.Tensor]:
    """Right-pad to the longest row; returns (input_ids, attention_mask)."""
    width = max(len(ids) for ids in id_lists)
    input_ids = torch.zeros((len(id_lists), width), dtype=torch.long)
    mask = torch.zeros((len(id_lists), width), dtype=torch.long)
    for i, ids in enumerate(id_lists):
        input_ids[i, : len(ids)] = torch.tensor(ids, dtype=torch.long)
        mask[i, : len(ids)] = 1
    return input_ids, mask


def pretrain_encoder(
    texts: list[str],
    dim: int = 96,
    layers: int = 2,
    heads: int = 4,
    ffn: int = 192,
    pool_scale: float = 8.0,
    epochs: int = 30,
    batch_size: int = 32,
    learning_rate: float = 1e-3,
    mask_prob: float = 0.15,
    max_length: int = 64,
    seed: int = 1007,
) -> tuple[MiniEncoder, Vocab, list[float]]:
    """Masked-token pretraining over raw texts; deterministic per seed.

    Of the positions chosen for prediction, 80% become [MASK], 10% a
    random token, 10% stay unchanged.
    """
    if not texts:
        raise DataValidationError("cannot pretrain on an empty corpus")
    torch.manual_seed(seed)
    vocab = Vocab.build(texts)
    encoder = MiniEncoder(
        vocab_size=len(vocab), dim=dim, layers=layers, heads=heads, ffn=ffn,
        pool_scale=pool_scale,
    )
    encoded = [ids for ids in (vocab.encode(t, max_length) for t in texts) if ids]
    if not encoded:
        raise DataValidationError("no encodable texts to pretrain on")
    optimizer = torch.optim.AdamW(encoder.parameters(), lr=learning_rate)
    generator = torch.Generator().manual_seed(seed)
    mask_id = vocab.token_to_id[MASK]
    losses = []
    encoder.train()
    for _ in range(epochs):
        order = torch.randperm(len(encoded), generator=generator).tolist()
        total, count = 0.0, 0
        for start in range(0, len(order), batch_size):
            rows = [encoded[i] for i in order[start : start + batch_size]]
            input_ids, attention_mask = pad_batch(rows)
            draw = torch.rand(input_ids.shape, generator=generator)
            chosen = (draw < mask_prob) & (attention_mask == 1)
            if not bool(chosen.any()):
                # Tiny batches of short texts can draw nothing; the first
                # position is always a real token, so predict that one.
                chosen[0, 0] = True
            labels = torch.where(chosen, input_ids, torch.full_like(input_ids, -100))
            action = torch.rand(input_ids.shape, generator=generator)
            corrupted = input_ids.clone()
            corrupted[chosen & (action < 0.8)] = mask_id
            random_ids = torch.randint(
                len(SPECIALS), len(vocab), input_ids.shape, generator=generator
            )
            swap = chosen & (action >= 0.8) & (action < 0.9)
            corrupted[swap] = random_ids[swap]
            logits = encoder.mlm_logits(corrupted, attention_mask)
            loss = nn.functional.cross_entropy(
                logits.view(-1, len(vocab)), labels.view(-1), ignore_index=-100
            )
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += float(loss.item()) * int(chosen.sum())
            count += int(chosen.sum())
        losses.append(total / count)
    encoder.eval()
    return encoder, vocab, losses


def save_encoder(encoder: MiniEncoder, vocab: Vocab, checkpoint_dir: str | Path) -> None:
    checkpoint_dir = Path(checkpoint_dir)
    checkpoint_dir.mkdir(parents=True, exist_ok=True)
    config = {"format": "mini-encoder", "version": 1, **encoder.config}
    with open(checkpoint_dir / "config.json", "w", encoding="utf-8") as f:
        json.dump(config, f, indent=2, sort_keys=True)
        f.write("\n")
    vocab.save(checkpoint_dir / "vocab.txt")
    torch.save(encoder.state_dict(), checkpoint_dir / "weights.pt")


def is_encoder_checkpoint(path: str | Path) -> bool:
    config_path = Path(path) / "config.json"
    if not config_path.is_file():
        return False
    try:
        with open(config_path, encoding="utf-8") as f:
            return json.load(f).get("format") == "mini-encoder"
    except (OSError, json.JSONDecodeError):
        return False


def load_encoder(checkpoint_dir: str | Path) -> tuple[MiniEncoder, Vocab]:
    checkpoint_dir = Path(checkpoint_dir)
    try:
        with open(checkpoint_dir / "config.json", encoding="utf-8") as f:
            config = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read encoder config in {checkpoint_dir}: {exc}") from exc
    if config.get("format") != "mini-encoder" or config.get("version") != 1:
        raise ParseError(f"{checkpoint_dir}: not a version-1 encoder checkpoint")
    vocab = Vocab.load(checkpoint_dir / "vocab.txt")
    encoder = MiniEncoder(
        vocab_size=config["vocab_size"], dim=config["dim"], layers=config["layers"],
        heads=config["heads"], ffn=config["ffn"], max_positions=config["max_positions"],
        dropout=config["dropout"], pool_scale=config["pool_scale"],
    )
    if config["vocab_size"] != len(vocab):
        raise ParseError(f"{checkpoint_dir}: config/vocabulary size mismatch")
    encoder.load_state_dict(torch.load(checkpoint_dir / "weights.pt", weights_only=True))
    encoder.eval()
    return encoder, vocab
