import pytest
import torch

from greenledger.classifiers.mini import (
    MASK,
    PAD,
    UNK,
    Vocab,
    is_encoder_checkpoint,
    load_encoder,
    pad_batch,
    pretrain_encoder,
    save_encoder,
)
from greenledger.errors import DataValidationError, ParseError

TEXTS = [
    "office paper reams", "cloud hosting invoice", "fleet diesel fuel",
    "catering for offsite", "laptop replacement parts", "annual audit fee",
    "warehouse pallet wrap", "travel booking service",
]

TOY = dict(dim=32, layers=1, heads=2, ffn=64, epochs=3, batch_size=4, seed=11)


def test_vocab_specials_and_order():
    vocab = Vocab.build(["beta gamma", "alpha beta"])
    assert vocab.tokens[:3] == [PAD, UNK, MASK]
    assert vocab.tokens[3:] == ["alpha", "beta", "gamma"]
    assert vocab.token_to_id[PAD] == 0
    assert vocab.token_to_id[UNK] == 1
    assert vocab.token_to_id[MASK] == 2


def test_vocab_encode_unknown_and_truncation():
    vocab = Vocab.build(["alpha beta"])
    ids = vocab.encode("alpha zeta beta", max_length=64)
    assert ids == [vocab.token_to_id["alpha"], 1, vocab.token_to_id["beta"]]
    assert vocab.encode("alpha beta alpha beta", max_length=2) == ids[:1] + [ids[2]]


def test_vocab_round_trip(tmp_path):
    vocab = Vocab.build(TEXTS)
    path = tmp_path / "vocab.txt"
    vocab.save(path)
    loaded = Vocab.load(path)
    assert loaded.tokens == vocab.tokens
    short = tmp_path / "short.txt"
    short.write_text("[PAD]\n", encoding="utf-8")
    with pytest.raises(ParseError):
        Vocab.load(short)


def test_vocab_rejects_bad_construction():
    with pytest.raises(DataValidationError):
        Vocab(["alpha", "beta"])  # missing specials
    with pytest.raises(DataValidationError):
        Vocab([PAD, UNK, MASK, "dup", "dup"])
    with pytest.raises(DataValidationError):
        Vocab.build(["", "   "])


def test_pad_batch_shapes_and_mask():
    ids, mask = pad_batch([[5, 6, 7], [8]])
    assert ids.shape == (2, 3)
    assert ids.tolist() == [[5, 6, 7], [8, 0, 0]]
    assert mask.tolist() == [[1, 1, 1], [1, 0, 0]]


def test_pretraining_loss_decreases():
    # Per-epoch loss is noisy at toy scale (few masked positions), so
    # compare window means on a corpus with repeated structure.
    _, _, losses = pretrain_encoder(
        TEXTS * 4, **{**TOY, "epochs": 12, "batch_size": 8}
    )
    assert len(losses) == 12
    assert sum(losses[-3:]) / 3 < sum(losses[:3]) / 3


def test_pretraining_deterministic_per_seed():
    enc1, _, losses1 = pretrain_encoder(TEXTS, **TOY)
    enc2, _, losses2 = pretrain_encoder(TEXTS, **TOY)
    assert losses1 == losses2
    s1 = enc1.state_dict()
    s2 = enc2.state_dict()
    assert all(torch.equal(s1[k], s2[k]) for k in s1)
    _, _, losses3 = pretrain_encoder(TEXTS, **{**TOY, "seed": 12})
    assert losses3 != losses1


def test_pretraining_rejects_empty():
    with pytest.raises(DataValidationError):
        pretrain_encoder([], **TOY)


def test_checkpoint_round_trip_preserves_pooling(tmp_path):
    encoder, vocab, _ = pretrain_encoder(TEXTS, **TOY)
    out = tmp_path / "ckpt"
    save_encoder(encoder, vocab, out)
    assert is_encoder_checkpoint(out)
    assert not is_encoder_checkpoint(tmp_path)
    assert not is_encoder_checkpoint("all-MiniLM-L6-v2")
    loaded, loaded_vocab, = load_encoder(out)
    assert loaded_vocab.tokens == vocab.tokens
    ids, mask = pad_batch([vocab.encode(t, 64) for t in TEXTS[:3]])
    encoder.eval()
    loaded.eval()
    with torch.no_grad():
        assert torch.equal(loaded.pool(ids, mask), encoder.pool(ids, mask))


def test_pooling_masks_padding(tmp_path):
    encoder, vocab, _ = pretrain_encoder(TEXTS, **TOY)
    encoder.eval()
    ids_short, mask_short = pad_batch([vocab.encode("office paper reams", 64)])
    padded = [vocab.encode("office paper reams", 64) + [0, 0, 0]]
    ids_long = torch.tensor(padded, dtype=torch.long)
    mask_long = torch.tensor([[1] * 3 + [0] * 3], dtype=torch.long)
    with torch.no_grad():
        a = encoder.pool(ids_short, mask_short)
        b = encoder.pool(ids_long, mask_long)
    assert torch.allclose(a, b, atol=1e-5)


def test_load_encoder_rejects_non_checkpoint(tmp_path):
    with pytest.raises(ParseError):
        load_encoder(tmp_path)
