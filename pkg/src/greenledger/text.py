"""Text normalization and tokenization shared by every classifier family.

One normalization rule keeps feature extraction, training, and inference
consistent: lowercase, collapse whitespace, strip leading/trailing
punctuation. Inner punctuation and digits are kept because ledger codes and
part numbers carry signal.
"""

from __future__ import annotations

import re

_WHITESPACE = re.compile(r"\s+")
_EDGE_PUNCT = re.compile(r"^[^\w]+|[^\w]+$")


def normalize_text(text: str) -> str:
    """Normalize a ledger fragment; may return an empty string."""
    text = _WHITESPACE.sub(" ", text.lower()).strip()
    return _EDGE_PUNCT.sub("", text)


def tokenize(text: str) -> list[str]:
    """Whitespace tokens of the normalized text."""
    normalized = normalize_text(text)
    return normalized.split() if normalized else []
