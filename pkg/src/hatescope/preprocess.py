"""Text normalization applied before feature extraction and statistics.

The recipe, applied in order: canonical-composition unicode normalization,
lowercasing, URL replacement with a reserved token, collapsing character
runs longer than three, stripping non-whitespace control characters, and
whitespace collapsing. Emoji and emoticons are kept: they carry signal.
The whole function is idempotent.
"""

from __future__ import annotations

import re
import unicodedata

__all__ = ["preprocess_text", "tokenize", "URL_TOKEN"]

URL_TOKEN = "<url>"

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_RUN_RE = re.compile(r"(.)\1{3,}", re.DOTALL)
_WS_RE = re.compile(r"\s+")
# Word runs vs. single non-word, non-space symbols (punctuation, emoji).
_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


def preprocess_text(raw: str) -> str:
    """Normalize arbitrary unicode text; total and idempotent."""
    text = unicodedata.normalize("NFC", raw)
    text = text.lower()
    text = _URL_RE.sub(URL_TOKEN, text)
    text = _RUN_RE.sub(lambda m: m.group(1) * 3, text)
    text = "".join(
        ch for ch in text
        if ch.isspace() or unicodedata.category(ch) != "Cc"
    )
    text = _WS_RE.sub(" ", text).strip()
    return text


def tokenize(text: str) -> list[str]:
    """Split on whitespace with punctuation separated into its own tokens."""
    return _TOKEN_RE.findall(text)
