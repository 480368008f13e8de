"""Unicode normalization and word/char tokenization shared by metrics and filters."""

from __future__ import annotations

import enum
import unicodedata
from dataclasses import dataclass

# CJK unified ideographs, extensions A-H, and compatibility ideographs.
_CJK_RANGES = (
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xF900, 0xFAFF),
    (0x20000, 0x2A6DF),
    (0x2A700, 0x2EBEF),
    (0x2F800, 0x2FA1F),
    (0x30000, 0x323AF),
)


class Level(str, enum.Enum):
    WORD = "word"
    CHAR = "char"


@dataclass(frozen=True)
class NormalizedText:
    original: str
    normalized: str


@dataclass(frozen=True)
class TokenSeq:
    tokens: tuple[str, ...]
    level: Level

    def __len__(self) -> int:
        return len(self.tokens)


def is_cjk_ideograph(ch: str) -> bool:
    cp = ord(ch)
    for lo, hi in _CJK_RANGES:
        if lo <= cp <= hi:
            return True
    return False


def _fold(text: str) -> str:
    # casefold output is not always NFKC-stable; iterate to a fixpoint.
    for _ in range(8):
        folded = unicodedata.normalize("NFKC", text).casefold()
        if folded == text:
            break
        text = folded
    return text


def normalize(raw: str, strict: bool = False) -> NormalizedText:
    """Fold width and case, then collapse every whitespace run to one space.

    With ``strict=True`` only the whitespace collapse is applied.
    """
    text = raw if strict else _fold(raw)
    return NormalizedText(original=raw, normalized=" ".join(text.split()))


def _as_normalized(t: NormalizedText | str) -> str:
    if isinstance(t, NormalizedText):
        return t.normalized
    return normalize(t).normalized


def tokenize_words(t: NormalizedText | str) -> TokenSeq:
    """Whitespace-delimited runs, with every CJK ideograph split out as its own token.

    Punctuation stays attached to the surrounding run.
    """
    tokens: list[str] = []
    for chunk in _as_normalized(t).split():
        run_start = 0
        for i, ch in enumerate(chunk):
            if is_cjk_ideograph(ch):
                if i > run_start:
                    tokens.append(chunk[run_start:i])
                tokens.append(ch)
                run_start = i + 1
        if run_start < len(chunk):
            tokens.append(chunk[run_start:])
    return TokenSeq(tuple(tokens), Level.WORD)


def tokenize_chars(t: NormalizedText | str) -> TokenSeq:
    return TokenSeq(tuple(ch for ch in _as_normalized(t) if not ch.isspace()), Level.CHAR)


def tokenize(t: NormalizedText | str, level: Level) -> TokenSeq:
    if level is Level.WORD:
        return tokenize_words(t)
    return tokenize_chars(t)
