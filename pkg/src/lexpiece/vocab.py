"""Subword vocabulary: an ordered token list with reserved special tokens.

The on-disk format is one token per line, where the line number (0-based)
is the token id. This is the same layout used by the public uncased
baseline vocabulary file, so such files load directly.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from pathlib import Path

from .errors import InvalidConfigError

PAD_TOKEN = "[PAD]"
UNK_TOKEN = "[UNK]"
CLS_TOKEN = "[CLS]"
SEP_TOKEN = "[SEP]"
MASK_TOKEN = "[MASK]"

#: Reserved tokens, in the id order used by exported vocabularies (0-4).
SPECIAL_TOKENS: tuple[str, ...] = (PAD_TOKEN, UNK_TOKEN, CLS_TOKEN, SEP_TOKEN, MASK_TOKEN)

#: Marker prefixing a piece that continues a word rather than starting it.
CONTINUATION_PREFIX = "##"


class Vocabulary:
    """Immutable token <-> id bijection with the five reserved specials.

    Vocabularies built by this toolkit always place the specials at ids
    0-4; vocabularies loaded from external files keep whatever ids the
    file assigns, as long as all five specials are present.
    """

    def __init__(self, tokens: Sequence[str]):
        self.tokens: list[str] = list(tokens)
        self._ids: dict[str, int] = {}
        for index, token in enumerate(self.tokens):
            if token in self._ids:
                raise InvalidConfigError(f"duplicate token {token!r} in vocabulary")
            self._ids[token] = index
        missing = [t for t in SPECIAL_TOKENS if t not in self._ids]
        if missing:
            raise InvalidConfigError(f"vocabulary missing special tokens: {missing}")

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.tokens == other.tokens

    def id_of(self, token: str) -> int | None:
        """Return the id for ``token`` or None if absent."""
        return self._ids.get(token)

    def token_of(self, token_id: int) -> str:
        return self.tokens[token_id]

    @property
    def pad_id(self) -> int:
        return self._ids[PAD_TOKEN]

    @property
    def unk_id(self) -> int:
        return self._ids[UNK_TOKEN]

    @property
    def cls_id(self) -> int:
        return self._ids[CLS_TOKEN]

    @property
    def sep_id(self) -> int:
        return self._ids[SEP_TOKEN]

    @property
    def mask_id(self) -> int:
        return self._ids[MASK_TOKEN]

    @property
    def special_ids(self) -> frozenset[int]:
        return frozenset(self._ids[t] for t in SPECIAL_TOKENS)

    @classmethod
    def from_pieces(cls, pieces: Iterable[str]) -> "Vocabulary":
        """Build an exported vocabulary: specials at ids 0-4, then pieces."""
        tokens = list(SPECIAL_TOKENS)
        seen = set(tokens)
        for piece in pieces:
            if piece not in seen:
                tokens.append(piece)
                seen.add(piece)
        return cls(tokens)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            for token in self.tokens:
                handle.write(token + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        with open(path, encoding="utf-8") as handle:
            tokens = [line.rstrip("\n") for line in handle]
        while tokens and tokens[-1] == "":
            tokens.pop()
        return cls(tokens)
