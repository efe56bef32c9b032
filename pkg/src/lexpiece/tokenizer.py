"""Subword segmentation under a vocabulary or a unigram model.

Two modes:

* ``wordpiece``: greedy longest-match-first against a Vocabulary. A word
  with any unmatchable position becomes a single ``[UNK]`` (or, with
  ``char_fallback``, the offending characters are rescued one by one).
* ``unigram``: Viterbi decoding under a UnigramModel, maximizing the sum
  of piece log-probabilities.

In both modes, pieces that continue a word carry the ``##`` prefix;
:func:`detokenize` strips the markers and restores the original text.
Tokenizers are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from ._validation import sentence_text
from .errors import IdOutOfRangeError, InvalidConfigError
from .unigram import UnigramModel, export_vocabulary, viterbi_decode
from .vocab import CONTINUATION_PREFIX, UNK_TOKEN, Vocabulary

try:
    from sklearn.base import BaseEstimator, TransformerMixin
except ImportError:  # pragma: no cover
    BaseEstimator = TransformerMixin = object


@dataclass(frozen=True)
class Segmentation:
    """Pieces of one word, with vocabulary ids when a vocabulary is known."""

    pieces: list[str]
    ids: list[int] | None = None


def _check_word(word: str) -> None:
    if not word:
        raise InvalidConfigError("cannot segment an empty word")
    if any(ch.isspace() for ch in word):
        raise InvalidConfigError(f"cannot segment {word!r}: contains whitespace")


def wordpiece_segment(vocab: Vocabulary, word: str, char_fallback: bool = False) -> Segmentation:
    """Greedy longest-match-first segmentation.

    At each position the longest vocabulary match wins (continuation
    positions try ``##``-prefixed pieces). Default behavior on a dead end
    is the whole word collapsing to ``[UNK]``; with ``char_fallback`` the
    single character at the dead end is emitted instead (its id is the
    UNK id when out of vocabulary) and matching resumes.
    """
    _check_word(word)
    pieces: list[str] = []
    ids: list[int] = []
    start = 0
    while start < len(word):
        end = len(word)
        match = None
        while start < end:
            piece = word[start:end]
            if start > 0:
                piece = CONTINUATION_PREFIX + piece
            piece_id = vocab.id_of(piece)
            if piece_id is not None:
                match = (piece, piece_id, end)
                break
            end -= 1
        if match is None:
            if not char_fallback:
                return Segmentation([UNK_TOKEN], [vocab.unk_id])
            piece = word[start] if start == 0 else CONTINUATION_PREFIX + word[start]
            pieces.append(piece)
            ids.append(vocab.id_of(piece) if piece in vocab else vocab.unk_id)
            start += 1
        else:
            pieces.append(match[0])
            ids.append(match[1])
            start = match[2]
    return Segmentation(pieces, ids)


def viterbi_segment(model: UnigramModel, word: str) -> tuple[Segmentation, float]:
    """Maximum-likelihood segmentation under a unigram model.

    Ties break to fewer pieces, then lexicographically. Pieces are
    returned unmarked (no ``##``); raises UncoveredCharacterError when a
    character has no covering piece.
    """
    _check_word(word)
    pieces, score = viterbi_decode(model._log_probs, word, model.max_piece_len)
    return Segmentation(pieces), score


def _mark_continuations(pieces: Sequence[str]) -> list[str]:
    return [p if i == 0 else CONTINUATION_PREFIX + p for i, p in enumerate(pieces)]


def encode(vocab: Vocabulary, tokens: Iterable[str]) -> list[int]:
    """Token ids; out-of-vocabulary tokens map to the UNK id."""
    unk = vocab.unk_id
    return [vocab.id_of(t) if t in vocab else unk for t in tokens]


def decode(vocab: Vocabulary, ids: Iterable[int]) -> list[str]:
    """Tokens for ids; raises IdOutOfRangeError outside [0, len(vocab))."""
    tokens = []
    for token_id in ids:
        if not 0 <= token_id < len(vocab):
            raise IdOutOfRangeError(f"decode: id {token_id} outside [0, {len(vocab)})")
        tokens.append(vocab.token_of(token_id))
    return tokens


def detokenize(tokens: Iterable[str]) -> str:
    """Invert tokenization: strip continuation markers, space-join words."""
    words: list[str] = []
    for token in tokens:
        if token.startswith(CONTINUATION_PREFIX) and words:
            words[-1] += token[len(CONTINUATION_PREFIX):]
        else:
            words.append(token)
    return " ".join(words)


class WordPieceTokenizer(BaseEstimator, TransformerMixin):
    """Greedy longest-match tokenizer over a fixed Vocabulary."""

    mode = "wordpiece"

    def __init__(self, vocab: Vocabulary, char_fallback: bool = False):
        self.vocab = vocab
        self.char_fallback = char_fallback

    def fit(self, X=None, y=None):
        return self

    def tokenize(self, sentence) -> list[str]:
        pieces: list[str] = []
        for word in sentence_text(sentence).split():
            pieces.extend(wordpiece_segment(self.vocab, word, self.char_fallback).pieces)
        return pieces

    def transform(self, X) -> list[list[str]]:
        return [self.tokenize(s) for s in X]

    def encode(self, sentence) -> list[int]:
        return encode(self.vocab, self.tokenize(sentence))


class UnigramTokenizer(BaseEstimator, TransformerMixin):
    """Viterbi tokenizer over a UnigramModel.

    Ids come from ``vocab`` when given, otherwise from the vocabulary
    exported from the model (which contains a continuation form for every
    piece, so encoding is UNK-free on covered text).
    """

    mode = "unigram"

    def __init__(self, model: UnigramModel, vocab: Vocabulary | None = None):
        self.model = model
        self.vocab = vocab if vocab is not None else export_vocabulary(model)

    def fit(self, X=None, y=None):
        return self

    def tokenize(self, sentence) -> list[str]:
        pieces: list[str] = []
        for word in sentence_text(sentence).split():
            segmentation, _ = viterbi_segment(self.model, word)
            pieces.extend(_mark_continuations(segmentation.pieces))
        return pieces

    def transform(self, X) -> list[list[str]]:
        return [self.tokenize(s) for s in X]

    def encode(self, sentence) -> list[int]:
        return encode(self.vocab, self.tokenize(sentence))


def make_tokenizer(source, mode: str, char_fallback: bool = False):
    """Build a tokenizer from a Vocabulary (wordpiece) or UnigramModel
    (unigram)."""
    if mode == "wordpiece":
        if not isinstance(source, Vocabulary):
            raise InvalidConfigError("wordpiece mode needs a Vocabulary")
        return WordPieceTokenizer(source, char_fallback=char_fallback)
    if mode == "unigram":
        if not isinstance(source, UnigramModel):
            raise InvalidConfigError("unigram mode needs a UnigramModel")
        return UnigramTokenizer(source)
    raise InvalidConfigError(f"unknown tokenizer mode {mode!r}")
