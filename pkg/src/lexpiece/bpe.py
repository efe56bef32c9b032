"""Byte-pair-encoding style vocabulary induction over word counts.

Merging operates on plain character symbols: each word starts as a tuple
of its characters, and the most frequent adjacent symbol pair is merged
repeatedly. Frequency ties break to the lexicographically smallest
(left, right) pair so the merge sequence is fully deterministic.

The exported vocabulary carries each symbol and merge product in both its
word-initial form and its ``##``-prefixed continuation form, which makes
it directly usable by the greedy word-piece segmenter.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

from .errors import TargetTooSmallError
from .vocab import CONTINUATION_PREFIX, SPECIAL_TOKENS, Vocabulary

try:
    from sklearn.base import BaseEstimator
except ImportError:  # pragma: no cover
    BaseEstimator = object

from ._validation import as_word_counts


@dataclass
class MergeTable:
    """Ordered BPE merge rules; application order is list order."""

    merges: list[tuple[str, str]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.merges)

    def __iter__(self):
        return iter(self.merges)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            for left, right in self.merges:
                handle.write(f"{left} {right}\n")

    @classmethod
    def load(cls, path: str | Path) -> "MergeTable":
        merges = []
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.rstrip("\n")
                if not line:
                    continue
                left, _, right = line.partition(" ")
                merges.append((left, right))
        return cls(merges)


def _pair_counts(words: dict[tuple[str, ...], int]) -> Counter:
    counts: Counter = Counter()
    for symbols, count in words.items():
        for pair in zip(symbols, symbols[1:]):
            counts[pair] += count
    return counts


def _merge_word(symbols: tuple[str, ...], pair: tuple[str, str], product: str) -> tuple[str, ...]:
    merged = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and (symbols[i], symbols[i + 1]) == pair:
            merged.append(product)
            i += 2
        else:
            merged.append(symbols[i])
            i += 1
    return tuple(merged)


def _both_forms(piece: str) -> tuple[str, str]:
    return piece, CONTINUATION_PREFIX + piece


def train_bpe(
    word_counts: Mapping[str, int],
    target_size: int,
    specials: tuple[str, ...] = SPECIAL_TOKENS,
) -> tuple[Vocabulary, MergeTable]:
    """Induce a vocabulary of at most ``target_size`` tokens by pair merging.

    Each merge step picks the adjacent symbol pair with the highest total
    frequency across word types (weighted by word count). Merging stops
    when the exported vocabulary budget is exhausted or no pairs remain.

    Raises TargetTooSmallError when ``target_size`` cannot hold the
    specials plus both forms of every observed character.
    """
    words = {tuple(word): count for word, count in word_counts.items() if word}
    alphabet = sorted({char for word in words for char in word})

    base_size = len(specials) + 2 * len(alphabet)
    if target_size < base_size:
        raise TargetTooSmallError(
            f"train_bpe: target_size {target_size} cannot hold {len(specials)} specials "
            f"plus both forms of {len(alphabet)} characters (needs {base_size})"
        )

    pieces: list[str] = []
    for char in alphabet:
        pieces.extend(_both_forms(char))

    merges: list[tuple[str, str]] = []
    size = len(specials) + len(pieces)
    exported = set(pieces)

    while True:
        counts = _pair_counts(words)
        if not counts:
            break
        best_count = max(counts.values())
        pair = min(p for p, c in counts.items() if c == best_count)
        product = pair[0] + pair[1]

        new_forms = [f for f in _both_forms(product) if f not in exported]
        if size + len(new_forms) > target_size:
            break

        merges.append(pair)
        words = {_merge_word(symbols, pair, product): count for symbols, count in words.items()}
        pieces.extend(new_forms)
        exported.update(new_forms)
        size += len(new_forms)

    return Vocabulary.from_pieces(pieces), MergeTable(merges)


class BpeVocabTrainer(BaseEstimator):
    """Estimator facade over :func:`train_bpe`.

    Fit on an iterable of normalized sentences (or a word->count mapping);
    the induced vocabulary and merge table land in ``vocab_`` and
    ``merges_``.
    """

    def __init__(self, vocab_size: int = 8000):
        self.vocab_size = vocab_size

    def fit(self, X, y=None):
        counts = as_word_counts(X)
        self.vocab_, self.merges_ = train_bpe(counts, self.vocab_size)
        return self
