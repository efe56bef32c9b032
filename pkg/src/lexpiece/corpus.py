"""Corpus ingestion: normalization, streaming loaders, and word counting.

The corpus format is plain UTF-8 text with one sentence per line; a blank
line separates documents (document boundaries matter to next-sentence
pairing downstream).
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from pathlib import Path

from .errors import InvalidEncodingError


@dataclass(frozen=True)
class NormalizedSentence:
    """A cleaned sentence plus its whitespace-token count."""

    text: str
    token_count_ws: int


def normalize(text: str, lowercase: bool = True) -> NormalizedSentence:
    """Canonicalize one sentence.

    Applies unicode compatibility normalization (NFKC), optional lowercasing
    (re-normalizing afterwards, since case mapping can introduce
    compatibility characters), then strips and collapses whitespace runs to
    single spaces. Idempotent.
    """
    text = unicodedata.normalize("NFKC", text)
    if lowercase:
        text = unicodedata.normalize("NFKC", text.lower())
    words = text.split()
    return NormalizedSentence(" ".join(words), len(words))


def _decoded_lines(path: str | Path) -> Iterator[tuple[int, str]]:
    # Decode line by line so the error can report a 1-based line number.
    with open(path, "rb") as handle:
        for lineno, raw in enumerate(handle, start=1):
            try:
                yield lineno, raw.decode("utf-8")
            except UnicodeDecodeError:
                raise InvalidEncodingError(str(path), lineno) from None


def load_corpus(path: str | Path, lowercase: bool = True) -> Iterator[NormalizedSentence]:
    """Stream normalized sentences from ``path``, dropping blank lines.

    Raises FileNotFoundError if the file is missing and
    InvalidEncodingError (with line number) on undecodable bytes. The file
    is never held in memory as a whole.
    """
    for _, line in _decoded_lines(path):
        sentence = normalize(line, lowercase=lowercase)
        if sentence.text:
            yield sentence


def load_documents(path: str | Path, lowercase: bool = True) -> Iterator[list[NormalizedSentence]]:
    """Stream documents (lists of sentences) delimited by blank lines.

    Lines that normalize to the empty string count as blank. Runs of blank
    lines do not produce empty documents.
    """
    document: list[NormalizedSentence] = []
    for _, line in _decoded_lines(path):
        sentence = normalize(line, lowercase=lowercase)
        if sentence.text:
            document.append(sentence)
        elif document:
            yield document
            document = []
    if document:
        yield document


def word_counts(sentences: Iterable[NormalizedSentence | str]) -> Counter:
    """Count whitespace-delimited words over a normalized sentence stream.

    The sum of all counts equals the total whitespace-token count of the
    stream. Sharded counting can merge partial Counters additively; the
    result is order-independent.
    """
    counts: Counter = Counter()
    for sentence in sentences:
        text = sentence if isinstance(sentence, str) else sentence.text
        counts.update(text.split())
    return counts


def save_word_counts(path: str | Path, counts: Counter) -> None:
    """Write ``word<TAB>count`` lines, descending count, ties lexicographic."""
    ordered = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    with open(path, "w", encoding="utf-8") as handle:
        for word, count in ordered:
            handle.write(f"{word}\t{count}\n")


def load_word_counts(path: str | Path) -> Counter:
    counts: Counter = Counter()
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if not line:
                continue
            word, _, count = line.rpartition("\t")
            counts[word] = int(count)
    return counts
