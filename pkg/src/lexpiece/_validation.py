"""Small input-validation helpers shared across modules."""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Mapping

from .errors import InvalidConfigError


def check_positive(name: str, value) -> None:
    if not value > 0:
        raise InvalidConfigError(f"{name} must be positive, got {value!r}")


def check_fraction(name: str, value, *, inclusive_high: bool = False) -> None:
    high_ok = value <= 1 if inclusive_high else value < 1
    if not (0 < value and high_ok):
        bound = "(0, 1]" if inclusive_high else "(0, 1)"
        raise InvalidConfigError(f"{name} must be in {bound}, got {value!r}")


def sentence_text(sentence) -> str:
    """Accept either a str or an object with a .text attribute."""
    if isinstance(sentence, str):
        return sentence
    return sentence.text


def as_word_counts(source) -> Counter:
    """Coerce a word->count mapping or an iterable of sentences to a Counter."""
    if isinstance(source, Mapping):
        return Counter(source)
    if isinstance(source, Iterable):
        counts: Counter = Counter()
        for sentence in source:
            counts.update(sentence_text(sentence).split())
        return counts
    raise TypeError(f"expected a mapping or an iterable of sentences, got {type(source).__name__}")
