"""Vocabulary divergence analytics: set overlap and segmentation contrasts.

Reports quantify how differently two vocabularies carve up the same words:
cardinalities of the exclusive and shared regions, Jaccard similarity,
samples of exclusive tokens, and per-word piece-count contrasts.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .tokenizer import wordpiece_segment
from .vocab import SPECIAL_TOKENS, Vocabulary


@dataclass(frozen=True)
class VocabDiffReport:
    size_a: int
    size_b: int
    intersection: int
    only_a: int
    only_b: int
    jaccard: float
    sample_only_a: list[str] = field(default_factory=list)
    sample_only_b: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class SegmentationContrast:
    word: str
    pieces_a: list[str]
    pieces_b: list[str]
    count_a: int
    count_b: int

    @property
    def differs(self) -> bool:
        return self.count_a != self.count_b


def _comparable(vocab: Vocabulary) -> set[str]:
    return set(vocab.tokens) - set(SPECIAL_TOKENS)


def diff(vocab_a: Vocabulary, vocab_b: Vocabulary, sample_limit: int = 20) -> VocabDiffReport:
    """Set comparison of two vocabularies, special tokens excluded.

    Samples are the lexicographically first ``sample_limit`` exclusive
    tokens on each side. Two empty vocabularies count as identical
    (jaccard 1).
    """
    set_a = _comparable(vocab_a)
    set_b = _comparable(vocab_b)
    shared = set_a & set_b
    union = len(set_a) + len(set_b) - len(shared)
    return VocabDiffReport(
        size_a=len(set_a),
        size_b=len(set_b),
        intersection=len(shared),
        only_a=len(set_a) - len(shared),
        only_b=len(set_b) - len(shared),
        jaccard=len(shared) / union if union else 1.0,
        sample_only_a=sorted(set_a - set_b)[:sample_limit],
        sample_only_b=sorted(set_b - set_a)[:sample_limit],
    )


def contrast(vocab_a: Vocabulary, vocab_b: Vocabulary, wordlist: Iterable[str]) -> list[SegmentationContrast]:
    """Segment each word under both vocabularies and report piece counts."""
    rows = []
    for word in wordlist:
        pieces_a = wordpiece_segment(vocab_a, word).pieces
        pieces_b = wordpiece_segment(vocab_b, word).pieces
        rows.append(SegmentationContrast(word, pieces_a, pieces_b, len(pieces_a), len(pieces_b)))
    return rows


def membership_table(
    vocab_a: Vocabulary, vocab_b: Vocabulary, tokens: Iterable[str]
) -> list[tuple[str, bool, bool]]:
    """Per-token membership flags (token, in_a, in_b)."""
    return [(t, t in vocab_a, t in vocab_b) for t in tokens]


def render_structured(report: VocabDiffReport, contrasts: Sequence[SegmentationContrast] = ()) -> str:
    """Machine-readable report: ``key<TAB>value`` lines, then contrast rows
    ``word<TAB>pieces_a<TAB>pieces_b<TAB>count_a<TAB>count_b``."""
    lines = [
        f"size_a\t{report.size_a}",
        f"size_b\t{report.size_b}",
        f"intersection\t{report.intersection}",
        f"only_a\t{report.only_a}",
        f"only_b\t{report.only_b}",
        f"jaccard\t{report.jaccard!r}",
    ]
    for token in report.sample_only_a:
        lines.append(f"sample_only_a\t{token}")
    for token in report.sample_only_b:
        lines.append(f"sample_only_b\t{token}")
    for row in contrasts:
        lines.append(
            f"{row.word}\t{' '.join(row.pieces_a)}\t{' '.join(row.pieces_b)}"
            f"\t{row.count_a}\t{row.count_b}"
        )
    return "\n".join(lines) + "\n"


def render_human(report: VocabDiffReport, contrasts: Sequence[SegmentationContrast] = ()) -> str:
    """Human-readable summary table."""
    lines = [
        "Vocabulary comparison (special tokens excluded)",
        f"  size A        : {report.size_a}",
        f"  size B        : {report.size_b}",
        f"  intersection  : {report.intersection}",
        f"  only in A     : {report.only_a}",
        f"  only in B     : {report.only_b}",
        f"  jaccard       : {report.jaccard:.4f}",
    ]
    if report.sample_only_a:
        lines.append("  sample only-A : " + ", ".join(report.sample_only_a))
    if report.sample_only_b:
        lines.append("  sample only-B : " + ", ".join(report.sample_only_b))
    if contrasts:
        lines.append("")
        width = max(len(r.word) for r in contrasts)
        lines.append(f"  {'word':<{width}}  #A  #B  pieces A | pieces B")
        for row in contrasts:
            flag = " *" if row.differs else "  "
            lines.append(
                f"  {row.word:<{width}}  {row.count_a:>2}  {row.count_b:>2}"
                f"  {' '.join(row.pieces_a)} | {' '.join(row.pieces_b)}{flag}"
            )
    return "\n".join(lines) + "\n"
