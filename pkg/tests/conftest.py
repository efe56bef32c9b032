import random

import pytest

from lexpiece.vocab import Vocabulary

FILLER_WORDS = [
    "the", "court", "holds", "that", "a", "claim", "under", "this", "act",
    "is", "valid", "party", "must", "file", "notice", "within", "days",
    "rule", "of", "law",
]


def make_corpus_lines(n_sentences=200, n_docs=8, seed=13, words=None):
    """Deterministic synthetic corpus; blank lines delimit documents."""
    pool = words or FILLER_WORDS
    rng = random.Random(seed)
    lines = []
    per_doc = max(2, n_sentences // n_docs)
    for _ in range(n_docs):
        for _ in range(per_doc):
            k = rng.randint(3, 8)
            lines.append(" ".join(rng.choice(pool) for _ in range(k)))
        lines.append("")
    return lines


@pytest.fixture
def corpus_file(tmp_path):
    path = tmp_path / "corpus.txt"
    path.write_text("\n".join(make_corpus_lines()) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def tiny_vocab():
    return Vocabulary.from_pieces(
        ["a", "##a", "b", "##b", "c", "##c", "ab", "##ab", "abc", "##abc", "bc", "##bc"]
    )
