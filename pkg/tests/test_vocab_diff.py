import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lexpiece.unigram import train_unigram
from lexpiece.vocab import Vocabulary
from lexpiece.vocab_diff import (
    contrast,
    diff,
    membership_table,
    render_human,
    render_structured,
)

LEGAL_WORDS = [
    "contravention", "construe", "demurrer", "depose", "guardianship",
    "infringe", "malfeasance", "misdemeanor", "reimburse", "renounce",
    "rescind", "rescission", "revoke", "tort", "tortious",
]


def _vocab(tokens):
    return Vocabulary.from_pieces(tokens)


class TestDiff:
    def test_identity(self):
        vocab = _vocab(["a", "b", "c"])
        report = diff(vocab, vocab)
        assert report.intersection == 3
        assert report.only_a == report.only_b == 0
        assert report.jaccard == 1.0

    def test_hand_set_arithmetic(self):
        report = diff(_vocab(["a", "b", "c"]), _vocab(["b", "c", "d"]))
        assert (report.size_a, report.size_b) == (3, 3)
        assert report.intersection == 2
        assert report.only_a == 1 and report.only_b == 1
        assert report.jaccard == pytest.approx(0.5)
        assert report.sample_only_a == ["a"]
        assert report.sample_only_b == ["d"]

    def test_disjoint(self):
        report = diff(_vocab(["a"]), _vocab(["b"]))
        assert report.jaccard == 0.0
        assert report.intersection == 0

    def test_specials_excluded(self):
        report = diff(_vocab([]), _vocab([]))
        assert report.size_a == report.size_b == 0
        assert report.jaccard == 1.0  # identical empty sets

    def test_sample_limit(self):
        report = diff(_vocab([f"t{i}" for i in range(50)]), _vocab([]), sample_limit=5)
        assert len(report.sample_only_a) == 5
        assert report.sample_only_a == sorted(report.sample_only_a)

    @given(
        st.sets(st.text(alphabet="abcdef", min_size=1, max_size=4), max_size=30),
        st.sets(st.text(alphabet="abcdef", min_size=1, max_size=4), max_size=30),
    )
    @settings(max_examples=100)
    def test_cardinality_identities(self, tokens_a, tokens_b):
        report = diff(_vocab(sorted(tokens_a)), _vocab(sorted(tokens_b)))
        assert report.intersection + report.only_a == report.size_a
        assert report.intersection + report.only_b == report.size_b
        union = report.size_a + report.size_b - report.intersection
        if union:
            assert report.jaccard == pytest.approx(report.intersection / union)

    @given(
        st.sets(st.text(alphabet="abc", min_size=1, max_size=3), max_size=20),
        st.sets(st.text(alphabet="abc", min_size=1, max_size=3), max_size=20),
    )
    @settings(max_examples=60)
    def test_symmetry(self, tokens_a, tokens_b):
        ab = diff(_vocab(sorted(tokens_a)), _vocab(sorted(tokens_b)))
        ba = diff(_vocab(sorted(tokens_b)), _vocab(sorted(tokens_a)))
        assert ab.intersection == ba.intersection
        assert (ab.only_a, ab.only_b) == (ba.only_b, ba.only_a)
        assert ab.jaccard == ba.jaccard


class TestContrast:
    def test_piece_count_contrast(self):
        baseline = _vocab(["contra", "##vent", "##ion", "both"])
        domain = _vocab(["contravention", "both"])
        rows = contrast(baseline, domain, ["contravention", "both"])
        assert (rows[0].count_a, rows[0].count_b) == (3, 1)
        assert rows[0].differs
        assert (rows[1].count_a, rows[1].count_b) == (1, 1)
        assert not rows[1].differs

    def test_counts_equal_segmentation_lengths(self):
        vocab = _vocab(["a", "##a", "b", "##b"])
        for row in contrast(vocab, vocab, ["ab", "ba", "aa"]):
            assert row.count_a == len(row.pieces_a)
            assert row.count_b == len(row.pieces_b)

    def test_legal_wordlist_against_trained_domain_vocab(self):
        # force the legal terms into the domain vocabulary by frequency
        counts = {word: 60 for word in LEGAL_WORDS}
        counts.update({"the": 30, "of": 20, "and": 10})
        alphabet = {c for w in counts for c in w}
        _, domain = train_unigram(counts, 2 * (len(alphabet) + len(LEGAL_WORDS) + 12) + 5)
        baseline = _vocab(sorted(alphabet) + ["##" + c for c in sorted(alphabet)])
        rows = contrast(baseline, domain, LEGAL_WORDS)
        for row in rows:
            assert row.word in domain
            assert row.count_b == 1
            assert row.count_a == len(row.word)  # char-only baseline
            assert row.differs


class TestMembership:
    def test_flags(self):
        vocab_a = _vocab(["x"])
        vocab_b = _vocab(["x", "##legal"])
        table = membership_table(vocab_a, vocab_b, ["##legal", "x", "nowhere"])
        assert table == [("##legal", False, True), ("x", True, True), ("nowhere", False, False)]


class TestRendering:
    def test_structured_keys_and_rows(self):
        vocab_a = _vocab(["a", "b"])
        vocab_b = _vocab(["b"])
        report = diff(vocab_a, vocab_b)
        rows = contrast(vocab_a, vocab_b, ["b"])
        text = render_structured(report, rows)
        lines = text.splitlines()
        assert lines[0] == "size_a\t2"
        keys = [line.split("\t")[0] for line in lines[:6]]
        assert keys == ["size_a", "size_b", "intersection", "only_a", "only_b", "jaccard"]
        assert lines[-1] == "b\tb\tb\t1\t1"

    def test_human_table_mentions_counts(self):
        report = diff(_vocab(["a"]), _vocab(["b"]))
        text = render_human(report)
        assert "intersection" in text and "jaccard" in text
