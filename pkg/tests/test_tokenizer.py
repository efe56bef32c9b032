import math
import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lexpiece.errors import IdOutOfRangeError, InvalidConfigError, UncoveredCharacterError
from lexpiece.tokenizer import (
    UnigramTokenizer,
    WordPieceTokenizer,
    decode,
    detokenize,
    encode,
    make_tokenizer,
    viterbi_segment,
    wordpiece_segment,
)
from lexpiece.unigram import UnigramModel
from lexpiece.vocab import UNK_TOKEN
from oracles import brute_force_viterbi, random_unigram_fixture

DATA_DIR = Path(__file__).parent / "data"


def _model(probs):
    return UnigramModel({t: math.log(p) for t, p in probs.items()})


class TestWordPieceSegment:
    def test_whole_word_in_vocab(self, tiny_vocab):
        seg = wordpiece_segment(tiny_vocab, "abc")
        assert seg.pieces == ["abc"]
        assert seg.ids == [tiny_vocab.id_of("abc")]

    def test_greedy_longest_match(self, tiny_vocab):
        # "abca" -> longest prefix "abc", then "##a"
        assert wordpiece_segment(tiny_vocab, "abca").pieces == ["abc", "##a"]

    def test_unmatched_position_collapses_to_unk(self, tiny_vocab):
        seg = wordpiece_segment(tiny_vocab, "abx")
        assert seg.pieces == [UNK_TOKEN]
        assert seg.ids == [tiny_vocab.unk_id]

    def test_char_fallback_rescues(self, tiny_vocab):
        seg = wordpiece_segment(tiny_vocab, "abxc", char_fallback=True)
        assert seg.pieces == ["ab", "##x", "##c"]
        assert seg.ids[1] == tiny_vocab.unk_id
        assert seg.ids[2] == tiny_vocab.id_of("##c")

    def test_piece_concatenation_reconstructs_word(self, tiny_vocab):
        word = "abcab"
        seg = wordpiece_segment(tiny_vocab, word)
        joined = "".join(p.removeprefix("##") for p in seg.pieces)
        assert joined == word

    def test_rejects_empty_or_spaced(self, tiny_vocab):
        with pytest.raises(InvalidConfigError):
            wordpiece_segment(tiny_vocab, "")
        with pytest.raises(InvalidConfigError):
            wordpiece_segment(tiny_vocab, "a b")


class TestViterbiSegment:
    def test_prefers_highest_probability(self):
        # [ab] = log 0.2 beats [a,b] = log 0.16
        model = _model({"a": 0.4, "b": 0.4, "ab": 0.2})
        seg, score = viterbi_segment(model, "ab")
        assert seg.pieces == ["ab"]
        assert score == pytest.approx(math.log(0.2))

    def test_single_character(self):
        model = _model({"a": 1.0})
        seg, score = viterbi_segment(model, "a")
        assert seg.pieces == ["a"]
        assert score == 0.0

    def test_tie_breaks_to_fewer_pieces(self):
        # p(aa) = p(a)^2 exactly, so [aa] and [a,a] tie on score
        la = math.log(0.5)
        model = UnigramModel({"a": la, "aa": 2 * la, "b": math.log(0.25)})
        seg, _ = viterbi_segment(model, "aa")
        assert seg.pieces == ["aa"]

    def test_tie_breaks_lexicographically(self):
        # [a,ba] and [ab,a] tie on score and count; "a" < "ab"
        shared = math.log(0.2)
        model = UnigramModel(
            {"a": math.log(0.3), "b": math.log(0.3), "ab": shared, "ba": shared}
        )
        seg, _ = viterbi_segment(model, "aba")
        assert seg.pieces == ["a", "ba"]

    def test_uncovered_character(self):
        model = _model({"a": 1.0})
        with pytest.raises(UncoveredCharacterError) as err:
            viterbi_segment(model, "ax")
        assert err.value.char == "x"

    def test_matches_brute_force_oracle(self):
        rng = random.Random(2024)
        for _ in range(120):
            log_probs, word = random_unigram_fixture(rng)
            model = UnigramModel(log_probs)
            seg, score = viterbi_segment(model, word)
            oracle_pieces, oracle_score = brute_force_viterbi(log_probs, word)
            assert seg.pieces == oracle_pieces
            assert score == oracle_score


class TestEncodeDecode:
    def test_round_trip(self, tiny_vocab):
        tokens = ["a", "##b", "abc"]
        assert decode(tiny_vocab, encode(tiny_vocab, tokens)) == tokens

    def test_unknown_token_becomes_unk_id_one(self, tiny_vocab):
        assert encode(tiny_vocab, ["zzz"]) == [1]
        assert tiny_vocab.unk_id == 1

    def test_decode_out_of_range(self, tiny_vocab):
        with pytest.raises(IdOutOfRangeError):
            decode(tiny_vocab, [len(tiny_vocab)])
        with pytest.raises(IdOutOfRangeError):
            decode(tiny_vocab, [-1])


class TestDetokenize:
    def test_strips_markers(self):
        assert detokenize(["contra", "##vent", "##ion"]) == "contravention"

    def test_empty(self):
        assert detokenize([]) == ""

    def test_multiple_words(self):
        assert detokenize(["a", "##b", "c"]) == "ab c"


@st.composite
def covered_sentences(draw):
    words = draw(
        st.lists(
            st.text(alphabet="abc", min_size=1, max_size=8),
            min_size=1,
            max_size=6,
        )
    )
    return " ".join(words)


class TestRoundTrip:
    MODEL = {"a": 0.2, "b": 0.2, "c": 0.15, "ab": 0.2, "bc": 0.15, "abc": 0.1}

    @given(covered_sentences())
    @settings(max_examples=200)
    def test_unigram_round_trip(self, sentence):
        tokenizer = UnigramTokenizer(_model(self.MODEL))
        assert detokenize(tokenizer.tokenize(sentence)) == sentence

    @given(covered_sentences())
    @settings(max_examples=200)
    def test_wordpiece_round_trip(self, sentence):
        tokenizer = WordPieceTokenizer(UnigramTokenizer(_model(self.MODEL)).vocab)
        assert detokenize(tokenizer.tokenize(sentence)) == sentence

    @given(covered_sentences())
    @settings(max_examples=100)
    def test_encode_is_unk_free_on_covered_text(self, sentence):
        tokenizer = UnigramTokenizer(_model(self.MODEL))
        ids = tokenizer.encode(sentence)
        assert tokenizer.vocab.unk_id not in ids


class TestTokenizerClasses:
    def test_tokenize_splits_on_whitespace(self, tiny_vocab):
        tokenizer = WordPieceTokenizer(tiny_vocab)
        assert tokenizer.tokenize("a ab") == ["a", "ab"]

    def test_empty_sentence(self, tiny_vocab):
        assert WordPieceTokenizer(tiny_vocab).tokenize("") == []

    def test_transform_batches(self, tiny_vocab):
        out = WordPieceTokenizer(tiny_vocab).transform(["a", "ab a"])
        assert out == [["a"], ["ab", "a"]]

    def test_unigram_marks_continuations(self):
        tokenizer = UnigramTokenizer(_model({"ab": 0.5, "a": 0.25, "b": 0.25}))
        assert tokenizer.tokenize("abab") == ["ab", "##ab"]

    def test_determinism(self, tiny_vocab):
        tokenizer = WordPieceTokenizer(tiny_vocab)
        assert tokenizer.tokenize("abc ab") == tokenizer.tokenize("abc ab")

    def test_make_tokenizer_dispatch(self, tiny_vocab):
        assert make_tokenizer(tiny_vocab, "wordpiece").mode == "wordpiece"
        assert make_tokenizer(_model({"a": 1.0}), "unigram").mode == "unigram"
        with pytest.raises(InvalidConfigError):
            make_tokenizer(tiny_vocab, "unigram")

    def test_accepts_normalized_sentence_objects(self, tiny_vocab):
        from lexpiece.corpus import normalize

        tokenizer = WordPieceTokenizer(tiny_vocab)
        assert tokenizer.tokenize(normalize("A  AB")) == ["a", "ab"]


class TestGoldenSegmentation:
    def test_hundred_sentence_fixture_matches_golden(self):
        # golden file produced by the first verified run and reviewed by hand
        model = UnigramModel.load(DATA_DIR / "golden_model.tsv")
        tokenizer = UnigramTokenizer(model)
        sentences = (DATA_DIR / "golden_sentences.txt").read_text(encoding="utf-8").splitlines()
        expected = (DATA_DIR / "golden_pieces.txt").read_text(encoding="utf-8").splitlines()
        assert len(sentences) == 100
        produced = [" ".join(tokenizer.tokenize(s)) for s in sentences]
        assert produced == expected
