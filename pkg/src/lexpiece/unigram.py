"""Unigram language model vocabulary induction.

Training follows the classic recipe for probabilistic subword inventories:

1. seed a large candidate model from corpus substring statistics,
2. run EM over the segmentation lattice of every word (the E step uses a
   forward/backward pass that marginalizes over all segmentations),
3. prune the candidates whose removal costs the least corpus likelihood,
4. repeat 2-3 until the inventory fits the requested size.

Pruning scores each multi-character piece with a Viterbi (hard-count)
approximation: the likelihood delta of deleting the piece and re-segmenting
its occurrences by the best alternative decomposition. Single characters
are never pruned, so every training word stays segmentable.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Mapping
from pathlib import Path

from ._validation import as_word_counts, check_fraction, check_positive
from .errors import InvalidConfigError, TargetTooSmallError, UncoveredCharacterError
from .vocab import CONTINUATION_PREFIX, SPECIAL_TOKENS, Vocabulary

try:
    from sklearn.base import BaseEstimator
except ImportError:  # pragma: no cover
    BaseEstimator = object

_MASS_TOLERANCE = 1e-6


class UnigramModel:
    """Token -> log-probability table; probabilities sum to one.

    Immutable once constructed. Construction validates that every
    log-probability is finite and non-positive and that the probability
    mass is 1 within 1e-6.
    """

    def __init__(self, log_probs: Mapping[str, float]):
        if not log_probs:
            raise InvalidConfigError("UnigramModel needs at least one entry")
        for token, lp in log_probs.items():
            if not math.isfinite(lp) or lp > 0.0:
                raise InvalidConfigError(f"log-probability of {token!r} must be finite and <= 0, got {lp!r}")
        mass = sum(math.exp(lp) for lp in log_probs.values())
        if abs(mass - 1.0) > _MASS_TOLERANCE:
            raise InvalidConfigError(f"probability mass must be 1 +/- {_MASS_TOLERANCE}, got {mass!r}")
        self._log_probs = dict(log_probs)
        self.max_piece_len = max(len(t) for t in self._log_probs)

    def __len__(self) -> int:
        return len(self._log_probs)

    def __contains__(self, token: str) -> bool:
        return token in self._log_probs

    def __iter__(self):
        return iter(self._log_probs)

    def log_prob(self, token: str) -> float:
        return self._log_probs[token]

    def items(self):
        return self._log_probs.items()

    def pieces(self) -> list[str]:
        return list(self._log_probs)

    def save(self, path: str | Path) -> None:
        """Write ``token<TAB>log_prob`` lines, descending log_prob."""
        ordered = sorted(self._log_probs.items(), key=lambda kv: (-kv[1], kv[0]))
        with open(path, "w", encoding="utf-8") as handle:
            for token, lp in ordered:
                handle.write(f"{token}\t{lp!r}\n")

    @classmethod
    def load(cls, path: str | Path) -> "UnigramModel":
        log_probs: dict[str, float] = {}
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.rstrip("\n")
                if not line:
                    continue
                token, _, lp = line.partition("\t")
                log_probs[token] = float(lp)
        return cls(log_probs)


def _normalized(counts: Mapping[str, float]) -> dict[str, float]:
    total = sum(counts.values())
    out: dict[str, float] = {}
    for token, count in sorted(counts.items()):
        p = count / total
        if p > 0.0:  # counts so small they underflow count as zero
            out[token] = math.log(p)
    return out


def substring_counts(word_counts: Mapping[str, int], max_piece_len: int) -> Counter:
    """Count every contiguous substring (length <= max_piece_len), weighted
    by word frequency."""
    counts: Counter = Counter()
    for word, count in word_counts.items():
        n = len(word)
        for i in range(n):
            for j in range(i + 1, min(n, i + max_piece_len) + 1):
                counts[word[i:j]] += count
    return counts


def seed_unigram(word_counts: Mapping[str, int], seed_size: int, max_piece_len: int = 16) -> UnigramModel:
    """Initialize a model from substring statistics.

    All single characters are kept; the remaining budget goes to the
    highest-frequency multi-character substrings (ties lexicographic).
    Probabilities start proportional to the substring counts.
    """
    check_positive("seed_size", seed_size)
    counts = substring_counts(word_counts, max_piece_len)
    if not counts:
        raise InvalidConfigError("seed_unigram: empty corpus")
    singles = {t: c for t, c in counts.items() if len(t) == 1}
    if seed_size < len(singles):
        raise InvalidConfigError(
            f"seed_unigram: seed_size {seed_size} is below the alphabet size {len(singles)}"
        )
    multis = sorted(
        ((t, c) for t, c in counts.items() if len(t) > 1),
        key=lambda kv: (-kv[1], kv[0]),
    )
    selected = dict(singles)
    for token, count in multis[: seed_size - len(singles)]:
        selected[token] = count
    return UnigramModel(_normalized(selected))


def _logsumexp(values: list[float]) -> float:
    top = max(values)
    if top == -math.inf:
        return -math.inf
    return top + math.log(sum(math.exp(v - top) for v in values))


def _lattice_edges(log_probs: Mapping[str, float], word: str, max_piece_len: int):
    """Yield (start, end, piece, log_prob) for every in-model substring."""
    n = len(word)
    for i in range(n):
        for j in range(i + 1, min(n, i + max_piece_len) + 1):
            piece = word[i:j]
            lp = log_probs.get(piece)
            if lp is not None:
                yield i, j, piece, lp


def _dead_end(log_probs: Mapping[str, float], word: str, max_piece_len: int) -> int:
    """Return the largest reachable lattice position (< len(word)) when the
    word has no full segmentation; word[pos] is the offending character."""
    n = len(word)
    reachable = [False] * (n + 1)
    reachable[0] = True
    for i in range(n):
        if not reachable[i]:
            continue
        for j in range(i + 1, min(n, i + max_piece_len) + 1):
            if word[i:j] in log_probs:
                reachable[j] = True
    return max(i for i in range(n) if reachable[i])


def viterbi_decode(
    log_probs: Mapping[str, float],
    word: str,
    max_piece_len: int,
    exclude: str | None = None,
) -> tuple[list[str], float]:
    """Best segmentation of ``word`` by total log-probability.

    Ties break to fewer pieces, then to the lexicographically smallest
    piece sequence, so decoding is deterministic. Raises
    UncoveredCharacterError when no segmentation exists.
    """
    n = len(word)
    # dp[j] = (score, piece_count, pieces) for the best segmentation of word[:j]
    dp: list[tuple[float, int, tuple[str, ...]] | None] = [None] * (n + 1)
    dp[0] = (0.0, 0, ())
    for i in range(n):
        state = dp[i]
        if state is None:
            continue
        score_i, count_i, pieces_i = state
        for j in range(i + 1, min(n, i + max_piece_len) + 1):
            piece = word[i:j]
            if piece == exclude:
                continue
            lp = log_probs.get(piece)
            if lp is None:
                continue
            candidate = (score_i + lp, count_i + 1, pieces_i + (piece,))
            incumbent = dp[j]
            if (
                incumbent is None
                or candidate[0] > incumbent[0]
                or (candidate[0] == incumbent[0] and candidate[1] < incumbent[1])
                or (candidate[0] == incumbent[0] and candidate[1] == incumbent[1] and candidate[2] < incumbent[2])
            ):
                dp[j] = candidate
    if dp[n] is None:
        if exclude is not None:
            raise UncoveredCharacterError(word, word[0], op="viterbi_decode(excluded)")
        pos = _dead_end(log_probs, word, max_piece_len)
        raise UncoveredCharacterError(word, word[pos])
    score, _, pieces = dp[n]
    return list(pieces), score


def em_step(model: UnigramModel, word_counts: Mapping[str, int]) -> tuple[UnigramModel, float]:
    """One EM iteration.

    Returns the re-estimated model and the corpus log-likelihood of the
    INPUT model, where each word's probability marginalizes over all of
    its segmentations (forward lattice sum). Multi-character pieces whose
    expected count is zero drop out of the new model (absence encodes
    zero probability); single characters observed in the corpus are kept
    alive with a floor count, since a model must always cover its
    training alphabet even when a character's posterior underflows.
    """
    log_probs = model._log_probs
    max_len = model.max_piece_len
    expected: dict[str, float] = {}
    loglik = 0.0

    for word, count in sorted(word_counts.items()):
        if not word or count <= 0:
            continue
        n = len(word)
        edges = list(_lattice_edges(log_probs, word, max_len))
        alpha = [-math.inf] * (n + 1)
        alpha[0] = 0.0
        incoming: list[list[float]] = [[] for _ in range(n + 1)]
        for i, j, _, lp in edges:
            incoming[j].append((i, lp))
        for j in range(1, n + 1):
            terms = [alpha[i] + lp for i, lp in incoming[j] if alpha[i] > -math.inf]
            if terms:
                alpha[j] = _logsumexp(terms)
        if alpha[n] == -math.inf:
            pos = _dead_end(log_probs, word, max_len)
            raise UncoveredCharacterError(word, word[pos], op="em_step")
        beta = [-math.inf] * (n + 1)
        beta[n] = 0.0
        outgoing: list[list[float]] = [[] for _ in range(n + 1)]
        for i, j, _, lp in edges:
            outgoing[i].append((j, lp))
        for i in range(n - 1, -1, -1):
            terms = [lp + beta[j] for j, lp in outgoing[i] if beta[j] > -math.inf]
            if terms:
                beta[i] = _logsumexp(terms)
        loglik += count * alpha[n]
        for i, j, piece, lp in edges:
            if alpha[i] == -math.inf or beta[j] == -math.inf:
                continue
            posterior = math.exp(alpha[i] + lp + beta[j] - alpha[n])
            if posterior > 0.0:
                expected[piece] = expected.get(piece, 0.0) + count * posterior

    if not expected:
        raise InvalidConfigError("em_step: empty corpus")
    floor = sum(expected.values()) * 1e-30
    for word in word_counts:
        for char in word:
            if char in model and expected.get(char, 0.0) < floor:
                expected[char] = floor
    return UnigramModel(_normalized(expected)), loglik


def prune(
    model: UnigramModel,
    word_counts: Mapping[str, int],
    keep_fraction: float,
    *,
    min_keep: int | None = None,
) -> UnigramModel:
    """Drop the least useful multi-character pieces.

    Keeps ``int(keep_fraction * n_multi)`` multi-character pieces (at least
    ``min_keep`` when given). Usefulness of a piece is its Viterbi usage
    count times the score it saves over the best alternative decomposition
    of the piece itself; unused pieces cost nothing and go first. Single
    characters always survive; remaining probabilities are renormalized.
    """
    check_fraction("keep_fraction", keep_fraction)
    multis = sorted(t for t in model.pieces() if len(t) > 1)
    if not multis:
        return model

    n_keep = int(len(multis) * keep_fraction)
    if min_keep is not None:
        n_keep = max(n_keep, min_keep)
    n_keep = min(n_keep, len(multis))
    if n_keep == len(multis):
        return model

    log_probs = model._log_probs
    usage: Counter = Counter()
    for word, count in sorted(word_counts.items()):
        if not word or count <= 0:
            continue
        pieces, _ = viterbi_decode(log_probs, word, model.max_piece_len)
        for piece in pieces:
            usage[piece] += count

    deltas: list[tuple[float, str]] = []
    for token in multis:
        freq = usage[token]
        if freq == 0:
            deltas.append((0.0, token))
            continue
        _, alt_score = viterbi_decode(log_probs, token, model.max_piece_len, exclude=token)
        deltas.append((freq * (log_probs[token] - alt_score), token))
    deltas.sort(key=lambda kv: (kv[0], kv[1]))
    dropped = {token for _, token in deltas[: len(multis) - n_keep]}

    kept = {t: math.exp(lp) for t, lp in model.items() if t not in dropped}
    return UnigramModel(_normalized(kept))


def _export_forms(model: UnigramModel) -> list[str]:
    # Each piece appears in word-initial form and in continuation form so
    # the exported vocabulary can encode pieces at any word position.
    forms: list[tuple[float, str]] = []
    for token, lp in model.items():
        forms.append((lp, token))
        forms.append((lp, CONTINUATION_PREFIX + token))
    forms.sort(key=lambda kv: (-kv[0], kv[1]))
    return [token for _, token in forms]


def export_vocabulary(model: UnigramModel) -> Vocabulary:
    """Vocabulary view of a model: specials first, then pieces by
    descending log-probability, each with its ``##`` continuation twin."""
    return Vocabulary.from_pieces(_export_forms(model))


def train_unigram(
    word_counts: Mapping[str, int],
    target_size: int,
    *,
    seed_size: int | None = None,
    em_iters_per_round: int = 2,
    keep_fraction: float = 0.8,
    max_piece_len: int = 16,
) -> tuple[UnigramModel, Vocabulary]:
    """Full training loop: seed, then alternate EM and pruning until the
    exported vocabulary fits ``target_size`` lines.

    The exported vocabulary holds the five specials plus two forms per
    piece, so the model is pruned until ``5 + 2 * len(model) <=
    target_size``. Deterministic: identical inputs produce byte-identical
    vocabulary files.
    """
    check_positive("target_size", target_size)
    check_positive("em_iters_per_round", em_iters_per_round)
    alphabet = {c for w in word_counts if word_counts[w] > 0 for c in w}
    if not alphabet:
        raise InvalidConfigError("train_unigram: empty corpus")
    base = len(SPECIAL_TOKENS) + 2 * len(alphabet)
    if target_size < base:
        raise TargetTooSmallError(
            f"train_unigram: target_size {target_size} cannot hold {len(SPECIAL_TOKENS)} specials "
            f"plus both forms of {len(alphabet)} characters (needs {base})"
        )
    max_entries = (target_size - len(SPECIAL_TOKENS)) // 2
    if seed_size is None:
        seed_size = 10 * target_size

    model = seed_unigram(word_counts, seed_size, max_piece_len)
    while len(model) > max_entries:
        for _ in range(em_iters_per_round):
            model, _ = em_step(model, word_counts)
        if len(model) <= max_entries:
            break
        n_single = sum(1 for t in model.pieces() if len(t) == 1)
        before = len(model)
        model = prune(model, word_counts, keep_fraction, min_keep=max_entries - n_single)
        if len(model) == before:
            break
    return model, export_vocabulary(model)


class UnigramVocabTrainer(BaseEstimator):
    """Estimator facade over :func:`train_unigram`.

    Fit on an iterable of normalized sentences (or a word->count mapping);
    the trained model and exported vocabulary land in ``model_`` and
    ``vocab_``.
    """

    def __init__(
        self,
        vocab_size: int = 8000,
        seed_size: int | None = None,
        em_iters_per_round: int = 2,
        keep_fraction: float = 0.8,
        max_piece_len: int = 16,
    ):
        self.vocab_size = vocab_size
        self.seed_size = seed_size
        self.em_iters_per_round = em_iters_per_round
        self.keep_fraction = keep_fraction
        self.max_piece_len = max_piece_len

    def fit(self, X, y=None):
        counts = as_word_counts(X)
        self.model_, self.vocab_ = train_unigram(
            counts,
            self.vocab_size,
            seed_size=self.seed_size,
            em_iters_per_round=self.em_iters_per_round,
            keep_fraction=self.keep_fraction,
            max_piece_len=self.max_piece_len,
        )
        return self
