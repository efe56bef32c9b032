"""Fixed-length MLM + NSP pretraining examples.

An example is the classic two-segment layout::

    [CLS] segment A [SEP] segment B [SEP] [PAD] ...

with segment B either the true next sentence (label 1) or a random
sentence from a different document (label 0). Masking selects each
content position independently at ``mask_rate`` and rewrites selected
positions with the 80/10/10 mask/random/keep policy. Everything is
deterministic under the given seed.

The example file format is line-oriented text: a header line
``lexpiece-examples<TAB>v1<TAB>max_len=L`` followed by one record per
line with ``name=comma,separated,ints`` fields.
"""

from __future__ import annotations

import random
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    CorruptRecordError,
    EmptySegmentError,
    InsufficientDocumentsError,
    InvalidConfigError,
    LexpieceError,
)
from .vocab import Vocabulary

IS_NEXT = 1
NOT_NEXT = 0

FORMAT_NAME = "lexpiece-examples"
FORMAT_VERSION = "v1"
DEFAULT_MAX_LEN = 128
DEFAULT_MASK_RATE = 0.15
DEFAULT_MASK_POLICY = (0.8, 0.1, 0.1)

_RECORD_FIELDS = ("input_ids", "segment_ids", "attention_mask", "mlm_positions", "mlm_labels", "nsp_label")


@dataclass(frozen=True)
class PretrainExample:
    input_ids: list[int]
    segment_ids: list[int]
    attention_mask: list[int]
    mlm_positions: list[int]
    mlm_labels: list[int]
    nsp_label: int


def _derive_seed(seed: int, index: int) -> int:
    return seed * 1_000_003 + index


def build_nsp_pairs(
    documents: Sequence[Sequence[Sequence[int]]], seed: int
) -> list[tuple[list[int], list[int], int]]:
    """Next-sentence pairs from tokenized documents.

    For every consecutive sentence pair inside a document, a fair coin
    decides between the true next sentence (IS_NEXT) and a uniformly
    random sentence drawn from a different document (NOT_NEXT).
    Deterministic given ``seed``.
    """
    docs = [list(doc) for doc in documents if len(doc) > 0]
    if len(docs) < 2:
        raise InsufficientDocumentsError(
            f"build_nsp_pairs: need at least 2 non-empty documents, got {len(docs)}"
        )
    pool: list[tuple[int, Sequence[int]]] = [
        (doc_index, sentence) for doc_index, doc in enumerate(docs) for sentence in doc
    ]
    rng = random.Random(seed)
    pairs: list[tuple[list[int], list[int], int]] = []
    for doc_index, doc in enumerate(docs):
        for i in range(len(doc) - 1):
            first = list(doc[i])
            if rng.random() < 0.5:
                pairs.append((first, list(doc[i + 1]), IS_NEXT))
            else:
                while True:
                    k = rng.randrange(len(pool))
                    if pool[k][0] != doc_index:
                        break
                pairs.append((first, list(pool[k][1]), NOT_NEXT))
    return pairs


def apply_mlm(
    tokens: Sequence[int],
    vocab: Vocabulary,
    seed: int,
    mask_rate: float = DEFAULT_MASK_RATE,
    policy: tuple[float, float, float] = DEFAULT_MASK_POLICY,
) -> tuple[list[int], list[int], list[int]]:
    """Mask token ids for MLM.

    Every position whose id is not PAD/CLS/SEP/MASK is eligible and is
    selected independently with probability ``mask_rate``. Selected
    positions become the MASK id, a uniformly random non-special id, or
    stay unchanged, with the (mask, random, keep) shares of ``policy``.
    If the independent draw selects nothing, one eligible position is
    forced so the example always carries a label.
    """
    if not 0.0 <= mask_rate <= 1.0:
        raise InvalidConfigError(f"mask_rate must be in [0, 1], got {mask_rate!r}")
    p_mask, p_random, p_keep = policy
    if abs(p_mask + p_random + p_keep - 1.0) > 1e-9 or min(policy) < 0:
        raise InvalidConfigError(f"mask policy must be non-negative and sum to 1, got {policy!r}")

    non_maskable = {vocab.pad_id, vocab.cls_id, vocab.sep_id, vocab.mask_id}
    eligible = [i for i, t in enumerate(tokens) if t not in non_maskable]
    masked = list(tokens)
    if not eligible:
        return masked, [], []

    rng = random.Random(seed)
    selected = [i for i in eligible if rng.random() < mask_rate]
    if not selected:
        selected = [eligible[rng.randrange(len(eligible))]]

    replacements = [i for i in range(len(vocab)) if i not in vocab.special_ids]
    positions: list[int] = []
    labels: list[int] = []
    for i in selected:
        positions.append(i)
        labels.append(masked[i])
        draw = rng.random()
        if draw < p_mask:
            masked[i] = vocab.mask_id
        elif draw < p_mask + p_random:
            masked[i] = replacements[rng.randrange(len(replacements))]
        # else: keep the original token, but still predict it
    return masked, positions, labels


def make_example(
    pair: tuple[Sequence[int], Sequence[int], int],
    vocab: Vocabulary,
    max_len: int = DEFAULT_MAX_LEN,
    seed: int = 0,
    mask_rate: float = DEFAULT_MASK_RATE,
    policy: tuple[float, float, float] = DEFAULT_MASK_POLICY,
) -> PretrainExample:
    """Assemble one fixed-length example from an NSP pair.

    Over-length inputs lose tokens from the end of the currently longer
    segment (segment A on ties) until both fit in ``max_len - 3``.
    """
    if max_len < 5:
        raise InvalidConfigError(f"max_len must be >= 5, got {max_len}")
    seg_a, seg_b, nsp_label = pair
    seg_a, seg_b = list(seg_a), list(seg_b)
    if not seg_a or not seg_b:
        raise EmptySegmentError("make_example: both segments must be non-empty")

    budget = max_len - 3
    while len(seg_a) + len(seg_b) > budget:
        longer = seg_a if len(seg_a) >= len(seg_b) else seg_b
        longer.pop()

    ids = [vocab.cls_id] + seg_a + [vocab.sep_id] + seg_b + [vocab.sep_id]
    segment_ids = [0] * (len(seg_a) + 2) + [1] * (len(seg_b) + 1)
    content_len = len(ids)
    pad_count = max_len - content_len

    masked, positions, labels = apply_mlm(ids, vocab, seed, mask_rate, policy)

    example = PretrainExample(
        input_ids=masked + [vocab.pad_id] * pad_count,
        segment_ids=segment_ids + [0] * pad_count,
        attention_mask=[1] * content_len + [0] * pad_count,
        mlm_positions=positions,
        mlm_labels=labels,
        nsp_label=nsp_label,
    )
    validate_example(example, vocab, max_len)
    return example


def validate_example(example: PretrainExample, vocab: Vocabulary, max_len: int) -> None:
    """Check every PretrainExample invariant; raise InvalidConfigError on
    the first violation."""
    ids = example.input_ids
    if len(ids) != max_len:
        raise InvalidConfigError(f"input_ids length {len(ids)} != max_len {max_len}")
    if len(example.segment_ids) != max_len or len(example.attention_mask) != max_len:
        raise InvalidConfigError("segment_ids/attention_mask length mismatch")
    if any(not 0 <= t < len(vocab) for t in ids):
        raise InvalidConfigError("token id out of vocabulary range")
    if ids[0] != vocab.cls_id:
        raise InvalidConfigError("position 0 must be CLS")

    pad_id = vocab.pad_id
    content_len = max_len
    while content_len > 0 and ids[content_len - 1] == pad_id and example.attention_mask[content_len - 1] == 0:
        content_len -= 1
    if example.attention_mask != [1] * content_len + [0] * (max_len - content_len):
        raise InvalidConfigError("attention_mask must be 1 exactly on non-pad positions")
    if any(t == pad_id for t in ids[:content_len]):
        raise InvalidConfigError("PAD id inside content region")

    sep_positions = [i for i in range(content_len) if ids[i] == vocab.sep_id]
    if len(sep_positions) != 2:
        raise InvalidConfigError(f"expected exactly 2 SEP tokens, found {len(sep_positions)}")
    s1, s2 = sep_positions
    if s2 != content_len - 1:
        raise InvalidConfigError("second SEP must end the content region")
    expected_segments = [0] * (s1 + 1) + [1] * (s2 - s1) + [0] * (max_len - content_len)
    if example.segment_ids != expected_segments:
        raise InvalidConfigError("segment_ids do not match the two-segment layout")

    if len(example.mlm_positions) != len(example.mlm_labels):
        raise InvalidConfigError("mlm_positions/mlm_labels length mismatch")
    banned = {0, s1, s2}
    for pos in example.mlm_positions:
        if not 0 <= pos < content_len or pos in banned:
            raise InvalidConfigError(f"mlm position {pos} outside maskable content")
    if example.nsp_label not in (IS_NEXT, NOT_NEXT):
        raise InvalidConfigError(f"nsp_label must be 0 or 1, got {example.nsp_label!r}")


def generate_examples(
    token_documents: Sequence[Sequence[Sequence[int]]],
    vocab: Vocabulary,
    max_len: int = DEFAULT_MAX_LEN,
    seed: int = 0,
    mask_rate: float = DEFAULT_MASK_RATE,
    policy: tuple[float, float, float] = DEFAULT_MASK_POLICY,
) -> list[PretrainExample]:
    """End-to-end example generation from tokenized documents.

    Each example gets its own derived seed, so generation order equals
    any sharded-by-pair order.
    """
    pairs = build_nsp_pairs(token_documents, seed)
    return [
        make_example(pair, vocab, max_len, _derive_seed(seed, i), mask_rate, policy)
        for i, pair in enumerate(pairs)
    ]


def _ints(values: Iterable[int]) -> str:
    return ",".join(str(v) for v in values)


def _parse_ints(text: str) -> list[int]:
    if not text:
        return []
    return [int(v) for v in text.split(",")]


def write_examples(path: str | Path, examples: Sequence[PretrainExample], max_len: int | None = None) -> None:
    """Serialize examples; the header records format version and length."""
    if max_len is None:
        max_len = len(examples[0].input_ids) if examples else DEFAULT_MAX_LEN
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"{FORMAT_NAME}\t{FORMAT_VERSION}\tmax_len={max_len}\n")
        for ex in examples:
            handle.write(
                f"input_ids={_ints(ex.input_ids)}\t"
                f"segment_ids={_ints(ex.segment_ids)}\t"
                f"attention_mask={_ints(ex.attention_mask)}\t"
                f"mlm_positions={_ints(ex.mlm_positions)}\t"
                f"mlm_labels={_ints(ex.mlm_labels)}\t"
                f"nsp_label={ex.nsp_label}\n"
            )


def read_example_header(path: str | Path) -> int:
    """Return the max_len recorded in an example file header."""
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().rstrip("\n")
    parts = header.split("\t")
    if len(parts) != 3 or parts[0] != FORMAT_NAME or not parts[2].startswith("max_len="):
        raise CorruptRecordError(0, f"malformed header {header!r}")
    if parts[1] != FORMAT_VERSION:
        raise CorruptRecordError(0, f"unsupported format version {parts[1]!r}")
    return int(parts[2].removeprefix("max_len="))


def read_examples(path: str | Path, vocab: Vocabulary | None = None) -> list[PretrainExample]:
    """Parse an example file; validates invariants when a vocabulary is
    given. Raises CorruptRecordError with the failing record index."""
    max_len = read_example_header(path)
    examples: list[PretrainExample] = []
    with open(path, encoding="utf-8") as handle:
        handle.readline()
        for index, line in enumerate(handle):
            line = line.rstrip("\n")
            if not line:
                continue
            fields: dict[str, str] = {}
            for chunk in line.split("\t"):
                name, eq, value = chunk.partition("=")
                if not eq:
                    raise CorruptRecordError(index, f"malformed field {chunk!r}")
                fields[name] = value
            if tuple(fields) != _RECORD_FIELDS:
                raise CorruptRecordError(index, f"expected fields {_RECORD_FIELDS}, got {tuple(fields)}")
            try:
                example = PretrainExample(
                    input_ids=_parse_ints(fields["input_ids"]),
                    segment_ids=_parse_ints(fields["segment_ids"]),
                    attention_mask=_parse_ints(fields["attention_mask"]),
                    mlm_positions=_parse_ints(fields["mlm_positions"]),
                    mlm_labels=_parse_ints(fields["mlm_labels"]),
                    nsp_label=int(fields["nsp_label"]),
                )
                if len(example.input_ids) != max_len:
                    raise InvalidConfigError(
                        f"record length {len(example.input_ids)} != header max_len {max_len}"
                    )
                if vocab is not None:
                    validate_example(example, vocab, max_len)
            except (ValueError, LexpieceError) as err:
                raise CorruptRecordError(index, str(err)) from None
            examples.append(example)
    return examples
