"""Exception hierarchy for the lexpiece toolkit.

Every error raised by a public operation derives from :class:`LexpieceError`
so callers (and the CLI) can distinguish data/validation failures from bugs.
"""


class LexpieceError(Exception):
    """Base class for all toolkit errors."""


class InvalidEncodingError(LexpieceError):
    """A corpus file contained bytes that are not valid UTF-8."""

    def __init__(self, path: str, line: int):
        self.path = path
        self.line = line
        super().__init__(f"load_corpus: invalid UTF-8 in {path!r} at line {line}")


class TargetTooSmallError(LexpieceError):
    """Requested vocabulary size cannot hold the alphabet plus specials."""


class UncoveredCharacterError(LexpieceError):
    """A word contains a character the unigram model cannot segment."""

    def __init__(self, word: str, char: str, op: str = "viterbi_segment"):
        self.word = word
        self.char = char
        super().__init__(f"{op}: character {char!r} of word {word!r} is not covered by the model")


class IdOutOfRangeError(LexpieceError):
    """A token id fell outside the vocabulary's id range."""


class InsufficientDocumentsError(LexpieceError):
    """Next-sentence pairing needs at least two documents."""


class EmptySegmentError(LexpieceError):
    """A pretraining example was built from an empty segment."""


class CorruptRecordError(LexpieceError):
    """An example file record failed to parse or validate."""

    def __init__(self, index: int, reason: str):
        self.index = index
        super().__init__(f"read_examples: corrupt record {index}: {reason}")


class InvalidConfigError(LexpieceError):
    """A model or training configuration violates its invariants."""


class ShapeMismatchError(LexpieceError):
    """Batch arrays do not match the model configuration."""


class LengthMismatchError(LexpieceError):
    """Example file sequence length differs from the model's max length."""


class NonFiniteLossError(LexpieceError):
    """Training loss became NaN or infinite."""

    def __init__(self, step: int):
        self.step = step
        super().__init__(f"pretrain: non-finite loss at step {step}")


class EmptyDatasetError(LexpieceError):
    """An operation that needs labeled examples received none."""


class DatasetTooSmallError(LexpieceError):
    """Dataset too small to split."""


class ConfigError(LexpieceError):
    """Pipeline configuration file is invalid (unknown key, bad value)."""


class UsageError(LexpieceError):
    """Bad command line usage (maps to exit code 1)."""
