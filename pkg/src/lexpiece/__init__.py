"""lexpiece: domain subword vocabularies, divergence reports, and
desk-scale MLM/NSP pretraining for legal-text classification."""

__version__ = "0.1.0"

from .bpe import BpeVocabTrainer, MergeTable, train_bpe
from .classify import EncoderClassifier
from .corpus import NormalizedSentence, load_corpus, load_documents, normalize, word_counts
from .model import Batch, EncoderWeights, ModelConfig, init_weights
from .pretrain_data import (
    PretrainExample,
    apply_mlm,
    build_nsp_pairs,
    generate_examples,
    make_example,
    read_examples,
    write_examples,
)
from .tokenizer import (
    Segmentation,
    UnigramTokenizer,
    WordPieceTokenizer,
    decode,
    detokenize,
    encode,
    make_tokenizer,
    viterbi_segment,
    wordpiece_segment,
)
from .trainer import (
    EvalReport,
    LabeledExample,
    TrainConfig,
    evaluate,
    finetune,
    pretrain,
    split_data,
)
from .unigram import (
    UnigramModel,
    UnigramVocabTrainer,
    em_step,
    export_vocabulary,
    prune,
    seed_unigram,
    train_unigram,
)
from .vocab import CONTINUATION_PREFIX, SPECIAL_TOKENS, Vocabulary
from .vocab_diff import SegmentationContrast, VocabDiffReport, contrast, diff, membership_table

__all__ = [
    "Batch",
    "BpeVocabTrainer",
    "CONTINUATION_PREFIX",
    "EncoderClassifier",
    "EncoderWeights",
    "EvalReport",
    "LabeledExample",
    "MergeTable",
    "ModelConfig",
    "NormalizedSentence",
    "PretrainExample",
    "SPECIAL_TOKENS",
    "Segmentation",
    "SegmentationContrast",
    "TrainConfig",
    "UnigramModel",
    "UnigramTokenizer",
    "UnigramVocabTrainer",
    "VocabDiffReport",
    "Vocabulary",
    "WordPieceTokenizer",
    "apply_mlm",
    "build_nsp_pairs",
    "contrast",
    "decode",
    "detokenize",
    "diff",
    "em_step",
    "encode",
    "evaluate",
    "export_vocabulary",
    "finetune",
    "generate_examples",
    "init_weights",
    "load_corpus",
    "load_documents",
    "make_example",
    "make_tokenizer",
    "membership_table",
    "normalize",
    "pretrain",
    "prune",
    "read_examples",
    "seed_unigram",
    "split_data",
    "train_bpe",
    "train_unigram",
    "viterbi_segment",
    "word_counts",
    "wordpiece_segment",
    "write_examples",
]
