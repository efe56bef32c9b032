"""Command line interface.

Subcommands: build-vocab, tokenize, vocab-diff, gen-data, pretrain,
finetune, eval, pipeline. Exit codes: 0 success, 1 usage error, 2
data/validation error. The ``pipeline`` subcommand chains build-vocab ->
gen-data -> pretrain -> finetune -> eval inside one output directory and
reads a flat ``section.key = value`` config file; command line flags
override config values. Every artifact is reproducible under a fixed
seed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .bpe import train_bpe
from .corpus import load_corpus, load_documents, save_word_counts, normalize, word_counts
from .errors import ConfigError, LexpieceError, UsageError
from .model import CHECKPOINT_VERSION, EncoderWeights, ModelConfig, init_weights
from .pretrain_data import FORMAT_VERSION as EXAMPLES_FORMAT_VERSION
from .pretrain_data import generate_examples, read_example_header, write_examples
from .tokenizer import UnigramTokenizer, WordPieceTokenizer
from .trainer import (
    TrainConfig,
    evaluate,
    finetune,
    load_labeled,
    pretrain,
    render_accuracy_table,
    render_report,
    save_loss_history,
    split_data,
)
from .unigram import UnigramModel, train_unigram
from .vocab import Vocabulary
from .vocab_diff import contrast, diff, render_human, render_structured

VERSION_LINE = (
    f"lexpiece {__version__} "
    f"(examples-format {EXAMPLES_FORMAT_VERSION}, checkpoint-format v{CHECKPOINT_VERSION})"
)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_mode(text: str) -> str:
    if text not in ("unigram", "bpe"):
        raise ConfigError(f"vocab.mode must be 'unigram' or 'bpe', got {text!r}")
    return text


#: key -> (parser, default). A 0 for *.warmup_steps, finetune.max_len or
#: vocab.seed_size means "derive automatically".
CONFIG_SCHEMA: dict = {
    "seed": (int, 0),
    "corpus.lowercase": (_parse_bool, True),
    "vocab.mode": (_parse_mode, "unigram"),
    "vocab.size": (int, 400),
    "vocab.seed_size": (int, 0),
    "vocab.em_iters_per_round": (int, 2),
    "vocab.keep_fraction": (float, 0.8),
    "vocab.max_piece_len": (int, 16),
    "tokenizer.char_fallback": (_parse_bool, False),
    "data.max_len": (int, 128),
    "data.mask_rate": (float, 0.15),
    "model.hidden_dim": (int, 64),
    "model.num_layers": (int, 2),
    "model.num_heads": (int, 4),
    "model.ff_dim": (int, 256),
    "model.dropout_rate": (float, 0.1),
    "pretrain.learning_rate": (float, 3e-4),
    "pretrain.warmup_steps": (int, 0),
    "pretrain.batch_size": (int, 16),
    "pretrain.max_steps": (int, 200),
    "pretrain.plateau_epsilon": (float, 1e-3),
    "pretrain.plateau_patience": (int, 5),
    "pretrain.eval_interval": (int, 50),
    "pretrain.weight_decay": (float, 0.01),
    "finetune.learning_rate": (float, 3e-5),
    "finetune.warmup_steps": (int, 0),
    "finetune.batch_size": (int, 32),
    "finetune.epochs": (int, 5),
    "finetune.weight_decay": (float, 0.01),
    "finetune.max_len": (int, 0),
    "train.labeled_file": (str, ""),
    "train.train_fraction": (float, 0.9),
}


def parse_config_file(path: str | Path) -> dict:
    """Read a flat key-value config; unknown keys are errors."""
    values = {key: default for key, (_, default) in CONFIG_SCHEMA.items()}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, eq, raw = line.partition("=")
            if not eq:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key = key.strip()
            if key not in CONFIG_SCHEMA:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            caster = CONFIG_SCHEMA[key][0]
            try:
                values[key] = caster(raw.strip())
            except (ValueError, ConfigError) as err:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {err}") from None
    return values


def _load_tokenizer(vocab_path: str, mode: str, char_fallback: bool = False):
    """Tokenizer plus id vocabulary from a file.

    ``wordpiece`` expects a vocabulary file (token per line); ``unigram``
    expects a model file (token<TAB>log_prob).
    """
    if mode == "wordpiece":
        vocab = Vocabulary.load(vocab_path)
        return WordPieceTokenizer(vocab, char_fallback=char_fallback), vocab
    model = UnigramModel.load(vocab_path)
    tokenizer = UnigramTokenizer(model)
    return tokenizer, tokenizer.vocab


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="lexpiece", description=__doc__)
    parser.add_argument("--version", action="version", version=VERSION_LINE)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-vocab", help="induce a subword vocabulary from a corpus")
    p.add_argument("corpus", help="UTF-8 corpus, one sentence per line")
    p.add_argument("--mode", choices=["unigram", "bpe"], default="unigram")
    p.add_argument("--size", type=int, default=400, help="max lines in the vocabulary file")
    p.add_argument("-o", "--output", required=True, help="vocabulary file (token per line)")
    p.add_argument("--model-out", help="unigram model file (token<TAB>log_prob)")
    p.add_argument("--merges-out", help="BPE merge table file")
    p.add_argument("--seed-size", type=int, default=0, help="unigram seed size (0 = 10x size)")
    p.add_argument("--em-iters", type=int, default=2, help="EM iterations per prune round")
    p.add_argument("--keep-fraction", type=float, default=0.8)
    p.add_argument("--max-piece-len", type=int, default=16)
    p.add_argument("--no-lowercase", action="store_true")
    p.add_argument("--seed", type=int, default=0, help="accepted for symmetry; induction is deterministic")

    p = sub.add_parser("tokenize", help="segment stdin sentences into subwords")
    p.add_argument("--vocab", required=True, help="vocabulary file (wordpiece) or model file (unigram)")
    p.add_argument("--mode", choices=["wordpiece", "unigram"], default="wordpiece")
    p.add_argument("--ids", action="store_true", help="emit comma-joined ids instead of pieces")
    p.add_argument("--char-fallback", action="store_true")
    p.add_argument("--no-lowercase", action="store_true")

    p = sub.add_parser("vocab-diff", help="compare two vocabulary files")
    p.add_argument("vocab_a")
    p.add_argument("vocab_b")
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--words", help="file of words to contrast, one per line")
    p.add_argument("--human", action="store_true")

    p = sub.add_parser("gen-data", help="generate MLM/NSP pretraining examples")
    p.add_argument("corpus")
    p.add_argument("--vocab", required=True)
    p.add_argument("--mode", choices=["wordpiece", "unigram"], default="unigram")
    p.add_argument("--max-len", type=int, default=128)
    p.add_argument("--mask-rate", type=float, default=0.15)
    p.add_argument("--seed", type=int, default=0, help="drives NSP pairing and masking")
    p.add_argument("--no-lowercase", action="store_true")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("pretrain", help="run the MLM+NSP loop over an example file")
    p.add_argument("--examples", required=True)
    p.add_argument("--vocab", required=True, help="vocabulary file sizing the embedding table")
    p.add_argument("--init", help="checkpoint to continue from (omits fresh init)")
    p.add_argument("--hidden-dim", type=int, default=64)
    p.add_argument("--num-layers", type=int, default=2)
    p.add_argument("--num-heads", type=int, default=4)
    p.add_argument("--ff-dim", type=int, default=256)
    p.add_argument("--dropout", type=float, default=0.1)
    p.add_argument("--learning-rate", type=float, default=3e-4)
    p.add_argument("--warmup-steps", type=int, default=0, help="0 = 10%% of max steps")
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--max-steps", type=int, default=200)
    p.add_argument("--plateau-epsilon", type=float, default=1e-3)
    p.add_argument("--plateau-patience", type=int, default=5)
    p.add_argument("--eval-interval", type=int, default=50)
    p.add_argument("--seed", type=int, default=0, help="drives init, batch order, dropout")
    p.add_argument("-o", "--output", required=True, help="checkpoint file")
    p.add_argument("--history", help="loss history file (step<TAB>loss)")

    p = sub.add_parser("finetune", help="fine-tune a checkpoint on labeled statements")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True, help="labeled file: Y/N<TAB>statement")
    p.add_argument("--vocab", required=True)
    p.add_argument("--mode", choices=["wordpiece", "unigram"], default="unigram")
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--learning-rate", type=float, default=3e-5)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--max-len", type=int, default=0, help="0 = model max length")
    p.add_argument("--seed", type=int, default=0, help="drives shuffling and dropout")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("eval", help="accuracy of a checkpoint on labeled statements")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--mode", choices=["wordpiece", "unigram"], default="unigram")
    p.add_argument("--name", default="eval")
    p.add_argument("--max-len", type=int, default=0)
    p.add_argument("--human", action="store_true")
    p.add_argument("-o", "--output", help="write the structured report here too")

    p = sub.add_parser("pipeline", help="build-vocab, gen-data, pretrain, finetune, eval")
    p.add_argument("corpus")
    p.add_argument("--config", help="flat key-value config file")
    p.add_argument("--outdir", required=True)
    p.add_argument("--labeled", help="labeled statements file (overrides train.labeled_file)")
    p.add_argument("--seed", type=int, help="overrides the config seed; drives every stage")

    return parser


def _cmd_build_vocab(args) -> int:
    lowercase = not args.no_lowercase
    counts = word_counts(load_corpus(args.corpus, lowercase))
    if args.mode == "unigram":
        model, vocab = train_unigram(
            counts,
            args.size,
            seed_size=args.seed_size or None,
            em_iters_per_round=args.em_iters,
            keep_fraction=args.keep_fraction,
            max_piece_len=args.max_piece_len,
        )
        vocab.save(args.output)
        if args.model_out:
            model.save(args.model_out)
    else:
        vocab, merges = train_bpe(counts, args.size)
        vocab.save(args.output)
        if args.merges_out:
            merges.save(args.merges_out)
    print(f"wrote {len(vocab)} tokens to {args.output}")
    return 0


def _cmd_tokenize(args) -> int:
    tokenizer, vocab = _load_tokenizer(args.vocab, args.mode, args.char_fallback)
    lowercase = not args.no_lowercase
    for line in sys.stdin:
        sentence = normalize(line, lowercase=lowercase)
        if args.ids:
            print(",".join(str(i) for i in tokenizer.encode(sentence)))
        else:
            print(" ".join(tokenizer.tokenize(sentence)))
    return 0


def _cmd_vocab_diff(args) -> int:
    vocab_a = Vocabulary.load(args.vocab_a)
    vocab_b = Vocabulary.load(args.vocab_b)
    report = diff(vocab_a, vocab_b, args.samples)
    rows = []
    if args.words:
        with open(args.words, encoding="utf-8") as handle:
            wordlist = [w for w in (line.strip() for line in handle) if w]
        rows = contrast(vocab_a, vocab_b, wordlist)
    render = render_human if args.human else render_structured
    sys.stdout.write(render(report, rows))
    return 0


def _cmd_gen_data(args) -> int:
    tokenizer, vocab = _load_tokenizer(args.vocab, args.mode)
    lowercase = not args.no_lowercase
    token_docs = []
    for document in load_documents(args.corpus, lowercase):
        sentences = [tokenizer.encode(s) for s in document]
        sentences = [s for s in sentences if s]
        if sentences:
            token_docs.append(sentences)
    examples = generate_examples(
        token_docs, vocab, max_len=args.max_len, seed=args.seed, mask_rate=args.mask_rate
    )
    write_examples(args.output, examples, args.max_len)
    print(f"wrote {len(examples)} examples to {args.output}")
    return 0


def _cmd_pretrain(args) -> int:
    if args.init:
        weights = EncoderWeights.load(args.init)
    else:
        vocab = Vocabulary.load(args.vocab)
        config = ModelConfig(
            vocab_size=len(vocab),
            hidden_dim=args.hidden_dim,
            num_layers=args.num_layers,
            num_heads=args.num_heads,
            ff_dim=args.ff_dim,
            max_len=read_example_header(args.examples),
            dropout_rate=args.dropout,
            seed=args.seed,
        )
        weights = init_weights(config)
    train_config = TrainConfig(
        learning_rate=args.learning_rate,
        warmup_steps=args.warmup_steps or None,
        batch_size=args.batch_size,
        max_steps=args.max_steps,
        plateau_epsilon=args.plateau_epsilon,
        plateau_patience=args.plateau_patience,
        eval_interval=args.eval_interval,
        seed=args.seed,
    )
    weights, history = pretrain(weights, args.examples, train_config)
    weights.save(args.output)
    if args.history:
        save_loss_history(args.history, history)
    print(f"pretrained {len(history) - 1} evaluations; final eval loss {history[-1][1]:.6f}")
    return 0


def _cmd_finetune(args) -> int:
    weights = EncoderWeights.load(args.checkpoint)
    tokenizer, _ = _load_tokenizer(args.vocab, args.mode)
    labeled = load_labeled(args.data)
    config = TrainConfig(
        learning_rate=args.learning_rate,
        batch_size=args.batch_size,
        epochs=args.epochs,
        seed=args.seed,
    )
    tuned = finetune(weights, labeled, config, tokenizer, max_len=args.max_len or None)
    tuned.save(args.output)
    print(f"finetuned on {len(labeled)} examples for {args.epochs} epochs")
    return 0


def _cmd_eval(args) -> int:
    weights = EncoderWeights.load(args.checkpoint)
    tokenizer, _ = _load_tokenizer(args.vocab, args.mode)
    labeled = load_labeled(args.data)
    report = evaluate(weights, labeled, tokenizer, dataset_name=args.name, max_len=args.max_len or None)
    text = render_report(report)
    sys.stdout.write(text)
    if args.human:
        sys.stdout.write(render_accuracy_table([(args.name, report.accuracy, None)], human=True))
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    return 0


def _cmd_pipeline(args) -> int:
    config = parse_config_file(args.config) if args.config else {
        key: default for key, (_, default) in CONFIG_SCHEMA.items()
    }
    if args.seed is not None:
        config["seed"] = args.seed
    if args.labeled:
        config["train.labeled_file"] = args.labeled
    if not config["train.labeled_file"]:
        raise ConfigError("pipeline needs labeled data (--labeled or train.labeled_file)")

    # Validate both model and training configs before writing anything.
    seed = config["seed"]
    model_kwargs = dict(
        hidden_dim=config["model.hidden_dim"],
        num_layers=config["model.num_layers"],
        num_heads=config["model.num_heads"],
        ff_dim=config["model.ff_dim"],
        max_len=config["data.max_len"],
        dropout_rate=config["model.dropout_rate"],
        seed=seed,
    )
    ModelConfig(vocab_size=5, **model_kwargs)
    pretrain_config = TrainConfig(
        learning_rate=config["pretrain.learning_rate"],
        warmup_steps=config["pretrain.warmup_steps"] or None,
        batch_size=config["pretrain.batch_size"],
        max_steps=config["pretrain.max_steps"],
        plateau_epsilon=config["pretrain.plateau_epsilon"],
        plateau_patience=config["pretrain.plateau_patience"],
        eval_interval=config["pretrain.eval_interval"],
        weight_decay=config["pretrain.weight_decay"],
        seed=seed,
    )
    finetune_config = TrainConfig(
        learning_rate=config["finetune.learning_rate"],
        warmup_steps=config["finetune.warmup_steps"] or None,
        batch_size=config["finetune.batch_size"],
        epochs=config["finetune.epochs"],
        weight_decay=config["finetune.weight_decay"],
        seed=seed,
    )
    labeled = load_labeled(config["train.labeled_file"])
    lowercase = config["corpus.lowercase"]

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    # Stage 1: vocabulary induction.
    counts = word_counts(load_corpus(args.corpus, lowercase))
    save_word_counts(outdir / "word_counts.tsv", counts)
    if config["vocab.mode"] == "unigram":
        model, vocab = train_unigram(
            counts,
            config["vocab.size"],
            seed_size=config["vocab.seed_size"] or None,
            em_iters_per_round=config["vocab.em_iters_per_round"],
            keep_fraction=config["vocab.keep_fraction"],
            max_piece_len=config["vocab.max_piece_len"],
        )
        model.save(outdir / "unigram_model.tsv")
        tokenizer = UnigramTokenizer(model, vocab)
    else:
        vocab, merges = train_bpe(counts, config["vocab.size"])
        merges.save(outdir / "merges.txt")
        tokenizer = WordPieceTokenizer(vocab, char_fallback=config["tokenizer.char_fallback"])
    vocab.save(outdir / "vocab.txt")

    # Stage 2: pretraining data.
    token_docs = []
    for document in load_documents(args.corpus, lowercase):
        sentences = [tokenizer.encode(s) for s in document]
        sentences = [s for s in sentences if s]
        if sentences:
            token_docs.append(sentences)
    examples = generate_examples(
        token_docs, vocab, max_len=config["data.max_len"], seed=seed,
        mask_rate=config["data.mask_rate"],
    )
    examples_path = outdir / "examples.tsv"
    write_examples(examples_path, examples, config["data.max_len"])

    # Stage 3: pretraining.
    weights = init_weights(ModelConfig(vocab_size=len(vocab), **model_kwargs))
    weights, history = pretrain(weights, examples_path, pretrain_config)
    save_loss_history(outdir / "loss_history.tsv", history)
    weights.save(outdir / "pretrained.ckpt")

    # Stages 4-5: fine-tune on the split, evaluate on the held-out part.
    train, validation = split_data(labeled, config["train.train_fraction"], seed)
    classify_len = config["finetune.max_len"] or config["data.max_len"]
    tuned = finetune(weights, train, finetune_config, tokenizer, max_len=classify_len)
    tuned.save(outdir / "finetuned.ckpt")
    report = evaluate(tuned, validation, tokenizer, dataset_name="validation", max_len=classify_len)
    (outdir / "eval_report.tsv").write_text(render_report(report), encoding="utf-8")
    (outdir / "accuracy_table.tsv").write_text(
        render_accuracy_table([("encoder", report.accuracy, None)]), encoding="utf-8"
    )
    print(f"pipeline complete: validation accuracy {report.accuracy:.4f} ({outdir})")
    return 0


_COMMANDS = {
    "build-vocab": _cmd_build_vocab,
    "tokenize": _cmd_tokenize,
    "vocab-diff": _cmd_vocab_diff,
    "gen-data": _cmd_gen_data,
    "pretrain": _cmd_pretrain,
    "finetune": _cmd_finetune,
    "eval": _cmd_eval,
    "pipeline": _cmd_pipeline,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        print(parser.format_usage(), end="", file=sys.stderr)
        return 1
    except (LexpieceError, FileNotFoundError, IsADirectoryError, PermissionError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except SystemExit as err:  # argparse -h/--version
        code = err.code
        return int(code) if code is not None else 0


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
