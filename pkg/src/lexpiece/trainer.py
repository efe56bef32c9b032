"""Training loops: MLM+NSP pretraining with plateau stopping, supervised
fine-tuning on yes/no statements, data splitting, and accuracy reports.

The optimizer is Adam with decoupled weight decay (applied to matrices
only) and a linear warmup-then-constant learning-rate schedule.
Pretraining evaluates on a held-in sample every ``eval_interval`` steps
and stops once the relative improvement of the evaluation loss stays
below ``plateau_epsilon`` for ``plateau_patience`` consecutive
evaluations, or at ``max_steps``.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._validation import check_fraction, check_positive
from .errors import (
    DatasetTooSmallError,
    EmptyDatasetError,
    InvalidConfigError,
    LengthMismatchError,
    NonFiniteLossError,
)
from .model import (
    Batch,
    EncoderWeights,
    classify_forward,
    classify_loss_and_grads,
    loss as pretrain_loss,
    forward,
    pretrain_loss_and_grads,
)
from .pretrain_data import read_example_header, read_examples

logger = logging.getLogger(__name__)

LABEL_YES = "yes"
LABEL_NO = "no"
_LABEL_TO_INDEX = {LABEL_NO: 0, LABEL_YES: 1}
_LETTER_TO_LABEL = {"Y": LABEL_YES, "N": LABEL_NO}
_LABEL_TO_LETTER = {LABEL_YES: "Y", LABEL_NO: "N"}

#: Cap on the number of examples scored per pretraining evaluation.
EVAL_SAMPLE_CAP = 512


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 3e-5
    warmup_steps: int | None = None  # None: 10% of the planned steps
    batch_size: int = 32
    max_steps: int = 1000
    plateau_epsilon: float = 1e-3
    plateau_patience: int = 5
    epochs: int = 5
    seed: int = 0
    eval_interval: int = 50
    weight_decay: float = 0.01

    def __post_init__(self):
        check_positive("learning_rate", self.learning_rate)
        check_positive("batch_size", self.batch_size)
        check_positive("max_steps", self.max_steps)
        check_positive("plateau_patience", self.plateau_patience)
        check_positive("eval_interval", self.eval_interval)
        check_fraction("plateau_epsilon", self.plateau_epsilon, inclusive_high=True)
        if self.epochs < 0:
            raise InvalidConfigError(f"epochs must be >= 0, got {self.epochs}")
        if self.warmup_steps is not None:
            check_positive("warmup_steps", self.warmup_steps)
        if self.weight_decay < 0:
            raise InvalidConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")


@dataclass(frozen=True)
class LabeledExample:
    """One statement with its yes/no label."""

    text: str
    label: str

    def __post_init__(self):
        if self.label not in (LABEL_YES, LABEL_NO):
            raise InvalidConfigError(f"label must be {LABEL_YES!r} or {LABEL_NO!r}, got {self.label!r}")


@dataclass(frozen=True)
class EvalReport:
    dataset_name: str
    n_examples: int
    n_correct: int
    accuracy: float


class AdamW:
    """Adam with decoupled weight decay and linear warmup."""

    def __init__(self, learning_rate: float, warmup_steps: int, weight_decay: float = 0.01,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.learning_rate = learning_rate
        self.warmup_steps = max(1, warmup_steps)
        self.weight_decay = weight_decay
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.step_count = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self, arrays: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.step_count += 1
        lr = self.learning_rate * min(1.0, self.step_count / self.warmup_steps)
        b1, b2 = self.beta1, self.beta2
        for name, grad in grads.items():
            m = self._m.setdefault(name, np.zeros_like(grad))
            v = self._v.setdefault(name, np.zeros_like(grad))
            m *= b1
            m += (1 - b1) * grad
            v *= b2
            v += (1 - b2) * grad * grad
            m_hat = m / (1 - b1 ** self.step_count)
            v_hat = v / (1 - b2 ** self.step_count)
            update = m_hat / (np.sqrt(v_hat) + self.eps)
            if self.weight_decay > 0 and grad.ndim >= 2:  # no decay on biases/norms
                update = update + self.weight_decay * arrays[name]
            arrays[name] -= lr * update


class PlateauStopper:
    """Fires after ``patience`` consecutive evaluations whose relative
    improvement over the best loss so far is below ``epsilon``."""

    def __init__(self, epsilon: float, patience: int):
        check_fraction("plateau_epsilon", epsilon, inclusive_high=True)
        check_positive("plateau_patience", patience)
        self.epsilon = epsilon
        self.patience = patience
        self.best: float | None = None
        self.stalled = 0

    def update(self, value: float) -> bool:
        if self.best is None:
            self.best = value
            return False
        improvement = (self.best - value) / max(abs(self.best), 1e-12)
        if improvement < self.epsilon:
            self.stalled += 1
        else:
            self.stalled = 0
        if value < self.best:
            self.best = value
        return self.stalled >= self.patience


def split_data(dataset, train_fraction: float, seed: int):
    """Deterministic shuffle-split; |train| = round(train_fraction * N)."""
    check_fraction("train_fraction", train_fraction)
    data = list(dataset)
    if len(data) < 2:
        raise DatasetTooSmallError(f"split_data: need at least 2 examples, got {len(data)}")
    indices = list(range(len(data)))
    random.Random(seed).shuffle(indices)
    n_train = round(train_fraction * len(data))
    train = [data[i] for i in indices[:n_train]]
    validation = [data[i] for i in indices[n_train:]]
    return train, validation


def _batches(n: int, batch_size: int):
    for start in range(0, n, batch_size):
        yield range(start, min(start + batch_size, n))


def _eval_loss(weights: EncoderWeights, examples, batch_size: int) -> float:
    sample = examples[:EVAL_SAMPLE_CAP]
    total, count = 0.0, 0
    for rows in _batches(len(sample), batch_size):
        batch = Batch.from_examples([sample[i] for i in rows])
        mlm_logits, nsp_logits, _ = forward(weights, batch)
        total += pretrain_loss(mlm_logits, nsp_logits, batch) * len(rows)
        count += len(rows)
    return total / count


def pretrain(weights: EncoderWeights, example_file: str | Path, config: TrainConfig):
    """Run the MLM+NSP loop over an example file.

    Returns (new weights, loss history) where history holds one
    ``(step, eval_loss)`` entry per evaluation, starting at step 0.
    """
    file_len = read_example_header(example_file)
    if file_len != weights.config.max_len:
        raise LengthMismatchError(
            f"pretrain: example file max_len {file_len} != model max_len {weights.config.max_len}"
        )
    examples = read_examples(example_file)
    if not examples:
        raise EmptyDatasetError("pretrain: example file holds no records")

    weights = weights.copy()
    warmup = config.warmup_steps or max(1, config.max_steps // 10)
    optimizer = AdamW(config.learning_rate, warmup, config.weight_decay)
    stopper = PlateauStopper(config.plateau_epsilon, config.plateau_patience)
    order_rng = random.Random(config.seed)
    dropout_rng = np.random.Generator(np.random.PCG64(config.seed))
    use_dropout = weights.config.dropout_rate > 0

    history: list[tuple[int, float]] = [(0, _eval_loss(weights, examples, config.batch_size))]
    stopper.update(history[0][1])

    order: list[int] = []
    step = 0
    while step < config.max_steps:
        while len(order) < config.batch_size:
            refill = list(range(len(examples)))
            order_rng.shuffle(refill)
            order.extend(refill)
        rows = order[: config.batch_size]
        del order[: config.batch_size]
        batch = Batch.from_examples([examples[i] for i in rows])
        value, grads = pretrain_loss_and_grads(
            weights, batch, train=use_dropout, rng=dropout_rng if use_dropout else None
        )
        if not math.isfinite(value):
            raise NonFiniteLossError(step)
        optimizer.step(weights.arrays, grads)
        step += 1
        if step % config.eval_interval == 0:
            eval_value = _eval_loss(weights, examples, config.batch_size)
            history.append((step, eval_value))
            logger.info("pretrain step %d eval_loss %.6f", step, eval_value)
            if stopper.update(eval_value):
                logger.info("pretrain: loss plateau reached at step %d", step)
                break
    return weights, history


def encode_labeled(examples, tokenizer, max_len: int):
    """Encode statements as single-segment batch arrays: [CLS] ids [SEP]."""
    vocab = tokenizer.vocab
    n = len(examples)
    ids = np.full((n, max_len), vocab.pad_id, dtype=np.int64)
    mask = np.zeros((n, max_len), dtype=np.int64)
    labels = np.zeros(n, dtype=np.int64)
    for row, example in enumerate(examples):
        tokens = tokenizer.encode(example.text)[: max_len - 2]
        seq = [vocab.cls_id] + tokens + [vocab.sep_id]
        ids[row, : len(seq)] = seq
        mask[row, : len(seq)] = 1
        labels[row] = _LABEL_TO_INDEX[example.label]
    segments = np.zeros((n, max_len), dtype=np.int64)
    return ids, segments, mask, labels


def finetune(
    weights: EncoderWeights,
    labeled_train,
    config: TrainConfig,
    tokenizer,
    max_len: int | None = None,
) -> EncoderWeights:
    """Exactly ``config.epochs`` passes of classification cross-entropy.

    Deterministic under ``config.seed``; zero epochs returns an untouched
    copy of the weights.
    """
    labeled_train = list(labeled_train)
    if not labeled_train:
        raise EmptyDatasetError("finetune: empty training set")
    weights = weights.copy()
    if config.epochs == 0:
        return weights

    max_len = max_len or weights.config.max_len
    ids, segments, mask, labels = encode_labeled(labeled_train, tokenizer, max_len)
    n = len(labeled_train)
    steps_per_epoch = math.ceil(n / config.batch_size)
    total_steps = config.epochs * steps_per_epoch
    warmup = config.warmup_steps or max(1, round(0.1 * total_steps))
    optimizer = AdamW(config.learning_rate, warmup, config.weight_decay)
    order_rng = random.Random(config.seed)
    dropout_rng = np.random.Generator(np.random.PCG64(config.seed))
    use_dropout = weights.config.dropout_rate > 0

    for epoch in range(config.epochs):
        order = list(range(n))
        order_rng.shuffle(order)
        epoch_loss = 0.0
        for rows in _batches(n, config.batch_size):
            chosen = [order[i] for i in rows]
            batch = Batch(
                input_ids=ids[chosen],
                segment_ids=segments[chosen],
                attention_mask=mask[chosen],
                class_labels=labels[chosen],
            )
            value, grads = classify_loss_and_grads(
                weights, batch, train=use_dropout, rng=dropout_rng if use_dropout else None
            )
            if not math.isfinite(value):
                raise NonFiniteLossError(optimizer.step_count)
            optimizer.step(weights.arrays, grads)
            epoch_loss += value * len(chosen)
        logger.info("finetune epoch %d mean_loss %.6f", epoch + 1, epoch_loss / n)
    return weights


def predict_labels(weights: EncoderWeights, statements, tokenizer, max_len: int | None = None,
                   batch_size: int = 64) -> list[str]:
    """Argmax yes/no predictions for raw statements."""
    max_len = max_len or weights.config.max_len
    examples = [LabeledExample(text, LABEL_NO) for text in statements]
    ids, segments, mask, _ = encode_labeled(examples, tokenizer, max_len)
    out: list[str] = []
    for rows in _batches(len(examples), batch_size):
        sel = list(rows)
        batch = Batch(input_ids=ids[sel], segment_ids=segments[sel], attention_mask=mask[sel])
        logits = classify_forward(weights, batch)
        out.extend(LABEL_YES if k == 1 else LABEL_NO for k in logits.argmax(-1))
    return out


def evaluate(
    weights: EncoderWeights,
    labeled_set,
    tokenizer,
    dataset_name: str = "eval",
    max_len: int | None = None,
    batch_size: int = 64,
) -> EvalReport:
    """Accuracy of argmax predictions over a labeled set."""
    labeled_set = list(labeled_set)
    if not labeled_set:
        raise EmptyDatasetError("evaluate: empty dataset")
    predictions = predict_labels(
        weights, [ex.text for ex in labeled_set], tokenizer, max_len, batch_size
    )
    n_correct = sum(1 for ex, pred in zip(labeled_set, predictions) if ex.label == pred)
    return EvalReport(dataset_name, len(labeled_set), n_correct, n_correct / len(labeled_set))


def render_report(report: EvalReport) -> str:
    """Structured ``key<TAB>value`` form of an EvalReport."""
    return (
        f"dataset_name\t{report.dataset_name}\n"
        f"n_examples\t{report.n_examples}\n"
        f"n_correct\t{report.n_correct}\n"
        f"accuracy\t{report.accuracy!r}\n"
    )


def render_accuracy_table(rows, human: bool = False) -> str:
    """Comparison table: one row per model, validation and test accuracy
    columns. ``rows`` holds (model_name, validation_accuracy,
    test_accuracy) triples; None renders as ``-``."""

    def fmt(value):
        return "-" if value is None else f"{value:.4f}"

    if human:
        width = max([len("Model")] + [len(name) for name, _, _ in rows])
        lines = [f"{'Model':<{width}}  Validation Accuracy  Test Accuracy"]
        for name, val, test in rows:
            lines.append(f"{name:<{width}}  {fmt(val):>19}  {fmt(test):>13}")
        return "\n".join(lines) + "\n"
    lines = ["Model\tValidation Accuracy\tTest Accuracy"]
    for name, val, test in rows:
        lines.append(f"{name}\t{fmt(val)}\t{fmt(test)}")
    return "\n".join(lines) + "\n"


def save_loss_history(path: str | Path, history) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for step, value in history:
            handle.write(f"{step}\t{value!r}\n")


def load_loss_history(path: str | Path) -> list[tuple[int, float]]:
    history = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if not line:
                continue
            step, _, value = line.partition("\t")
            history.append((int(step), float(value)))
    return history


def save_labeled(path: str | Path, examples) -> None:
    """Write ``label<TAB>statement`` lines with labels Y/N."""
    with open(path, "w", encoding="utf-8") as handle:
        for example in examples:
            handle.write(f"{_LABEL_TO_LETTER[example.label]}\t{example.text}\n")


def load_labeled(path: str | Path) -> list[LabeledExample]:
    examples = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            letter, tab, text = line.partition("\t")
            if not tab or letter not in _LETTER_TO_LABEL:
                raise InvalidConfigError(
                    f"load_labeled: line {lineno} must be 'Y<TAB>text' or 'N<TAB>text', got {line!r}"
                )
            examples.append(LabeledExample(text, _LETTER_TO_LABEL[letter]))
    return examples
