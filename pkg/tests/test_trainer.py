import random

import numpy as np
import pytest

from lexpiece.errors import (
    DatasetTooSmallError,
    EmptyDatasetError,
    InvalidConfigError,
    LengthMismatchError,
)
from lexpiece.model import ModelConfig, init_weights
from lexpiece.pretrain_data import generate_examples, write_examples
from lexpiece.tokenizer import WordPieceTokenizer
from lexpiece.trainer import (
    AdamW,
    EvalReport,
    LabeledExample,
    PlateauStopper,
    TrainConfig,
    encode_labeled,
    evaluate,
    finetune,
    load_labeled,
    load_loss_history,
    pretrain,
    render_accuracy_table,
    render_report,
    save_labeled,
    save_loss_history,
    split_data,
)
from lexpiece.vocab import Vocabulary


def small_vocab(n=40):
    return Vocabulary.from_pieces([f"t{i}" for i in range(n)])


def example_file(tmp_path, vocab, n_docs=4, sentences=4, max_len=16, seed=0):
    rng = random.Random(seed)
    docs = [
        [[rng.randrange(5, len(vocab)) for _ in range(6)] for _ in range(sentences)]
        for _ in range(n_docs)
    ]
    examples = generate_examples(docs, vocab, max_len=max_len, seed=seed)
    path = tmp_path / "examples.tsv"
    write_examples(path, examples, max_len)
    return path, examples


class TestTrainConfig:
    def test_defaults_valid(self):
        TrainConfig()

    def test_rejects_bad_values(self):
        with pytest.raises(InvalidConfigError):
            TrainConfig(learning_rate=0)
        with pytest.raises(InvalidConfigError):
            TrainConfig(plateau_epsilon=0)
        with pytest.raises(InvalidConfigError):
            TrainConfig(plateau_epsilon=1.5)
        with pytest.raises(InvalidConfigError):
            TrainConfig(epochs=-1)

    def test_zero_epochs_allowed(self):
        assert TrainConfig(epochs=0).epochs == 0


class TestPlateauStopper:
    def test_stops_after_patience_stalled_evaluations(self):
        stopper = PlateauStopper(epsilon=0.01, patience=2)
        assert not stopper.update(1.0)      # baseline
        assert not stopper.update(0.5)      # 50% improvement
        assert not stopper.update(0.4999)   # 0.02% -> stalled 1
        assert stopper.update(0.49985)      # stalled 2 -> stop

    def test_improvement_resets_counter(self):
        stopper = PlateauStopper(epsilon=0.05, patience=2)
        stopper.update(1.0)
        assert not stopper.update(0.999)  # stalled 1
        assert not stopper.update(0.5)    # big improvement resets
        assert not stopper.update(0.499)  # stalled 1
        assert stopper.update(0.4989)     # stalled 2

    def test_degenerate_epsilon_one_stops_at_first_window(self):
        stopper = PlateauStopper(epsilon=1.0, patience=3)
        values = [1.0, 0.9, 0.8, 0.7, 0.6]
        fired = [stopper.update(v) for v in values]
        assert fired == [False, False, False, True, True]

    def test_worsening_loss_counts_as_stalled(self):
        stopper = PlateauStopper(epsilon=0.01, patience=2)
        stopper.update(1.0)
        assert not stopper.update(1.5)
        assert stopper.update(2.0)


class TestAdamW:
    def test_updates_parameters(self):
        arrays = {"w": np.ones((2, 2)), "b": np.zeros(2)}
        grads = {"w": np.ones((2, 2)), "b": np.ones(2)}
        optimizer = AdamW(0.1, warmup_steps=1, weight_decay=0.0)
        optimizer.step(arrays, grads)
        assert np.all(arrays["w"] < 1.0)
        assert np.all(arrays["b"] < 0.0)

    def test_warmup_scales_first_step(self):
        a1 = {"w": np.ones(3)}
        a2 = {"w": np.ones(3)}
        g = {"w": np.full(3, 2.0)}
        AdamW(0.1, warmup_steps=1).step(a1, g)
        AdamW(0.1, warmup_steps=10).step(a2, g)
        d1 = np.abs(1.0 - a1["w"]).mean()
        d2 = np.abs(1.0 - a2["w"]).mean()
        assert d2 == pytest.approx(d1 / 10, rel=1e-6)

    def test_weight_decay_only_on_matrices(self):
        arrays = {"w": np.full((2, 2), 5.0), "b": np.full(2, 5.0)}
        grads = {"w": np.zeros((2, 2)), "b": np.zeros(2)}
        AdamW(0.1, warmup_steps=1, weight_decay=0.5).step(arrays, grads)
        assert np.all(arrays["w"] < 5.0)
        assert np.all(arrays["b"] == 5.0)


class TestSplitData:
    def test_ninety_ten_split_sizes(self):
        train, val = split_data(list(range(5000)), 0.9, seed=1)
        assert (len(train), len(val)) == (4500, 500)

    def test_small_dataset(self):
        train, val = split_data(list(range(10)), 0.9, seed=1)
        assert (len(train), len(val)) == (9, 1)

    def test_deterministic(self):
        data = list(range(100))
        assert split_data(data, 0.8, seed=5) == split_data(data, 0.8, seed=5)
        assert split_data(data, 0.8, seed=5) != split_data(data, 0.8, seed=6)

    def test_disjoint_union(self):
        data = [f"x{i}" for i in range(37)]
        train, val = split_data(data, 0.7, seed=2)
        assert sorted(train + val) == sorted(data)
        assert not set(train) & set(val)

    def test_too_small(self):
        with pytest.raises(DatasetTooSmallError):
            split_data([1], 0.9, seed=0)

    def test_invalid_fraction(self):
        with pytest.raises(InvalidConfigError):
            split_data([1, 2], 1.0, seed=0)


class TestPretrain:
    def test_loss_decreases_on_synthetic_corpus(self, tmp_path):
        vocab = small_vocab()
        path, _ = example_file(tmp_path, vocab, n_docs=8, sentences=6)
        config = ModelConfig(vocab_size=len(vocab), hidden_dim=32, num_layers=1,
                             num_heads=2, ff_dim=64, max_len=16, dropout_rate=0.0, seed=0)
        weights = init_weights(config)
        train_config = TrainConfig(learning_rate=1e-3, batch_size=16, max_steps=60,
                                   eval_interval=20, plateau_epsilon=1e-6,
                                   plateau_patience=50, seed=0)
        tuned, history = pretrain(weights, path, train_config)
        assert history[0][0] == 0
        assert history[-1][1] < history[0][1]
        assert not np.array_equal(tuned.arrays["token_embedding"],
                                  weights.arrays["token_embedding"])

    def test_length_mismatch(self, tmp_path):
        vocab = small_vocab()
        path, _ = example_file(tmp_path, vocab, max_len=16)
        config = ModelConfig(vocab_size=len(vocab), hidden_dim=8, num_layers=1,
                             num_heads=2, ff_dim=16, max_len=32, seed=0)
        with pytest.raises(LengthMismatchError):
            pretrain(init_weights(config), path, TrainConfig())

    def test_plateau_stops_early(self, tmp_path):
        vocab = small_vocab()
        path, _ = example_file(tmp_path, vocab)
        config = ModelConfig(vocab_size=len(vocab), hidden_dim=8, num_layers=1,
                             num_heads=2, ff_dim=16, max_len=16, dropout_rate=0.0, seed=0)
        train_config = TrainConfig(learning_rate=1e-5, batch_size=8, max_steps=1000,
                                   eval_interval=5, plateau_epsilon=1.0,
                                   plateau_patience=3, seed=0)
        _, history = pretrain(init_weights(config), path, train_config)
        # baseline eval + patience evaluations, far below max_steps
        assert len(history) == 1 + 3

    def test_deterministic(self, tmp_path):
        vocab = small_vocab()
        path, _ = example_file(tmp_path, vocab)
        config = ModelConfig(vocab_size=len(vocab), hidden_dim=16, num_layers=1,
                             num_heads=2, ff_dim=32, max_len=16, dropout_rate=0.1, seed=2)
        train_config = TrainConfig(learning_rate=1e-3, batch_size=8, max_steps=20,
                                   eval_interval=10, seed=3)
        w1, h1 = pretrain(init_weights(config), path, train_config)
        w2, h2 = pretrain(init_weights(config), path, train_config)
        assert h1 == h2
        for name in w1.arrays:
            assert np.array_equal(w1.arrays[name], w2.arrays[name])


def separable_dataset(n, seed):
    # all words stay inside the conftest corpus alphabet so unigram
    # tokenizers trained on that corpus can always segment them
    yes_kw = ["lawful", "valid", "permitted", "allowed"]
    no_kw = ["unlawful", "void", "refused", "denied"]
    filler = ["the", "claim", "is", "under", "this", "act", "court", "holds"]
    rng = random.Random(seed)
    data = []
    for _ in range(n):
        words = [rng.choice(filler) for _ in range(rng.randint(3, 6))]
        if rng.random() < 0.5:
            keyword, label = rng.choice(yes_kw), "yes"
        else:
            keyword, label = rng.choice(no_kw), "no"
        words.insert(rng.randrange(len(words) + 1), keyword)
        data.append(LabeledExample(" ".join(words), label))
    vocab = Vocabulary.from_pieces(sorted(set(yes_kw + no_kw + filler)))
    return data, WordPieceTokenizer(vocab)


class TestFinetune:
    def _config(self, vocab_size, seed=0):
        return ModelConfig(vocab_size=vocab_size, hidden_dim=32, num_layers=2,
                           num_heads=2, ff_dim=64, max_len=12, dropout_rate=0.0, seed=seed)

    def test_zero_epochs_returns_unchanged_copy(self):
        data, tokenizer = separable_dataset(10, seed=1)
        weights = init_weights(self._config(len(tokenizer.vocab)))
        tuned = finetune(weights, data, TrainConfig(epochs=0), tokenizer)
        assert tuned is not weights
        for name in weights.arrays:
            assert np.array_equal(tuned.arrays[name], weights.arrays[name])

    def test_empty_dataset(self):
        data, tokenizer = separable_dataset(4, seed=1)
        weights = init_weights(self._config(len(tokenizer.vocab)))
        with pytest.raises(EmptyDatasetError):
            finetune(weights, [], TrainConfig(), tokenizer)

    def test_same_seed_identical_weights(self):
        data, tokenizer = separable_dataset(64, seed=2)
        weights = init_weights(self._config(len(tokenizer.vocab)))
        config = TrainConfig(learning_rate=1e-3, batch_size=16, epochs=2, seed=9)
        t1 = finetune(weights, data, config, tokenizer, max_len=12)
        t2 = finetune(weights, data, config, tokenizer, max_len=12)
        for name in t1.arrays:
            assert np.array_equal(t1.arrays[name], t2.arrays[name])

    def test_learns_separable_task_small(self):
        data, tokenizer = separable_dataset(400, seed=3)
        train, val = split_data(data, 0.9, seed=3)
        weights = init_weights(self._config(len(tokenizer.vocab), seed=4))
        config = TrainConfig(learning_rate=1e-3, batch_size=32, epochs=5, seed=3)
        tuned = finetune(weights, train, config, tokenizer, max_len=12)
        report = evaluate(tuned, val, tokenizer, max_len=12)
        assert report.accuracy >= 0.9


class TestEvaluate:
    def _always_yes_weights(self, vocab_size):
        config = ModelConfig(vocab_size=vocab_size, hidden_dim=8, num_layers=1,
                             num_heads=2, ff_dim=16, max_len=12, seed=0)
        weights = init_weights(config)
        weights.arrays["classifier_weight"][:] = 0.0
        weights.arrays["classifier_bias"][:] = [-10.0, 10.0]
        return weights

    def test_all_correct_gives_accuracy_one(self):
        data, tokenizer = separable_dataset(20, seed=5)
        data = [LabeledExample(ex.text, "yes") for ex in data]
        weights = self._always_yes_weights(len(tokenizer.vocab))
        report = evaluate(weights, data, tokenizer, dataset_name="all-yes", max_len=12)
        assert report.accuracy == 1.0
        assert report.n_correct == report.n_examples == 20

    def test_accuracy_identity(self):
        data, tokenizer = separable_dataset(40, seed=6)
        weights = self._always_yes_weights(len(tokenizer.vocab))
        report = evaluate(weights, data, tokenizer, max_len=12)
        assert report.accuracy == report.n_correct / report.n_examples
        assert report.n_correct == sum(1 for ex in data if ex.label == "yes")

    def test_empty_dataset(self):
        data, tokenizer = separable_dataset(4, seed=1)
        weights = self._always_yes_weights(len(tokenizer.vocab))
        with pytest.raises(EmptyDatasetError):
            evaluate(weights, [], tokenizer)

    def test_structure_of_112_statement_file(self, tmp_path):
        data, tokenizer = separable_dataset(112, seed=8)
        path = tmp_path / "test112.tsv"
        save_labeled(path, data)
        loaded = load_labeled(path)
        weights = self._always_yes_weights(len(tokenizer.vocab))
        report = evaluate(weights, loaded, tokenizer, dataset_name="test", max_len=12)
        assert report.n_examples == 112


class TestEncodeLabeled:
    def test_layout(self):
        data, tokenizer = separable_dataset(3, seed=7)
        ids, segments, mask, labels = encode_labeled(data, tokenizer, max_len=12)
        vocab = tokenizer.vocab
        assert ids.shape == (3, 12)
        for row in range(3):
            length = int(mask[row].sum())
            assert ids[row, 0] == vocab.cls_id
            assert ids[row, length - 1] == vocab.sep_id
            assert np.all(ids[row, length:] == vocab.pad_id)
        assert np.all(segments == 0)
        assert set(labels) <= {0, 1}


class TestReportsAndFiles:
    def test_render_report_structured(self):
        text = render_report(EvalReport("validation", 8, 6, 0.75))
        lines = text.splitlines()
        assert lines[0] == "dataset_name\tvalidation"
        assert lines[1] == "n_examples\t8"
        assert lines[2] == "n_correct\t6"
        assert lines[3].startswith("accuracy\t0.75")

    def test_accuracy_table_shape(self):
        rows = [("baseline", 0.5, 0.25), ("domain", 0.625, None)]
        text = render_accuracy_table(rows)
        lines = text.splitlines()
        assert lines[0] == "Model\tValidation Accuracy\tTest Accuracy"
        assert lines[1] == "baseline\t0.5000\t0.2500"
        assert lines[2] == "domain\t0.6250\t-"
        human = render_accuracy_table(rows, human=True)
        assert "Validation Accuracy" in human and "baseline" in human

    def test_loss_history_round_trip(self, tmp_path):
        history = [(0, 4.5), (10, 3.25), (20, 2.125)]
        path = tmp_path / "history.tsv"
        save_loss_history(path, history)
        assert load_loss_history(path) == history

    def test_labeled_round_trip(self, tmp_path):
        examples = [LabeledExample("the claim is valid", "yes"),
                    LabeledExample("the claim is void", "no")]
        path = tmp_path / "labeled.tsv"
        save_labeled(path, examples)
        assert path.read_text(encoding="utf-8").splitlines()[0] == "Y\tthe claim is valid"
        assert load_labeled(path) == examples

    def test_labeled_bad_line(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("X\toops\n", encoding="utf-8")
        with pytest.raises(InvalidConfigError):
            load_labeled(path)
