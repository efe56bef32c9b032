"""Sklearn-style classifier wrapping the encoder fine-tuning loop."""

from __future__ import annotations

import numpy as np

from .errors import EmptyDatasetError
from .model import EncoderWeights, ModelConfig, init_weights
from .trainer import LabeledExample, TrainConfig, finetune, predict_labels

try:
    from sklearn.base import BaseEstimator, ClassifierMixin
    from sklearn.exceptions import NotFittedError
except ImportError:  # pragma: no cover
    BaseEstimator = ClassifierMixin = object

    class NotFittedError(RuntimeError):
        pass


class EncoderClassifier(BaseEstimator, ClassifierMixin):
    """Binary yes/no statement classifier.

    ``X`` is a sequence of normalized statements, ``y`` a sequence of
    ``"yes"``/``"no"`` labels. Training starts from ``pretrained_weights``
    when given, otherwise from a fresh seeded init of ``model_config``.
    """

    def __init__(
        self,
        tokenizer,
        model_config: ModelConfig | None = None,
        train_config: TrainConfig | None = None,
        pretrained_weights: EncoderWeights | None = None,
        max_len: int | None = None,
    ):
        self.tokenizer = tokenizer
        self.model_config = model_config
        self.train_config = train_config
        self.pretrained_weights = pretrained_weights
        self.max_len = max_len

    def fit(self, X, y):
        statements = list(X)
        labels = list(y)
        if len(statements) != len(labels):
            raise EmptyDatasetError("fit: X and y lengths differ")
        train_config = self.train_config or TrainConfig()
        if self.pretrained_weights is not None:
            start = self.pretrained_weights
        else:
            if self.model_config is None:
                raise EmptyDatasetError("fit: need model_config or pretrained_weights")
            start = init_weights(self.model_config)
        examples = [LabeledExample(text, label) for text, label in zip(statements, labels)]
        self.weights_ = finetune(start, examples, train_config, self.tokenizer, self.max_len)
        self.classes_ = np.array(["no", "yes"])
        return self

    def predict(self, X):
        if not hasattr(self, "weights_"):
            raise NotFittedError("EncoderClassifier is not fitted yet")
        return np.array(predict_labels(self.weights_, list(X), self.tokenizer, self.max_len))
