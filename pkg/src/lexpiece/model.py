"""Desk-scale bidirectional transformer encoder with MLM/NSP/classifier heads.

Pure numpy, float64, with hand-written backward passes that are exact
gradients of the loss (verified against central finite differences in the
test suite). Architecture: token+position+segment embeddings with layer
norm, post-norm encoder blocks (multi-head scaled dot-product
self-attention, GELU feed-forward, residuals), a tanh pooler on the CLS
state, an MLM output projection tied to the token embedding table, and
two-way NSP and classification heads.

Weights live in a flat name -> array dict inside :class:`EncoderWeights`;
gradients use the same names and shapes. Checkpoints are a small custom
binary container (see :func:`save_checkpoint`) whose bytes are a pure
function of config and weights.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.special import erf

from .errors import InvalidConfigError, ShapeMismatchError

LN_EPS = 1e-12
INIT_STD = 0.02
CHECKPOINT_MAGIC = b"LXPW"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    hidden_dim: int = 64
    num_layers: int = 2
    num_heads: int = 4
    ff_dim: int = 256
    max_len: int = 128
    dropout_rate: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.vocab_size < 5:
            raise InvalidConfigError(f"vocab_size must be >= 5, got {self.vocab_size}")
        if self.num_heads < 1 or self.hidden_dim % self.num_heads != 0:
            raise InvalidConfigError(
                f"hidden_dim {self.hidden_dim} must be divisible by num_heads {self.num_heads}"
            )
        if self.max_len < 2:
            raise InvalidConfigError(f"max_len must be >= 2, got {self.max_len}")
        if self.num_layers < 1 or self.ff_dim < 1:
            raise InvalidConfigError("num_layers and ff_dim must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise InvalidConfigError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")

    @classmethod
    def base(cls, vocab_size: int, max_len: int = 128, seed: int = 0) -> "ModelConfig":
        """Full-size encoder shape (not exercised by the test suite)."""
        return cls(vocab_size, 768, 12, 12, 3072, max_len, 0.1, seed)

    @classmethod
    def desk(cls, vocab_size: int, max_len: int = 128, seed: int = 0) -> "ModelConfig":
        """Small shape suitable for CPU experiments."""
        return cls(vocab_size, 64, 2, 4, 256, max_len, 0.1, seed)


def _param_shapes(cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    V, H, F, L = cfg.vocab_size, cfg.hidden_dim, cfg.ff_dim, cfg.max_len
    shapes: dict[str, tuple[int, ...]] = {
        "token_embedding": (V, H),
        "position_embedding": (L, H),
        "segment_embedding": (2, H),
        "embedding_norm_scale": (H,),
        "embedding_norm_offset": (H,),
        "mlm_output_bias": (V,),
        "pooler_weight": (H, H),
        "pooler_bias": (H,),
        "nsp_weight": (H, 2),
        "nsp_bias": (2,),
        "classifier_weight": (H, 2),
        "classifier_bias": (2,),
    }
    for i in range(cfg.num_layers):
        p = f"layer{i}."
        for name in ("attn_query", "attn_key", "attn_value", "attn_output"):
            shapes[p + name + "_weight"] = (H, H)
            shapes[p + name + "_bias"] = (H,)
        shapes[p + "attn_norm_scale"] = (H,)
        shapes[p + "attn_norm_offset"] = (H,)
        shapes[p + "ff_inner_weight"] = (H, F)
        shapes[p + "ff_inner_bias"] = (F,)
        shapes[p + "ff_output_weight"] = (F, H)
        shapes[p + "ff_output_bias"] = (H,)
        shapes[p + "ff_norm_scale"] = (H,)
        shapes[p + "ff_norm_offset"] = (H,)
    return shapes


class EncoderWeights:
    """Named parameter arrays plus the config that defines their shapes."""

    def __init__(self, config: ModelConfig, arrays: dict[str, np.ndarray]):
        expected = _param_shapes(config)
        if set(arrays) != set(expected):
            missing = set(expected) - set(arrays)
            extra = set(arrays) - set(expected)
            raise InvalidConfigError(f"weight names mismatch (missing={missing}, extra={extra})")
        for name, array in arrays.items():
            if array.shape != expected[name]:
                raise InvalidConfigError(
                    f"{name}: shape {array.shape} != expected {expected[name]}"
                )
            if not np.all(np.isfinite(array)):
                raise InvalidConfigError(f"{name}: non-finite values")
        self.config = config
        self.arrays = arrays

    def copy(self) -> "EncoderWeights":
        return EncoderWeights(self.config, {k: v.copy() for k, v in self.arrays.items()})

    def zeros_like(self) -> dict[str, np.ndarray]:
        return {k: np.zeros_like(v) for k, v in self.arrays.items()}

    def save(self, path: str | Path) -> None:
        save_checkpoint(path, self)

    @classmethod
    def load(cls, path: str | Path) -> "EncoderWeights":
        return load_checkpoint(path)


def _truncated_normal(rng: np.random.Generator, shape: tuple[int, ...], std: float) -> np.ndarray:
    draws = rng.standard_normal(shape)
    out_of_range = np.abs(draws) > 2.0
    while out_of_range.any():
        draws[out_of_range] = rng.standard_normal(int(out_of_range.sum()))
        out_of_range = np.abs(draws) > 2.0
    return draws * std


def init_weights(config: ModelConfig) -> EncoderWeights:
    """Deterministic init: truncated normal (std 0.02, cut at 2 sigma) for
    matrices and embeddings, ones for norm scales, zeros for biases and
    offsets."""
    rng = np.random.Generator(np.random.PCG64(config.seed))
    arrays: dict[str, np.ndarray] = {}
    for name, shape in _param_shapes(config).items():
        if name.endswith("_scale"):
            arrays[name] = np.ones(shape)
        elif name.endswith(("_bias", "_offset")):
            arrays[name] = np.zeros(shape)
        else:
            arrays[name] = _truncated_normal(rng, shape, INIT_STD)
    return EncoderWeights(config, arrays)


@dataclass
class Batch:
    """Stacked examples; mlm/nsp/class fields are optional per use."""

    input_ids: np.ndarray
    segment_ids: np.ndarray
    attention_mask: np.ndarray
    mlm_positions: np.ndarray | None = None
    mlm_labels: np.ndarray | None = None
    mlm_weights: np.ndarray | None = None
    nsp_labels: np.ndarray | None = None
    class_labels: np.ndarray | None = None

    @classmethod
    def from_examples(cls, examples) -> "Batch":
        """Stack PretrainExamples; ragged mlm fields pad with weight 0."""
        width = max(1, max(len(ex.mlm_positions) for ex in examples))
        positions = np.zeros((len(examples), width), dtype=np.int64)
        labels = np.zeros((len(examples), width), dtype=np.int64)
        weights = np.zeros((len(examples), width))
        for row, ex in enumerate(examples):
            k = len(ex.mlm_positions)
            positions[row, :k] = ex.mlm_positions
            labels[row, :k] = ex.mlm_labels
            weights[row, :k] = 1.0
        return cls(
            input_ids=np.array([ex.input_ids for ex in examples], dtype=np.int64),
            segment_ids=np.array([ex.segment_ids for ex in examples], dtype=np.int64),
            attention_mask=np.array([ex.attention_mask for ex in examples], dtype=np.int64),
            mlm_positions=positions,
            mlm_labels=labels,
            mlm_weights=weights,
            nsp_labels=np.array([ex.nsp_label for ex in examples], dtype=np.int64),
        )


def _check_batch(cfg: ModelConfig, batch: Batch) -> None:
    ids = batch.input_ids
    if ids.ndim != 2:
        raise ShapeMismatchError(f"input_ids must be [B, L], got shape {ids.shape}")
    B, L = ids.shape
    if L > cfg.max_len:
        raise ShapeMismatchError(f"sequence length {L} exceeds max_len {cfg.max_len}")
    for name in ("segment_ids", "attention_mask"):
        arr = getattr(batch, name)
        if arr.shape != (B, L):
            raise ShapeMismatchError(f"{name} shape {arr.shape} != {(B, L)}")
    if ids.min() < 0 or ids.max() >= cfg.vocab_size:
        raise ShapeMismatchError("input id outside vocabulary range")
    if batch.mlm_positions is not None:
        if not (batch.mlm_positions.shape == batch.mlm_labels.shape == batch.mlm_weights.shape):
            raise ShapeMismatchError("mlm field shapes disagree")
        if batch.mlm_positions.min() < 0 or batch.mlm_positions.max() >= L:
            raise ShapeMismatchError("mlm position outside sequence")


def _layer_norm_forward(x, scale, offset):
    mu = x.mean(-1, keepdims=True)
    centered = x - mu
    var = (centered * centered).mean(-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LN_EPS)
    xhat = centered * inv
    return scale * xhat + offset, (xhat, inv, scale)


def _layer_norm_backward(dy, cache):
    xhat, inv, scale = cache
    axes = tuple(range(dy.ndim - 1))
    dscale = (dy * xhat).sum(axes)
    doffset = dy.sum(axes)
    dxhat = dy * scale
    dx = inv * (
        dxhat
        - dxhat.mean(-1, keepdims=True)
        - xhat * (dxhat * xhat).mean(-1, keepdims=True)
    )
    return dx, dscale, doffset


def _gelu(x):
    return 0.5 * x * (1.0 + erf(x / math.sqrt(2.0)))


def _gelu_grad(x):
    cdf = 0.5 * (1.0 + erf(x / math.sqrt(2.0)))
    pdf = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return cdf + x * pdf


def _softmax(scores):
    top = scores.max(-1, keepdims=True)
    expd = np.exp(scores - top)
    return expd / expd.sum(-1, keepdims=True)


def _log_softmax(logits):
    top = logits.max(-1, keepdims=True)
    shifted = logits - top
    return shifted - np.log(np.exp(shifted).sum(-1, keepdims=True))


def _dropout(x, rate, rng):
    if rate <= 0.0:
        return x, None
    keep = (rng.random(x.shape) >= rate).astype(x.dtype) / (1.0 - rate)
    return x * keep, keep


def _split_heads(x, num_heads):
    B, L, H = x.shape
    return x.reshape(B, L, num_heads, H // num_heads).transpose(0, 2, 1, 3)


def _merge_heads(x):
    B, nh, L, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(B, L, nh * dh)


def _forward_tape(weights: EncoderWeights, batch: Batch, *, train: bool = False, rng=None):
    cfg = weights.config
    _check_batch(cfg, batch)
    A = weights.arrays
    ids = batch.input_ids
    B, L = ids.shape
    rate = cfg.dropout_rate if train else 0.0
    if rate > 0.0 and rng is None:
        raise InvalidConfigError("dropout requires an rng")

    tape: dict = {"ids": ids, "L": L}
    embedded = (
        A["token_embedding"][ids]
        + A["position_embedding"][:L][None, :, :]
        + A["segment_embedding"][batch.segment_ids]
    )
    x, tape["emb_ln"] = _layer_norm_forward(
        embedded, A["embedding_norm_scale"], A["embedding_norm_offset"]
    )
    x, tape["emb_drop"] = _dropout(x, rate, rng)

    # [B, 1, 1, L] additive bias: 0 where attendable, -inf where masked out
    mask_bias = np.where(batch.attention_mask[:, None, None, :] == 1, 0.0, -np.inf)
    scale = 1.0 / math.sqrt(cfg.hidden_dim // cfg.num_heads)

    layers = []
    for i in range(cfg.num_layers):
        p = f"layer{i}."
        cache: dict = {"x_in": x}
        q = _split_heads(x @ A[p + "attn_query_weight"] + A[p + "attn_query_bias"], cfg.num_heads)
        k = _split_heads(x @ A[p + "attn_key_weight"] + A[p + "attn_key_bias"], cfg.num_heads)
        v = _split_heads(x @ A[p + "attn_value_weight"] + A[p + "attn_value_bias"], cfg.num_heads)
        scores = (q @ k.transpose(0, 1, 3, 2)) * scale + mask_bias
        probs = _softmax(scores)
        context = _merge_heads(probs @ v)
        attn_out = context @ A[p + "attn_output_weight"] + A[p + "attn_output_bias"]
        attn_out, cache["attn_drop"] = _dropout(attn_out, rate, rng)
        cache.update(q=q, k=k, v=v, probs=probs, context=context, scale=scale)
        x, cache["attn_ln"] = _layer_norm_forward(
            cache["x_in"] + attn_out, A[p + "attn_norm_scale"], A[p + "attn_norm_offset"]
        )
        cache["x_mid"] = x
        inner = x @ A[p + "ff_inner_weight"] + A[p + "ff_inner_bias"]
        activated = _gelu(inner)
        ff_out = activated @ A[p + "ff_output_weight"] + A[p + "ff_output_bias"]
        ff_out, cache["ff_drop"] = _dropout(ff_out, rate, rng)
        cache.update(inner=inner, activated=activated)
        x, cache["ff_ln"] = _layer_norm_forward(
            x + ff_out, A[p + "ff_norm_scale"], A[p + "ff_norm_offset"]
        )
        layers.append(cache)
    tape["layers"] = layers
    tape["sequence"] = x

    pooled_pre = x[:, 0, :] @ A["pooler_weight"] + A["pooler_bias"]
    pooled = np.tanh(pooled_pre)
    tape["pooled"] = pooled
    nsp_logits = pooled @ A["nsp_weight"] + A["nsp_bias"]
    class_logits = pooled @ A["classifier_weight"] + A["classifier_bias"]

    mlm_logits = None
    if batch.mlm_positions is not None:
        gathered = np.take_along_axis(x, batch.mlm_positions[:, :, None], axis=1)
        tape["gathered"] = gathered
        mlm_logits = gathered @ A["token_embedding"].T + A["mlm_output_bias"]

    return mlm_logits, nsp_logits, pooled, class_logits, tape


def forward(weights: EncoderWeights, batch: Batch, *, train: bool = False, rng=None, return_details: bool = False):
    """Run the encoder; returns (mlm_logits, nsp_logits, pooled).

    ``mlm_logits`` is None when the batch carries no mlm positions. With
    ``return_details`` a dict with per-layer attention probabilities, the
    final sequence states, and classifier logits is appended.
    """
    mlm_logits, nsp_logits, pooled, class_logits, tape = _forward_tape(
        weights, batch, train=train, rng=rng
    )
    if not return_details:
        return mlm_logits, nsp_logits, pooled
    details = {
        "attention_probs": [cache["probs"] for cache in tape["layers"]],
        "sequence": tape["sequence"],
        "class_logits": class_logits,
    }
    return mlm_logits, nsp_logits, pooled, details


def classify_forward(weights: EncoderWeights, batch: Batch, *, train: bool = False, rng=None) -> np.ndarray:
    """Two-way classification logits from the pooled CLS state."""
    _, _, _, class_logits, _ = _forward_tape(weights, batch, train=train, rng=rng)
    return class_logits


def loss(mlm_logits: np.ndarray, nsp_logits: np.ndarray, batch: Batch) -> float:
    """Mean masked-token cross-entropy plus mean NSP cross-entropy."""
    mlm_term = 0.0
    if mlm_logits is not None and batch.mlm_weights is not None and batch.mlm_weights.sum() > 0:
        logp = _log_softmax(mlm_logits)
        picked = np.take_along_axis(logp, batch.mlm_labels[:, :, None], axis=-1)[:, :, 0]
        mlm_term = -(picked * batch.mlm_weights).sum() / batch.mlm_weights.sum()
    B = nsp_logits.shape[0]
    nsp_logp = _log_softmax(nsp_logits)
    nsp_term = -nsp_logp[np.arange(B), batch.nsp_labels].mean()
    return float(mlm_term + nsp_term)


def _classification_loss(class_logits: np.ndarray, labels: np.ndarray) -> float:
    logp = _log_softmax(class_logits)
    return float(-logp[np.arange(class_logits.shape[0]), labels].mean())


def _body_backward(weights: EncoderWeights, batch: Batch, tape: dict, dseq: np.ndarray, dpooled: np.ndarray, grads: dict) -> None:
    """Backprop from d(sequence) and d(pooled) down to the embeddings,
    accumulating into ``grads``."""
    A = weights.arrays
    cfg = weights.config
    L = tape["L"]

    # pooler: pooled = tanh(seq[:,0] @ Wp + bp)
    pooled = tape["pooled"]
    dpre = dpooled * (1.0 - pooled * pooled)
    x0 = tape["sequence"][:, 0, :]
    grads["pooler_weight"] += x0.T @ dpre
    grads["pooler_bias"] += dpre.sum(0)
    dseq[:, 0, :] += dpre @ A["pooler_weight"].T

    dx = dseq
    for i in range(cfg.num_layers - 1, -1, -1):
        p = f"layer{i}."
        cache = tape["layers"][i]

        dres, dscale, doffset = _layer_norm_backward(dx, cache["ff_ln"])
        grads[p + "ff_norm_scale"] += dscale
        grads[p + "ff_norm_offset"] += doffset
        dff_out = dres
        if cache["ff_drop"] is not None:
            dff_out = dff_out * cache["ff_drop"]
        dx_mid = dres.copy()

        dact = dff_out @ A[p + "ff_output_weight"].T
        grads[p + "ff_output_weight"] += np.einsum("blf,blh->fh", cache["activated"], dff_out)
        grads[p + "ff_output_bias"] += dff_out.sum((0, 1))
        dinner = dact * _gelu_grad(cache["inner"])
        grads[p + "ff_inner_weight"] += np.einsum("blh,blf->hf", cache["x_mid"], dinner)
        grads[p + "ff_inner_bias"] += dinner.sum((0, 1))
        dx_mid += dinner @ A[p + "ff_inner_weight"].T

        dres, dscale, doffset = _layer_norm_backward(dx_mid, cache["attn_ln"])
        grads[p + "attn_norm_scale"] += dscale
        grads[p + "attn_norm_offset"] += doffset
        dattn_out = dres
        if cache["attn_drop"] is not None:
            dattn_out = dattn_out * cache["attn_drop"]
        dx_in = dres.copy()

        dcontext = dattn_out @ A[p + "attn_output_weight"].T
        grads[p + "attn_output_weight"] += np.einsum("blh,blo->ho", cache["context"], dattn_out)
        grads[p + "attn_output_bias"] += dattn_out.sum((0, 1))

        dctx_heads = _split_heads(dcontext, cfg.num_heads)
        probs, q, k, v, scale = cache["probs"], cache["q"], cache["k"], cache["v"], cache["scale"]
        dprobs = dctx_heads @ v.transpose(0, 1, 3, 2)
        dv = probs.transpose(0, 1, 3, 2) @ dctx_heads
        dscores = probs * (dprobs - (dprobs * probs).sum(-1, keepdims=True))
        dq = (dscores @ k) * scale
        dk = (dscores.transpose(0, 1, 3, 2) @ q) * scale

        x_in = cache["x_in"]
        for name, dproj in (("attn_query", dq), ("attn_key", dk), ("attn_value", dv)):
            dmerged = _merge_heads(dproj)
            grads[p + name + "_weight"] += np.einsum("blh,blo->ho", x_in, dmerged)
            grads[p + name + "_bias"] += dmerged.sum((0, 1))
            dx_in += dmerged @ A[p + name + "_weight"].T
        dx = dx_in

    if tape["emb_drop"] is not None:
        dx = dx * tape["emb_drop"]
    demb, dscale, doffset = _layer_norm_backward(dx, tape["emb_ln"])
    grads["embedding_norm_scale"] += dscale
    grads["embedding_norm_offset"] += doffset
    np.add.at(grads["token_embedding"], tape["ids"], demb)
    grads["position_embedding"][:L] += demb.sum(0)
    np.add.at(grads["segment_embedding"], batch.segment_ids, demb)


def pretrain_loss_and_grads(weights: EncoderWeights, batch: Batch, *, train: bool = False, rng=None):
    """Loss and exact gradients of the MLM+NSP objective."""
    mlm_logits, nsp_logits, pooled, _, tape = _forward_tape(weights, batch, train=train, rng=rng)
    total = loss(mlm_logits, nsp_logits, batch)
    A = weights.arrays
    grads = weights.zeros_like()
    B = batch.input_ids.shape[0]
    dseq = np.zeros_like(tape["sequence"])

    # NSP head
    dnsp = _softmax(nsp_logits)
    dnsp[np.arange(B), batch.nsp_labels] -= 1.0
    dnsp /= B
    grads["nsp_weight"] += tape["pooled"].T @ dnsp
    grads["nsp_bias"] += dnsp.sum(0)
    dpooled = dnsp @ A["nsp_weight"].T

    # MLM head (projection tied to the token embedding table)
    if mlm_logits is not None and batch.mlm_weights.sum() > 0:
        weight_sum = batch.mlm_weights.sum()
        dmlm = _softmax(mlm_logits)
        P = batch.mlm_labels.shape[1]
        dmlm[np.arange(B)[:, None], np.arange(P)[None, :], batch.mlm_labels] -= 1.0
        dmlm *= batch.mlm_weights[:, :, None] / weight_sum
        gathered = tape["gathered"]
        grads["token_embedding"] += np.einsum("bpv,bph->vh", dmlm, gathered)
        grads["mlm_output_bias"] += dmlm.sum((0, 1))
        dgathered = dmlm @ A["token_embedding"]
        np.add.at(dseq, (np.arange(B)[:, None], batch.mlm_positions), dgathered)

    _body_backward(weights, batch, tape, dseq, dpooled, grads)
    return total, grads


def backward(weights: EncoderWeights, batch: Batch) -> dict[str, np.ndarray]:
    """Exact gradients of :func:`loss` w.r.t. every weight (dropout off)."""
    _, grads = pretrain_loss_and_grads(weights, batch)
    return grads


def classify_loss_and_grads(weights: EncoderWeights, batch: Batch, *, train: bool = False, rng=None):
    """Loss and exact gradients of the classification cross-entropy."""
    if batch.class_labels is None:
        raise ShapeMismatchError("classification batch needs class_labels")
    _, _, pooled, class_logits, tape = _forward_tape(weights, batch, train=train, rng=rng)
    total = _classification_loss(class_logits, batch.class_labels)
    A = weights.arrays
    grads = weights.zeros_like()
    B = batch.input_ids.shape[0]

    dlogits = _softmax(class_logits)
    dlogits[np.arange(B), batch.class_labels] -= 1.0
    dlogits /= B
    grads["classifier_weight"] += tape["pooled"].T @ dlogits
    grads["classifier_bias"] += dlogits.sum(0)
    dpooled = dlogits @ A["classifier_weight"].T

    dseq = np.zeros_like(tape["sequence"])
    _body_backward(weights, batch, tape, dseq, dpooled, grads)
    return total, grads


def save_checkpoint(path: str | Path, weights: EncoderWeights) -> None:
    """Binary container, byte-stable for identical config and weights.

    Layout: 4-byte magic ``LXPW``, u32 version, u64 header length, a JSON
    header (config plus array names/dtypes/shapes in sorted name order),
    then the raw little-endian C-order array bytes in header order.
    """
    names = sorted(weights.arrays)
    header = {
        "version": CHECKPOINT_VERSION,
        "config": asdict(weights.config),
        "arrays": [
            {"name": n, "dtype": str(weights.arrays[n].dtype), "shape": list(weights.arrays[n].shape)}
            for n in names
        ],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as handle:
        handle.write(CHECKPOINT_MAGIC)
        handle.write(struct.pack("<I", CHECKPOINT_VERSION))
        handle.write(struct.pack("<Q", len(blob)))
        handle.write(blob)
        for name in names:
            handle.write(np.ascontiguousarray(weights.arrays[name]).astype("<f8", copy=False).tobytes())


def load_checkpoint(path: str | Path) -> EncoderWeights:
    with open(path, "rb") as handle:
        magic = handle.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise InvalidConfigError(f"not a checkpoint file: bad magic {magic!r}")
        (version,) = struct.unpack("<I", handle.read(4))
        if version != CHECKPOINT_VERSION:
            raise InvalidConfigError(f"unsupported checkpoint version {version}")
        (header_len,) = struct.unpack("<Q", handle.read(8))
        header = json.loads(handle.read(header_len).decode("utf-8"))
        config = ModelConfig(**header["config"])
        arrays: dict[str, np.ndarray] = {}
        for meta in header["arrays"]:
            count = int(np.prod(meta["shape"])) if meta["shape"] else 1
            raw = handle.read(count * 8)
            arrays[meta["name"]] = np.frombuffer(raw, dtype="<f8").reshape(meta["shape"]).copy()
    return EncoderWeights(config, arrays)
