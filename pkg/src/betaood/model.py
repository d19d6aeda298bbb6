"""Two-head feedforward network with hand-rolled backprop and plain SGD.

Hidden layers use ELU; two parallel linear heads emit the positive and
negative logit vectors.  The hidden stack ("backbone") and the heads train
with distinct learning rates.  Everything is deterministic given the seed,
and checkpoints round-trip through JSON bit-exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError
from .evidence import (
    EvidencePair,
    Logits,
    Prediction,
    elu_array,
    elu_grad_array,
    evidence_to_prediction,
    logits_to_evidence,
)
from .special import digamma_array, trigamma_array

CHECKPOINT_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ArchConfig:
    """Network shape: input dim -> hidden widths -> two L-wide heads."""

    input_dim: int
    hidden: tuple[int, ...]
    label_count: int

    def __post_init__(self):
        dims = (self.input_dim, *self.hidden, self.label_count)
        if any(int(d) != d or d < 1 for d in dims):
            raise ConfigError(f"layer widths must be positive integers, got {dims}")
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))


@dataclass(frozen=True)
class TrainConfig:
    learning_rate_backbone: float = 0.05
    learning_rate_head: float = 10.0
    epochs: int = 20
    batch_size: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate_backbone < 0 or self.learning_rate_head < 0:
            raise ConfigError("learning rates must be nonnegative")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass
class ModelParams:
    """Hidden-layer weights/biases plus the two head layers."""

    arch: ArchConfig
    hidden_weights: list[np.ndarray]
    hidden_biases: list[np.ndarray]
    w_pos: np.ndarray
    b_pos: np.ndarray
    w_neg: np.ndarray
    b_neg: np.ndarray


def init_params(arch: ArchConfig, seed: int) -> ModelParams:
    """Scaled-uniform init: W ~ U(-s, s) with s = sqrt(1/fan_in); biases zero."""
    rng = np.random.Generator(np.random.PCG64(seed))
    hidden_weights = []
    hidden_biases = []
    fan_in = arch.input_dim
    for width in arch.hidden:
        s = np.sqrt(1.0 / fan_in)
        hidden_weights.append(rng.uniform(-s, s, size=(width, fan_in)))
        hidden_biases.append(np.zeros(width))
        fan_in = width
    s = np.sqrt(1.0 / fan_in)
    w_pos = rng.uniform(-s, s, size=(arch.label_count, fan_in))
    w_neg = rng.uniform(-s, s, size=(arch.label_count, fan_in))
    return ModelParams(
        arch=arch,
        hidden_weights=hidden_weights,
        hidden_biases=hidden_biases,
        w_pos=w_pos,
        b_pos=np.zeros(arch.label_count),
        w_neg=w_neg,
        b_neg=np.zeros(arch.label_count),
    )


def _forward_batch(params: ModelParams, x: np.ndarray):
    """Forward pass on an (N, D) batch; returns pre-activations and logits."""
    if x.ndim != 2 or x.shape[1] != params.arch.input_dim:
        raise ConfigError(
            f"feature batch must have shape (N, {params.arch.input_dim}), "
            f"got {x.shape}"
        )
    pre_acts = []
    h = x
    for w, b in zip(params.hidden_weights, params.hidden_biases):
        z = h @ w.T + b
        pre_acts.append(z)
        h = elu_array(z)
    f_pos = h @ params.w_pos.T + params.b_pos
    f_neg = h @ params.w_neg.T + params.b_neg
    return pre_acts, h, f_pos, f_neg


def forward(params: ModelParams, features: np.ndarray) -> Logits:
    """Logits for a single sample."""
    features = np.asarray(features, dtype=float)
    if features.ndim != 1:
        raise ConfigError(f"features must be 1-d, got shape {features.shape}")
    _, _, f_pos, f_neg = _forward_batch(params, features[None, :])
    return Logits(f_pos=f_pos[0], f_neg=f_neg[0])


def per_sample_losses(params: ModelParams, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bayes-risk Beta loss of each sample in an (N, D) batch, shape (N,)."""
    _, _, f_pos, f_neg = _forward_batch(params, x)
    alpha = elu_array(f_pos) + 2.0
    beta = elu_array(f_neg) + 2.0
    psi_total = digamma_array(alpha + beta)
    terms = y * (psi_total - digamma_array(alpha)) + (1.0 - y) * (
        psi_total - digamma_array(beta)
    )
    return terms.mean(axis=1)


def batch_loss(params: ModelParams, x: np.ndarray, y: np.ndarray) -> float:
    """Mean Bayes-risk Beta loss over an (N, D) batch with (N, L) labels."""
    return float(np.mean(per_sample_losses(params, x, y)))


def _batch_gradients(params: ModelParams, x: np.ndarray, y: np.ndarray):
    """Gradients of the batch-mean loss for every parameter tensor."""
    n = x.shape[0]
    pre_acts, h, f_pos, f_neg = _forward_batch(params, x)
    # vectorized form of evidence_grad, including the 1/L label average
    alpha = elu_array(f_pos) + 2.0
    beta = elu_array(f_neg) + 2.0
    n_labels = params.arch.label_count
    psi1_total = trigamma_array(alpha + beta)
    d_alpha = (y * (psi1_total - trigamma_array(alpha)) + (1.0 - y) * psi1_total) / n_labels
    d_beta = (y * psi1_total + (1.0 - y) * (psi1_total - trigamma_array(beta))) / n_labels
    d_fpos = d_alpha * elu_grad_array(f_pos) / n
    d_fneg = d_beta * elu_grad_array(f_neg) / n
    grads = {
        "w_pos": d_fpos.T @ h,
        "b_pos": d_fpos.sum(axis=0),
        "w_neg": d_fneg.T @ h,
        "b_neg": d_fneg.sum(axis=0),
    }
    d_h = d_fpos @ params.w_pos + d_fneg @ params.w_neg
    grads_hw = []
    grads_hb = []
    for layer in range(len(params.hidden_weights) - 1, -1, -1):
        d_z = d_h * elu_grad_array(pre_acts[layer])
        below = (
            x if layer == 0 else elu_array(pre_acts[layer - 1])
        )
        grads_hw.append(d_z.T @ below)
        grads_hb.append(d_z.sum(axis=0))
        d_h = d_z @ params.hidden_weights[layer]
    grads["hidden_weights"] = list(reversed(grads_hw))
    grads["hidden_biases"] = list(reversed(grads_hb))
    return grads


def backward(params: ModelParams, features: np.ndarray, y: np.ndarray) -> dict:
    """Single-sample parameter gradient of the Beta loss."""
    features = np.asarray(features, dtype=float)
    y = np.asarray(y, dtype=float)
    return _batch_gradients(params, features[None, :], y[None, :])


@dataclass
class Checkpoint:
    params: ModelParams
    train_config: TrainConfig
    loss_trace: list[float] = field(default_factory=list)
    format_version: int = CHECKPOINT_FORMAT_VERSION


def train(
    features: np.ndarray,
    labels: np.ndarray,
    arch: ArchConfig,
    config: TrainConfig,
) -> Checkpoint:
    """Plain SGD with seeded shuffling and distinct backbone/head rates."""
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if features.ndim != 2 or features.shape[0] == 0:
        raise DataError("training set must be a nonempty (N, D) array")
    if labels.shape != (features.shape[0], arch.label_count):
        raise DataError(
            f"labels must have shape ({features.shape[0]}, {arch.label_count}), "
            f"got {labels.shape}"
        )
    params = init_params(arch, config.seed)
    rng = np.random.Generator(np.random.PCG64(config.seed + 1))
    n = features.shape[0]
    trace = []
    for _ in range(config.epochs):
        order = rng.permutation(n)
        sample_losses = []
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            xb, yb = features[idx], labels[idx]
            sample_losses.extend(per_sample_losses(params, xb, yb))
            grads = _batch_gradients(params, xb, yb)
            lr_b = config.learning_rate_backbone
            lr_h = config.learning_rate_head
            for layer in range(len(params.hidden_weights)):
                params.hidden_weights[layer] -= lr_b * grads["hidden_weights"][layer]
                params.hidden_biases[layer] -= lr_b * grads["hidden_biases"][layer]
            params.w_pos -= lr_h * grads["w_pos"]
            params.b_pos -= lr_h * grads["b_pos"]
            params.w_neg -= lr_h * grads["w_neg"]
            params.b_neg -= lr_h * grads["b_neg"]
        # exact sum: the epoch mean is independent of batch partitioning
        trace.append(math.fsum(sample_losses) / n)
    return Checkpoint(params=params, train_config=config, loss_trace=trace)


def predict_batch(params: ModelParams, features_list) -> tuple[
    list[Logits], list[EvidencePair], list[Prediction]
]:
    """Forward every sample and map through evidence; lists stay aligned."""
    logits_list: list[Logits] = []
    evidence_list: list[EvidencePair] = []
    prediction_list: list[Prediction] = []
    if len(features_list) == 0:
        return logits_list, evidence_list, prediction_list
    x = np.asarray(features_list, dtype=float)
    _, _, f_pos, f_neg = _forward_batch(params, x)
    for i in range(x.shape[0]):
        logits = Logits(f_pos=f_pos[i], f_neg=f_neg[i])
        ev = logits_to_evidence(logits)
        logits_list.append(logits)
        evidence_list.append(ev)
        prediction_list.append(evidence_to_prediction(ev))
    return logits_list, evidence_list, prediction_list


def checkpoint_to_json(ckpt: Checkpoint) -> str:
    """Canonical JSON serialization; floats use shortest round-trip repr."""
    doc = {
        "format_version": ckpt.format_version,
        "arch": {
            "input_dim": ckpt.params.arch.input_dim,
            "hidden": list(ckpt.params.arch.hidden),
            "label_count": ckpt.params.arch.label_count,
        },
        "train_config": {
            "learning_rate_backbone": ckpt.train_config.learning_rate_backbone,
            "learning_rate_head": ckpt.train_config.learning_rate_head,
            "epochs": ckpt.train_config.epochs,
            "batch_size": ckpt.train_config.batch_size,
            "seed": ckpt.train_config.seed,
        },
        "params": {
            "hidden_weights": [w.tolist() for w in ckpt.params.hidden_weights],
            "hidden_biases": [b.tolist() for b in ckpt.params.hidden_biases],
            "w_pos": ckpt.params.w_pos.tolist(),
            "b_pos": ckpt.params.b_pos.tolist(),
            "w_neg": ckpt.params.w_neg.tolist(),
            "b_neg": ckpt.params.b_neg.tolist(),
        },
        "loss_trace": ckpt.loss_trace,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def checkpoint_from_json(text: str) -> Checkpoint:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed checkpoint JSON: {exc}") from exc
    version = doc.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise DataError(
            f"unsupported checkpoint format version {version!r} "
            f"(expected {CHECKPOINT_FORMAT_VERSION})"
        )
    arch = ArchConfig(
        input_dim=doc["arch"]["input_dim"],
        hidden=tuple(doc["arch"]["hidden"]),
        label_count=doc["arch"]["label_count"],
    )
    tc = TrainConfig(**doc["train_config"])
    p = doc["params"]
    params = ModelParams(
        arch=arch,
        hidden_weights=[np.asarray(w, dtype=float) for w in p["hidden_weights"]],
        hidden_biases=[np.asarray(b, dtype=float) for b in p["hidden_biases"]],
        w_pos=np.asarray(p["w_pos"], dtype=float),
        b_pos=np.asarray(p["b_pos"], dtype=float),
        w_neg=np.asarray(p["w_neg"], dtype=float),
        b_neg=np.asarray(p["b_neg"], dtype=float),
    )
    return Checkpoint(
        params=params,
        train_config=tc,
        loss_trace=list(doc["loss_trace"]),
        format_version=version,
    )
