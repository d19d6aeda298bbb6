"""Closed-form Bayes-risk Beta loss and its analytic gradient.

For a multi-hot label vector y the loss averages, over labels,
y*(psi(a+b) - psi(a)) + (1-y)*(psi(a+b) - psi(b)), which is the exact
expectation of binary cross-entropy under Beta(a, b).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .evidence import EvidencePair, Logits, elu_grad_array, logits_to_evidence
from .special import digamma_array as _digamma_vec
from .special import trigamma_array as _trigamma_vec


@dataclass(frozen=True)
class LossGradient:
    """Loss derivatives w.r.t. evidence and, chained through ELU, the logits."""

    d_alpha: np.ndarray
    d_beta: np.ndarray
    d_fpos: np.ndarray
    d_fneg: np.ndarray


def _check_labels(ev: EvidencePair, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y)
    if y.shape != ev.alpha.shape:
        raise ConfigError(
            f"label vector length {y.shape} does not match evidence length "
            f"{ev.alpha.shape}"
        )
    if not np.all((y == 0) | (y == 1)):
        raise ConfigError("labels must be exactly 0 or 1")
    return y.astype(float)


def beta_loss(ev: EvidencePair, y: np.ndarray) -> float:
    """Mean over labels of the expected BCE under the predicted Beta."""
    yf = _check_labels(ev, y)
    psi_total = _digamma_vec(ev.alpha + ev.beta)
    psi_alpha = _digamma_vec(ev.alpha)
    psi_beta = _digamma_vec(ev.beta)
    terms = yf * (psi_total - psi_alpha) + (1.0 - yf) * (psi_total - psi_beta)
    return float(np.mean(terms))


def beta_loss_grad(ev: EvidencePair, y: np.ndarray, logits: Logits) -> LossGradient:
    """Analytic gradient of beta_loss w.r.t. evidence and logits.

    The logits must reproduce the evidence under logits_to_evidence; an
    inconsistent pair is rejected rather than silently trusted.
    """
    derived = logits_to_evidence(logits)
    if not (
        np.allclose(derived.alpha, ev.alpha, rtol=0.0, atol=1e-12)
        and np.allclose(derived.beta, ev.beta, rtol=0.0, atol=1e-12)
    ):
        raise ConfigError("logits do not reproduce the given evidence")
    d_alpha, d_beta = evidence_grad(ev, y)
    return LossGradient(
        d_alpha=d_alpha,
        d_beta=d_beta,
        d_fpos=d_alpha * elu_grad_array(logits.f_pos),
        d_fneg=d_beta * elu_grad_array(logits.f_neg),
    )


def evidence_grad(ev: EvidencePair, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """d(beta_loss)/d(alpha) and d(beta_loss)/d(beta), with the 1/L factor."""
    yf = _check_labels(ev, y)
    n = ev.label_count
    psi1_total = _trigamma_vec(ev.alpha + ev.beta)
    psi1_alpha = _trigamma_vec(ev.alpha)
    psi1_beta = _trigamma_vec(ev.beta)
    d_alpha = (yf * (psi1_total - psi1_alpha) + (1.0 - yf) * psi1_total) / n
    d_beta = (yf * psi1_total + (1.0 - yf) * (psi1_total - psi1_beta)) / n
    return d_alpha, d_beta
