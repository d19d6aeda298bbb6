"""Mapping two-head logits to Beta evidence, subjective opinions, and means.

Evidence is alpha = ELU(f_pos) + 2 and beta = ELU(f_neg) + 2, so every
entry is strictly greater than 1.  Opinions use the subjective-logic
decomposition with prior weight W and base rate a; the defaults W=2,
a=0.5 make belief + disbelief + uncertainty sum to exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

DEFAULT_PRIOR_WEIGHT = 2.0
DEFAULT_BASE_RATE = 0.5


@dataclass(frozen=True)
class Logits:
    """Raw two-head network outputs, one entry per label."""

    f_pos: np.ndarray
    f_neg: np.ndarray

    def __post_init__(self):
        f_pos = np.asarray(self.f_pos, dtype=float)
        f_neg = np.asarray(self.f_neg, dtype=float)
        object.__setattr__(self, "f_pos", f_pos)
        object.__setattr__(self, "f_neg", f_neg)
        if f_pos.ndim != 1 or f_neg.ndim != 1 or f_pos.shape != f_neg.shape:
            raise ConfigError(
                f"logit heads must be 1-d and equal length, got shapes "
                f"{f_pos.shape} and {f_neg.shape}"
            )
        if f_pos.size < 1:
            raise ConfigError("logits need at least one label")
        if not (np.all(np.isfinite(f_pos)) and np.all(np.isfinite(f_neg))):
            raise ConfigError("logits must be finite")

    @property
    def label_count(self) -> int:
        return self.f_pos.size


@dataclass(frozen=True)
class EvidencePair:
    """Per-label positive (alpha) and negative (beta) Beta evidence."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        beta = np.asarray(self.beta, dtype=float)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        if alpha.ndim != 1 or alpha.shape != beta.shape or alpha.size < 1:
            raise ConfigError(
                f"evidence vectors must be 1-d, nonempty, and equal length, "
                f"got shapes {alpha.shape} and {beta.shape}"
            )
        if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(beta))):
            raise ConfigError("evidence must be finite")
        if np.any(alpha <= 0.0) or np.any(beta <= 0.0):
            raise ConfigError("evidence must be strictly positive")

    @property
    def label_count(self) -> int:
        return self.alpha.size


@dataclass(frozen=True)
class SubjectiveOpinion:
    """Belief/disbelief/uncertainty triple per label, plus shared priors."""

    belief: np.ndarray
    disbelief: np.ndarray
    uncertainty: np.ndarray
    base_rate: float
    prior_weight: float


@dataclass(frozen=True)
class Prediction:
    """Per-label predicted probability: the Beta mean alpha/(alpha+beta)."""

    p: np.ndarray


def elu_array(x: np.ndarray) -> np.ndarray:
    """Vectorized ELU."""
    return np.where(x > 0.0, x, np.expm1(np.minimum(x, 0.0)))


def elu_grad_array(x: np.ndarray) -> np.ndarray:
    """Vectorized ELU derivative: 1 for x > 0, exp(x) otherwise."""
    return np.where(x > 0.0, 1.0, np.exp(np.minimum(x, 0.0)))


def logits_to_evidence(logits: Logits) -> EvidencePair:
    """alpha = ELU(f_pos) + 2, beta = ELU(f_neg) + 2; every entry > 1."""
    return EvidencePair(
        alpha=elu_array(logits.f_pos) + 2.0,
        beta=elu_array(logits.f_neg) + 2.0,
    )


def evidence_to_opinion(
    ev: EvidencePair,
    prior_weight: float = DEFAULT_PRIOR_WEIGHT,
    base_rate: float = DEFAULT_BASE_RATE,
) -> SubjectiveOpinion:
    """Subjective-logic opinion from evidence.

    b = (alpha - aW)/(alpha + beta), d = (beta - aW)/(alpha + beta),
    u = W/(alpha + beta).  Rejects (W, a) combinations that would push
    belief or disbelief below zero for this evidence.
    """
    aw = base_rate * prior_weight
    total = ev.alpha + ev.beta
    if np.any(ev.alpha < aw) or np.any(ev.beta < aw):
        bad = int(np.argmax((ev.alpha < aw) | (ev.beta < aw)))
        raise ConfigError(
            f"opinion simplex violated at label {bad}: evidence "
            f"(alpha={ev.alpha[bad]:.6g}, beta={ev.beta[bad]:.6g}) is below "
            f"base_rate*prior_weight = {aw:.6g}; belief/disbelief would be negative"
        )
    return SubjectiveOpinion(
        belief=(ev.alpha - aw) / total,
        disbelief=(ev.beta - aw) / total,
        uncertainty=prior_weight / total,
        base_rate=base_rate,
        prior_weight=prior_weight,
    )


def evidence_to_prediction(ev: EvidencePair) -> Prediction:
    """Predicted label probability: the mean alpha/(alpha+beta)."""
    return Prediction(p=ev.alpha / (ev.alpha + ev.beta))
