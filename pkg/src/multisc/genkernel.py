"""Numeric kernel of the decoupled cross-attention generator.

Single-head scaled dot-product attention in row-vector convention, the
text/image combination Z_text + lambda * Z_img, forward noising, and the
squared-error training loss. The noise predictor itself is caller-supplied;
this module is the exactly-testable math around it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ShapeMismatch(Exception):
    pass


def _check_finite(name: str, arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class AttnWeights:
    W_q: np.ndarray  # model_dim x head_dim
    W_k: np.ndarray
    W_v: np.ndarray

    def __post_init__(self):
        for name in ("W_q", "W_k", "W_v"):
            object.__setattr__(self, name, _check_finite(name, getattr(self, name)))
        shapes = {self.W_q.shape, self.W_k.shape, self.W_v.shape}
        if len(shapes) != 1 or self.W_q.ndim != 2 or self.W_q.shape[1] < 1:
            raise ShapeMismatch(f"weight shapes disagree: {shapes}")


@dataclass(frozen=True)
class LatentQuery:
    Z: np.ndarray  # n x model_dim

    def __post_init__(self):
        object.__setattr__(self, "Z", _check_finite("Z", self.Z))


@dataclass(frozen=True)
class Feature:
    C: np.ndarray  # m x model_dim
    kind: str  # "text" or "image"

    def __post_init__(self):
        object.__setattr__(self, "C", _check_finite("C", self.C))
        if self.kind not in ("text", "image"):
            raise ValueError(f"unknown feature kind {self.kind!r}")


def shared_query_weights(W_q, text_kv, image_kv) -> tuple[AttnWeights, AttnWeights]:
    """Build (text, image) weight sets sharing one query projection."""
    return (AttnWeights(W_q, text_kv[0], text_kv[1]),
            AttnWeights(W_q, image_kv[0], image_kv[1]))


def attention_matrix(Z: LatentQuery, C: Feature, W: AttnWeights) -> np.ndarray:
    """Row-stochastic attention weights Softmax(QK^T / sqrt(d))."""
    if Z.Z.shape[1] != W.W_q.shape[0] or C.C.shape[1] != W.W_k.shape[0]:
        raise ShapeMismatch(
            f"features of dim {Z.Z.shape[1]}/{C.C.shape[1]} vs weights {W.W_q.shape}")
    Q = Z.Z @ W.W_q
    K = C.C @ W.W_k
    d = W.W_q.shape[1]
    logits = (Q @ K.T) / np.sqrt(d)
    logits -= logits.max(axis=1, keepdims=True)
    weights = np.exp(logits)
    return weights / weights.sum(axis=1, keepdims=True)


def cross_attention(Z: LatentQuery, C: Feature, W: AttnWeights) -> np.ndarray:
    """Softmax(QK^T / sqrt(d)) V with Q = Z W_q, K = C W_k, V = C W_v."""
    return attention_matrix(Z, C, W) @ (C.C @ W.W_v)


def combine_outputs(Z_text: np.ndarray, Z_img: np.ndarray, lam: float) -> np.ndarray:
    """Decoupled combination Z_text + lambda * Z_img."""
    Z_text = np.asarray(Z_text, dtype=np.float64)
    Z_img = np.asarray(Z_img, dtype=np.float64)
    if Z_text.shape != Z_img.shape:
        raise ShapeMismatch(f"{Z_text.shape} vs {Z_img.shape}")
    if lam == 0:
        return Z_text.copy()  # bit-exact text-only path
    return Z_text + lam * Z_img


def noisy_sample(x0: np.ndarray, eps: np.ndarray,
                 alpha_t: float, sigma_t: float) -> np.ndarray:
    """Forward-noised sample alpha_t * x0 + sigma_t * eps."""
    x0 = np.asarray(x0, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    if x0.shape != eps.shape:
        raise ShapeMismatch(f"{x0.shape} vs {eps.shape}")
    return alpha_t * x0 + sigma_t * eps


def l_simple(eps: np.ndarray, eps_pred: np.ndarray) -> float:
    """Sum of squared elementwise differences between noise and prediction."""
    eps = np.asarray(eps, dtype=np.float64)
    eps_pred = np.asarray(eps_pred, dtype=np.float64)
    if eps.shape != eps_pred.shape:
        raise ShapeMismatch(f"{eps.shape} vs {eps_pred.shape}")
    diff = (eps - eps_pred).ravel()
    return float(diff @ diff)
