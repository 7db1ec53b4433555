"""Small numerically-stable primitives shared by the DGP and the estimators."""

from __future__ import annotations

import numpy as np


def sigmoid(x):
    """Logistic function, stable for large |x|; accepts scalars or arrays."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    if out.ndim == 0:
        return float(out)
    return out


def softplus(x):
    """log(1 + exp(x)) without overflow."""
    x = np.asarray(x, dtype=float)
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def bce_with_logits(logits, targets) -> float:
    """Mean binary cross-entropy computed from logits."""
    logits = np.asarray(logits, dtype=float)
    targets = np.asarray(targets, dtype=float)
    return float(np.mean(softplus(logits) - targets * logits))


def bce_with_logits_grad(logits, targets) -> np.ndarray:
    """d(mean BCE)/d(logits)."""
    logits = np.asarray(logits, dtype=float)
    targets = np.asarray(targets, dtype=float)
    return (sigmoid(logits) - targets) / logits.size
