"""Individual-only outcome estimator: shared representation, two outcome heads.

Uses node features alone (no graph input anywhere), so its effect estimates
ignore interference by construction. Serves as the uplift-ranking baseline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError, ShapeError, TrainingDivergedError
from .nn import Adam, Linear, Mlp
from .numerics import bce_with_logits, bce_with_logits_grad, sigmoid
from .relational import TrainingConfig


class _ReluStack:
    """Linear + ReLU repeated; the representation trunk."""

    def __init__(self, rng, sizes):
        self.layers = [Linear(rng, a, b) for a, b in zip(sizes[:-1], sizes[1:])]
        self._masks: list[np.ndarray] = []

    def apply(self, x):
        for layer in self.layers:
            x = np.maximum(layer.apply(x), 0.0)
        return x

    def forward(self, x):
        self._masks = []
        for layer in self.layers:
            pre = layer.forward(x)
            mask = pre > 0
            self._masks.append(mask)
            x = pre * mask
        return x

    def backward(self, dout):
        for layer, mask in zip(reversed(self.layers), reversed(self._masks)):
            dout = layer.backward(dout * mask)
        return dout

    def zero_grad(self):
        for layer in self.layers:
            layer.zero_grad()

    def named_params(self, prefix):
        out = []
        for idx, layer in enumerate(self.layers):
            out.extend(layer.named_params(f"{prefix}.{idx}"))
        return out


class TarnetModel:
    """Two-headed outcome model on individual features only."""

    def __init__(self, d: int, hidden: int = 16, rep_layers: int = 1,
                 head_layers: int = 2, rng: np.random.Generator | None = None):
        if rng is None:
            rng = np.random.default_rng(0)
        if rep_layers < 1 or head_layers < 1:
            raise InvalidParameterError("layer counts must be >= 1")
        self.d = d
        self.hidden = hidden
        self.rep_layers = rep_layers
        self.head_layers = head_layers
        self.rep = _ReluStack(rng, [d] + [hidden] * rep_layers)
        head_sizes = [hidden] * head_layers + [1]
        self.head0 = Mlp(rng, head_sizes)
        self.head1 = Mlp(rng, head_sizes)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.d:
            raise ShapeError(f"features must be (n, {self.d}), got {x.shape}")
        return x

    def logits(self, x):
        """(control logit, treated logit) per node; pure."""
        rep = self.rep.apply(self._check(x))
        return self.head0.apply(rep)[:, 0], self.head1.apply(rep)[:, 0]

    def named_params(self):
        return (self.rep.named_params("rep")
                + self.head0.named_params("head0")
                + self.head1.named_params("head1"))

    def zero_grads(self):
        self.rep.zero_grad()
        self.head0.zero_grad()
        self.head1.zero_grad()


def train_tarnet(
    features: np.ndarray,
    t: np.ndarray,
    y: np.ndarray,
    config: TrainingConfig,
    rng: np.random.Generator,
    rep_layers: int = 1,
    head_layers: int = 2,
):
    """Fit the two-headed model by full-batch BCE on the factual arm.

    Returns (model, per-epoch loss list).
    """
    features = np.asarray(features, dtype=float)
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if features.ndim != 2:
        raise ShapeError("features must be 2-D")
    n, d = features.shape
    if t.shape != (n,) or y.shape != (n,):
        raise ShapeError("t and y must match the feature row count")
    model = TarnetModel(d, hidden=config.hidden, rep_layers=rep_layers,
                        head_layers=head_layers, rng=rng)
    opt = Adam(config.learning_rate)
    params = model.named_params()
    treated = t == 1
    trace: list[float] = []
    for epoch in range(config.epochs):
        rep = model.rep.forward(features)
        logit0 = model.head0.forward(rep)[:, 0]
        logit1 = model.head1.forward(rep)[:, 0]
        y_logit = np.where(treated, logit1, logit0)
        loss = bce_with_logits(y_logit, y)
        if not np.isfinite(loss):
            raise TrainingDivergedError(epoch)
        d_logit = bce_with_logits_grad(y_logit, y)
        model.zero_grads()
        d_rep = model.head0.backward((d_logit * ~treated)[:, None])
        d_rep = d_rep + model.head1.backward((d_logit * treated)[:, None])
        model.rep.backward(d_rep)
        opt.step(params)
        trace.append(float(loss))
    return model, trace


def tarnet_ite(model: TarnetModel, features: np.ndarray) -> np.ndarray:
    """Per-node effect estimate: treated minus control outcome probability."""
    logit0, logit1 = model.logits(features)
    return sigmoid(logit1) - sigmoid(logit0)


def tarnet_bce(model: TarnetModel, features, t, y) -> float:
    """Factual BCE on held-out data (model selection metric)."""
    logit0, logit1 = model.logits(features)
    y_logit = np.where(np.asarray(t) == 1, logit1, logit0)
    return bce_with_logits(y_logit, np.asarray(y, dtype=float))


def save_tarnet(model: TarnetModel, path, config: TrainingConfig | None = None,
                seed: int | None = None) -> None:
    params = {}
    for name, value, _ in model.named_params():
        params[name] = {"shape": list(value.shape), "data": value.ravel().tolist()}
    payload = {
        "kind": "tarnet",
        "d": model.d,
        "hidden": model.hidden,
        "rep_layers": model.rep_layers,
        "head_layers": model.head_layers,
        "params": params,
        "config": config.to_dict() if config is not None else None,
        "seed": seed,
    }
    Path(path).write_text(json.dumps(payload) + "\n", encoding="utf-8")


def load_tarnet(path) -> TarnetModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("kind") != "tarnet":
        raise InvalidParameterError(f"not a tarnet checkpoint: {path}")
    model = TarnetModel(
        d=payload["d"], hidden=payload["hidden"],
        rep_layers=payload["rep_layers"], head_layers=payload["head_layers"],
    )
    by_name = {name: value for name, value, _ in model.named_params()}
    for name, spec in payload["params"].items():
        target = by_name[name]
        data = np.asarray(spec["data"], dtype=float).reshape(spec["shape"])
        if data.shape != target.shape:
            raise ShapeError(f"checkpoint shape mismatch for {name}")
        target[...] = data
    return model
