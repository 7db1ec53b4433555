"""Interference-aware outcome estimator with adversarial representation balancing.

Architecture: one graph convolution over neighbor features feeds an encoder
that fuses own features into a hidden representation phi. An outcome head
predicts y from (phi, t, z); two discriminator heads predict t from phi and z
from (phi, t). Training alternates between fitting the discriminators and
pushing phi toward representations the frozen discriminators cannot exploit,
which counteracts confounding in the observational data.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .dgp import Dataset, exposure
from .errors import InvalidParameterError, ShapeError, TrainingDivergedError
from .graphs import Graph
from .nn import Adam, Linear, Mlp
from .numerics import bce_with_logits, bce_with_logits_grad, sigmoid

MLP_WIDTH = 16


@dataclass(frozen=True)
class TrainingConfig:
    """Hyperparameters for the full-batch training loops."""

    learning_rate: float = 5e-3
    epochs: int = 300
    alpha: float = 0.5
    gamma: float = 0.5
    seed: int = 0
    hidden: int = 16

    def __post_init__(self):
        if self.alpha < 0 or self.gamma < 0:
            raise InvalidParameterError("alpha and gamma must be >= 0")
        if self.learning_rate < 0:
            raise InvalidParameterError("learning_rate must be >= 0")
        if self.epochs < 1:
            raise InvalidParameterError("epochs must be >= 1")
        if self.hidden < 1:
            raise InvalidParameterError("hidden width must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EpochLosses:
    epoch: int
    loss_y: float
    loss_ut: float
    loss_uz: float
    disc_t_bce: float
    disc_z_mse: float


def aggregate_neighbors(graph: Graph, x: np.ndarray, mode: str) -> np.ndarray:
    """Neighbor aggregation for the convolution input (self excluded).

    "mean" averages neighbor rows; "sym" uses symmetric degree normalization
    sum_j x_j / sqrt(d_i d_j). Isolated nodes aggregate to zero either way.
    """
    if mode == "mean":
        return graph.neighbor_mean(x)
    if mode == "sym":
        inv_sqrt = np.zeros(graph.n)
        deg = graph.degrees
        nz = deg > 0
        inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
        scaled = x * inv_sqrt[:, None]
        return graph.neighbor_sum(scaled) * inv_sqrt[:, None]
    raise InvalidParameterError(f"unknown aggregation mode {mode!r}")


class RelationalModel:
    """Trainable estimator of E[Y | own features, neighbor features, t, z]."""

    def __init__(self, d: int, hidden: int = 16,
                 rng: np.random.Generator | None = None,
                 aggregation: str = "mean"):
        if rng is None:
            rng = np.random.default_rng(0)
        if aggregation not in ("mean", "sym"):
            raise InvalidParameterError(f"unknown aggregation mode {aggregation!r}")
        self.d = d
        self.hidden = hidden
        self.aggregation = aggregation
        self.gcn = Linear(rng, d, hidden)
        self.encoder = Linear(rng, d + hidden, hidden)
        self.predictor = Mlp(rng, [hidden + 2, MLP_WIDTH, MLP_WIDTH, 1])
        self.disc_t = Mlp(rng, [hidden, MLP_WIDTH, MLP_WIDTH, 1])
        self.disc_z = Mlp(rng, [hidden + 1, MLP_WIDTH, MLP_WIDTH, 1])
        self._predictor_cache = None

    # ---- pure inference -------------------------------------------------
    def _check_inputs(self, graph: Graph, x: np.ndarray):
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.d:
            raise ShapeError(f"features must be (n, {self.d}), got {x.shape}")
        if x.shape[0] != graph.n:
            raise ShapeError(f"feature rows {x.shape[0]} != graph n {graph.n}")
        return x

    def representation(self, graph: Graph, x: np.ndarray) -> np.ndarray:
        """Hidden representation phi for every node (no caches touched)."""
        x = self._check_inputs(graph, x)
        g = np.maximum(self.gcn.apply(aggregate_neighbors(graph, x, self.aggregation)), 0.0)
        return np.maximum(self.encoder.apply(np.concatenate([x, g], axis=1)), 0.0)

    def outcome_from_phi(self, phi: np.ndarray, t, z) -> np.ndarray:
        """Predicted outcome probabilities given representation rows."""
        t = np.broadcast_to(np.asarray(t, dtype=float), (phi.shape[0],))
        z = np.broadcast_to(np.asarray(z, dtype=float), (phi.shape[0],))
        logits = self.predictor.apply(np.column_stack([phi, t, z]))[:, 0]
        return sigmoid(logits)

    def forward(self, graph: Graph, x: np.ndarray, t: np.ndarray, z: np.ndarray):
        """Full forward pass; returns (y_hat, phi, t_hat, z_hat)."""
        x = self._check_inputs(graph, x)
        t = np.asarray(t, dtype=float)
        z = np.asarray(z, dtype=float)
        if t.shape != (graph.n,) or z.shape != (graph.n,):
            raise ShapeError("t and z must be vectors of length n")
        phi = self.representation(graph, x)
        y_hat = self.outcome_from_phi(phi, t, z)
        t_hat = sigmoid(self.disc_t.apply(phi)[:, 0])
        z_hat = self.disc_z.apply(np.column_stack([phi, t]))[:, 0]
        return y_hat, phi, t_hat, z_hat

    # ---- cached training pass -------------------------------------------
    def _forward_train(self, graph: Graph, x: np.ndarray, t: np.ndarray,
                       z: np.ndarray) -> dict:
        x = self._check_inputs(graph, x)
        xn = aggregate_neighbors(graph, x, self.aggregation)
        g_pre = self.gcn.forward(xn)
        g_mask = g_pre > 0
        g = g_pre * g_mask
        phi_pre = self.encoder.forward(np.concatenate([x, g], axis=1))
        phi_mask = phi_pre > 0
        phi = phi_pre * phi_mask
        y_logit = self.predictor.forward(np.column_stack([phi, t, z]))[:, 0]
        t_logit = self.disc_t.forward(phi)[:, 0]
        z_hat = self.disc_z.forward(np.column_stack([phi, t]))[:, 0]
        return {
            "phi": phi, "g_mask": g_mask, "phi_mask": phi_mask,
            "y_logit": y_logit, "t_logit": t_logit, "z_hat": z_hat,
        }

    def _backward_encoder(self, dphi: np.ndarray, tape: dict) -> None:
        d_enc_in = self.encoder.backward(dphi * tape["phi_mask"])
        dg = d_enc_in[:, self.d:]
        self.gcn.backward(dg * tape["g_mask"])

    # ---- parameter bookkeeping -------------------------------------------
    GROUPS = ("gcn", "encoder", "predictor", "disc_t", "disc_z")

    def named_params(self, groups=GROUPS):
        out = []
        for name in groups:
            part = getattr(self, name)
            if isinstance(part, Linear):
                out.extend(part.named_params(name))
            else:
                out.extend(part.named_params(name))
        return out

    def zero_grads(self, groups=GROUPS) -> None:
        for name in groups:
            part = getattr(self, name)
            if isinstance(part, Linear):
                part.zero_grad()
            else:
                part.zero_grad()


def train(
    model: RelationalModel,
    dataset: Dataset,
    config: TrainingConfig,
    rng: np.random.Generator,
):
    """Two-step adversarial training on one observed network, full batch.

    Each epoch first fits the discriminators (BCE for the treatment head, MSE
    for the exposure head), then freezes them, draws fresh uniform targets c,
    and updates the outcome head with the factual BCE while the convolution
    and encoder descend the combined loss
    loss_y + alpha * mean((t_hat - 0.5)^2) + gamma * mean((z_hat - c)^2).

    Returns the model and the per-epoch loss trace.
    """
    graph = dataset.instance.graph
    x = dataset.instance.features
    t, z, y = dataset.t, dataset.z, dataset.y
    n = graph.n
    opt = Adam(config.learning_rate)
    disc_params = model.named_params(("disc_t", "disc_z"))
    main_params = model.named_params(("gcn", "encoder", "predictor"))
    trace: list[EpochLosses] = []
    for epoch in range(config.epochs):
        # Step 1: make the discriminators as predictive as possible.
        tape = model._forward_train(graph, x, t, z)
        disc_t_bce = bce_with_logits(tape["t_logit"], t)
        disc_z_mse = float(np.mean((tape["z_hat"] - z) ** 2))
        model.zero_grads(("disc_t", "disc_z"))
        model.disc_t.backward(bce_with_logits_grad(tape["t_logit"], t)[:, None])
        model.disc_z.backward((2.0 * (tape["z_hat"] - z) / n)[:, None])
        opt.step(disc_params)

        # Step 2: freeze discriminators, fit outcomes, uniform the heads.
        c = rng.uniform(0.0, 1.0, n)
        tape = model._forward_train(graph, x, t, z)
        t_hat = sigmoid(tape["t_logit"])
        loss_y = bce_with_logits(tape["y_logit"], y)
        loss_ut = float(np.mean((t_hat - 0.5) ** 2))
        loss_uz = float(np.mean((tape["z_hat"] - c) ** 2))
        model.zero_grads()
        d_pred_in = model.predictor.backward(
            bce_with_logits_grad(tape["y_logit"], y)[:, None]
        )
        dphi = d_pred_in[:, : model.hidden].copy()
        dt_logit = config.alpha * 2.0 * (t_hat - 0.5) * t_hat * (1.0 - t_hat) / n
        dphi += model.disc_t.backward(dt_logit[:, None])
        dz_hat = config.gamma * 2.0 * (tape["z_hat"] - c) / n
        dphi += model.disc_z.backward(dz_hat[:, None])[:, : model.hidden]
        model._backward_encoder(dphi, tape)
        opt.step(main_params)

        losses = EpochLosses(epoch, loss_y, loss_ut, loss_uz, disc_t_bce, disc_z_mse)
        if not all(np.isfinite(v) for v in
                   (loss_y, loss_ut, loss_uz, disc_t_bce, disc_z_mse)):
            raise TrainingDivergedError(epoch)
        trace.append(losses)
    model._predictor_cache = None
    return model, trace


def outcome_bce(model: RelationalModel, dataset: Dataset) -> float:
    """Factual-outcome BCE of the model on a dataset (model selection metric)."""
    y_hat, _, _, _ = model.forward(
        dataset.instance.graph, dataset.instance.features, dataset.t, dataset.z
    )
    eps = 1e-12
    y = dataset.y
    return float(-np.mean(y * np.log(y_hat + eps) + (1 - y) * np.log(1 - y_hat + eps)))


class RelationalPredictor:
    """Binds a trained model to one (graph, features) pair for fast prediction.

    The representation phi and the all-control reference outcomes depend only
    on the graph and features, so they are computed once; per-allocation
    prediction is then a single pass through the outcome head.
    """

    def __init__(self, model: RelationalModel, graph: Graph, features: np.ndarray):
        self.model = model
        self.graph = graph
        self.phi = model.representation(graph, features)
        self.reference = model.outcome_from_phi(self.phi, 0.0, 0.0)

    def outcomes(self, nodes, t, z) -> np.ndarray:
        """Predicted outcome probabilities for `nodes` at their (t_i, z_i)."""
        return self.model.outcome_from_phi(self.phi[nodes], t, z)

    def itte(self, t: np.ndarray) -> np.ndarray:
        z = exposure(self.graph, t)
        full = self.model.outcome_from_phi(self.phi, t, z)
        return full - self.reference

    def tte(self, t: np.ndarray) -> float:
        return float(self.itte(t).sum())


def _predictor_for(model: RelationalModel, graph: Graph,
                   features: np.ndarray) -> RelationalPredictor:
    key = (id(graph), id(features))
    cached = model._predictor_cache
    if cached is not None and cached[0] == key:
        return cached[1]
    predictor = RelationalPredictor(model, graph, features)
    model._predictor_cache = (key, predictor)
    return predictor


def predict_itte(model: RelationalModel, graph: Graph, features: np.ndarray,
                 t: np.ndarray) -> np.ndarray:
    """Estimated per-node total effect of allocation t vs the all-control world."""
    return _predictor_for(model, graph, features).itte(np.asarray(t))


def predict_tte(model: RelationalModel, graph: Graph, features: np.ndarray,
                t: np.ndarray) -> float:
    """Estimated total treatment effect: the sum of per-node estimates."""
    return float(predict_itte(model, graph, features, t).sum())


def write_loss_trace(trace: list[EpochLosses], path) -> None:
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("epoch,loss_y,loss_ut,loss_uz,disc_t_bce,disc_z_mse\n")
        for row in trace:
            fh.write(
                f"{row.epoch},{row.loss_y!r},{row.loss_ut!r},{row.loss_uz!r},"
                f"{row.disc_t_bce!r},{row.disc_z_mse!r}\n"
            )


def save_checkpoint(model: RelationalModel, path, config: TrainingConfig | None = None,
                    seed: int | None = None) -> None:
    """Self-describing JSON checkpoint: shapes, flat row-major params, config."""
    params = {}
    for name, value, _ in model.named_params():
        params[name] = {"shape": list(value.shape), "data": value.ravel().tolist()}
    payload = {
        "kind": "relational",
        "d": model.d,
        "hidden": model.hidden,
        "aggregation": model.aggregation,
        "params": params,
        "config": config.to_dict() if config is not None else None,
        "seed": seed,
    }
    Path(path).write_text(json.dumps(payload) + "\n", encoding="utf-8")


def load_checkpoint(path) -> RelationalModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("kind") != "relational":
        raise InvalidParameterError(f"not a relational checkpoint: {path}")
    model = RelationalModel(
        d=payload["d"], hidden=payload["hidden"],
        aggregation=payload.get("aggregation", "mean"),
    )
    by_name = {name: value for name, value, _ in model.named_params()}
    for name, spec in payload["params"].items():
        target = by_name[name]
        data = np.asarray(spec["data"], dtype=float).reshape(spec["shape"])
        if data.shape != target.shape:
            raise ShapeError(f"checkpoint shape mismatch for {name}")
        target[...] = data
    return model
