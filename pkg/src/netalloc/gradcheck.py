"""Finite-difference validation of the hand-written backward passes."""

from __future__ import annotations

import numpy as np

from .dgp import Dataset
from .errors import InvalidParameterError
from .numerics import bce_with_logits, bce_with_logits_grad, sigmoid
from .relational import RelationalModel
from .tarnet import TarnetModel

RELATIONAL_LOSSES = ("outcome", "uniform_t", "uniform_z", "disc_t", "disc_z")

# Relative error uses an absolute floor so exactly-zero analytic gradients
# (dead ReLU units, parameters a loss does not touch) compare against
# finite-difference roundoff instead of dividing by ~0.
_ERROR_FLOOR = 1e-3


def _relational_loss(model, graph, x, t, z, y, which, c) -> tuple[float, dict]:
    tape = model._forward_train(graph, x, t, z)
    n = graph.n
    if which == "outcome":
        value = bce_with_logits(tape["y_logit"], y)
    elif which == "uniform_t":
        t_hat = sigmoid(tape["t_logit"])
        value = float(np.mean((t_hat - 0.5) ** 2))
    elif which == "uniform_z":
        value = float(np.mean((tape["z_hat"] - c) ** 2))
    elif which == "disc_t":
        value = bce_with_logits(tape["t_logit"], t)
    elif which == "disc_z":
        value = float(np.mean((tape["z_hat"] - z) ** 2))
    else:
        raise InvalidParameterError(
            f"unknown loss {which!r}, expected one of {RELATIONAL_LOSSES}"
        )
    return value, tape


def _relational_grads(model, graph, x, t, z, y, which, c):
    """Analytic gradients of the selected loss w.r.t. every parameter."""
    value, tape = _relational_loss(model, graph, x, t, z, y, which, c)
    n = graph.n
    model.zero_grads()
    h = model.hidden
    if which == "outcome":
        d_in = model.predictor.backward(
            bce_with_logits_grad(tape["y_logit"], y)[:, None]
        )
        dphi = d_in[:, :h].copy()
    elif which == "uniform_t":
        t_hat = sigmoid(tape["t_logit"])
        d_logit = 2.0 * (t_hat - 0.5) * t_hat * (1.0 - t_hat) / n
        dphi = model.disc_t.backward(d_logit[:, None]).copy()
    elif which == "disc_t":
        dphi = model.disc_t.backward(
            bce_with_logits_grad(tape["t_logit"], t)[:, None]
        ).copy()
    elif which == "uniform_z":
        d_hat = 2.0 * (tape["z_hat"] - c) / n
        dphi = model.disc_z.backward(d_hat[:, None])[:, :h].copy()
    else:  # disc_z
        d_hat = 2.0 * (tape["z_hat"] - z) / n
        dphi = model.disc_z.backward(d_hat[:, None])[:, :h].copy()
    model._backward_encoder(dphi, tape)
    grads = {name: grad.copy() for name, _, grad in model.named_params()}
    return value, grads


def max_relative_error(named_params, loss_fn, analytic: dict, step: float) -> float:
    """Central finite differences over every scalar parameter."""
    worst = 0.0
    for name, value, _ in named_params:
        flat = value.ravel()
        ga_flat = analytic[name].ravel()
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + step
            up = loss_fn()
            flat[idx] = orig - step
            down = loss_fn()
            flat[idx] = orig
            g_fd = (up - down) / (2.0 * step)
            g_an = ga_flat[idx]
            err = abs(g_an - g_fd) / max(abs(g_an), abs(g_fd), _ERROR_FLOOR)
            worst = max(worst, err)
    return worst


def gradient_check(model: RelationalModel, dataset: Dataset,
                   loss: str = "outcome", step: float = 1e-5,
                   c: np.ndarray | None = None) -> float:
    """Max relative error between analytic and finite-difference gradients.

    `c` fixes the uniform targets used by the exposure-balancing loss; when
    omitted, a deterministic draw is used so the check is reproducible.
    """
    graph = dataset.instance.graph
    x = dataset.instance.features
    t, z, y = dataset.t, dataset.z, dataset.y
    if c is None:
        c = np.random.default_rng(20240229).uniform(0.0, 1.0, graph.n)
    _, analytic = _relational_grads(model, graph, x, t, z, y, loss, c)

    def loss_value():
        return _relational_loss(model, graph, x, t, z, y, loss, c)[0]

    return max_relative_error(model.named_params(), loss_value, analytic, step)


def tarnet_gradient_check(model: TarnetModel, features, t, y,
                          step: float = 1e-5) -> float:
    """Same finite-difference check for the individual-only estimator."""
    features = np.asarray(features, dtype=float)
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    treated = t == 1

    def compute(backward: bool):
        rep = model.rep.forward(features)
        logit0 = model.head0.forward(rep)[:, 0]
        logit1 = model.head1.forward(rep)[:, 0]
        y_logit = np.where(treated, logit1, logit0)
        value = bce_with_logits(y_logit, y)
        if backward:
            d_logit = bce_with_logits_grad(y_logit, y)
            model.zero_grads()
            d_rep = model.head0.backward((d_logit * ~treated)[:, None])
            d_rep = d_rep + model.head1.backward((d_logit * treated)[:, None])
            model.rep.backward(d_rep)
        return value

    compute(backward=True)
    analytic = {name: grad.copy() for name, _, grad in model.named_params()}
    return max_relative_error(
        model.named_params(), lambda: compute(backward=False), analytic, step
    )
