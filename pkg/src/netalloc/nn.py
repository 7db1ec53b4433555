"""Dense layers, ReLU MLPs, and Adam with hand-written backward passes.

Inference goes through `apply` (pure, no caches) so trained models can be read
concurrently; training uses `forward`/`backward`, which cache activations on
the layer objects. Gradients accumulate into per-layer buffers so one backward
sweep can combine several losses before an optimizer step.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError


class Linear:
    """y = x @ w + b with Glorot-uniform weights and zero biases."""

    def __init__(self, rng: np.random.Generator, fan_in: int, fan_out: int):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        self.w = rng.uniform(-bound, bound, (fan_in, fan_out))
        self.b = np.zeros(fan_out)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)
        self._x: np.ndarray | None = None

    @property
    def fan_in(self) -> int:
        return self.w.shape[0]

    @property
    def fan_out(self) -> int:
        return self.w.shape[1]

    def apply(self, x: np.ndarray) -> np.ndarray:
        if x.shape[-1] != self.fan_in:
            raise ShapeError(
                f"expected input width {self.fan_in}, got {x.shape[-1]}"
            )
        return x @ self.w + self.b

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return self.apply(x)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        if self._x is None:
            raise RuntimeError("backward called before forward")
        self.gw += self._x.T @ dout
        self.gb += dout.sum(axis=0)
        return dout @ self.w.T

    def zero_grad(self) -> None:
        self.gw[:] = 0.0
        self.gb[:] = 0.0

    def named_params(self, prefix: str):
        return [(f"{prefix}.w", self.w, self.gw), (f"{prefix}.b", self.b, self.gb)]


class Mlp:
    """Stack of Linears with ReLU between layers and a linear last layer."""

    def __init__(self, rng: np.random.Generator, sizes: list[int]):
        if len(sizes) < 2:
            raise ShapeError("an MLP needs at least input and output sizes")
        self.layers = [Linear(rng, a, b) for a, b in zip(sizes[:-1], sizes[1:])]
        self._masks: list[np.ndarray] = []

    def apply(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers[:-1]:
            x = np.maximum(layer.apply(x), 0.0)
        return self.layers[-1].apply(x)

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._masks = []
        for layer in self.layers[:-1]:
            pre = layer.forward(x)
            mask = pre > 0
            self._masks.append(mask)
            x = pre * mask
        return self.layers[-1].forward(x)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        d = self.layers[-1].backward(dout)
        for layer, mask in zip(reversed(self.layers[:-1]), reversed(self._masks)):
            d = layer.backward(d * mask)
        return d

    def zero_grad(self) -> None:
        for layer in self.layers:
            layer.zero_grad()

    def named_params(self, prefix: str):
        out = []
        for idx, layer in enumerate(self.layers):
            out.extend(layer.named_params(f"{prefix}.{idx}"))
        return out


class Adam:
    """Adam updates applied in place; decay rates 0.9/0.999, epsilon 1e-8.

    Moment buffers and step counters are kept per parameter tensor, so
    parameter groups updated on different schedules stay correctly
    bias-corrected.
    """

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self._state: dict[str, tuple[np.ndarray, np.ndarray, int]] = {}

    def step(self, named_params) -> None:
        for name, value, grad in named_params:
            m, v, t = self._state.get(
                name, (np.zeros_like(value), np.zeros_like(value), 0)
            )
            t += 1
            m = self.beta1 * m + (1.0 - self.beta1) * grad
            v = self.beta2 * v + (1.0 - self.beta2) * grad * grad
            m_hat = m / (1.0 - self.beta1**t)
            v_hat = v / (1.0 - self.beta2**t)
            value -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
            self._state[name] = (m, v, t)
