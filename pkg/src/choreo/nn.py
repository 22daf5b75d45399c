"""Dense and LSTM layers on top of the tensor core.

Layers hold their parameters as leaf tensors and expose ``named_params()``
for optimizers, gradient checks and checkpointing. All forwards take and
return :class:`~choreo.tensor.Tensor` values; callers wrap raw numpy
batches in leaf tensors.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .tensor import Tensor


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class Dense:
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator,
                 activation: str | None = None, name: str = "dense"):
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.activation = activation
        self.name = name
        self.w = Tensor(glorot_uniform(rng, in_dim, out_dim))
        self.b = Tensor(np.zeros(out_dim))

    def __call__(self, x: Tensor) -> Tensor:
        y = T.matmul(x, self.w) + self.b
        if self.activation == "relu":
            return T.relu(y)
        if self.activation == "leaky_relu":
            return T.leaky_relu(y, 0.2)
        if self.activation == "tanh":
            return T.tanh(y)
        if self.activation is None or self.activation == "linear":
            return y
        raise ValueError(f"unknown activation {self.activation!r}")

    def named_params(self):
        return [(f"{self.name}.w", self.w), (f"{self.name}.b", self.b)]


class LstmLayer:
    """Single LSTM layer; gates packed as [input, forget, output, candidate].

    The forget-gate bias starts at 1.0 so cells retain state early in
    training.
    """

    def __init__(self, input_dim: int, hidden_dim: int, rng: np.random.Generator,
                 name: str = "lstm"):
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.name = name
        self.w = Tensor(glorot_uniform(rng, input_dim + hidden_dim, 4 * hidden_dim))
        bias = np.zeros(4 * hidden_dim)
        bias[hidden_dim:2 * hidden_dim] = 1.0
        self.b = Tensor(bias)

    def initial_state(self, batch: int):
        h = Tensor(np.zeros((batch, self.hidden_dim)))
        c = Tensor(np.zeros((batch, self.hidden_dim)))
        return h, c

    def step(self, x: Tensor, h: Tensor, c: Tensor):
        hd = self.hidden_dim
        gates = T.matmul(T.concat([x, h], axis=1), self.w) + self.b
        i = T.sigmoid(gates[:, :hd])
        f = T.sigmoid(gates[:, hd:2 * hd])
        o = T.sigmoid(gates[:, 2 * hd:3 * hd])
        g = T.tanh(gates[:, 3 * hd:])
        c_new = f * c + i * g
        h_new = o * T.tanh(c_new)
        return h_new, c_new

    def named_params(self):
        return [(f"{self.name}.w", self.w), (f"{self.name}.b", self.b)]


class LstmStack:
    """Stacked LSTM layers consuming a (batch, time, features) sequence."""

    def __init__(self, input_dim: int, units: tuple[int, ...], rng: np.random.Generator,
                 name: str = "lstm"):
        self.layers = []
        dim = input_dim
        for idx, width in enumerate(units):
            self.layers.append(LstmLayer(dim, width, rng, name=f"{name}{idx}"))
            dim = width
        self.output_dim = dim

    def run(self, steps: list[Tensor]):
        """Thread a list of (batch, features) tensors through all layers.

        Returns the per-step outputs of the top layer.
        """
        batch = steps[0].shape[0]
        states = [layer.initial_state(batch) for layer in self.layers]
        outputs = []
        for x in steps:
            for idx, layer in enumerate(self.layers):
                h, c = states[idx]
                h, c = layer.step(x, h, c)
                states[idx] = (h, c)
                x = h
            outputs.append(x)
        return outputs

    def named_params(self):
        out = []
        for layer in self.layers:
            out.extend(layer.named_params())
        return out


def batch_steps(batch: np.ndarray) -> list[Tensor]:
    """Split a (batch, time, features) array into per-step leaf tensors."""
    return [Tensor(batch[:, t, :]) for t in range(batch.shape[1])]
