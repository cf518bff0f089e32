from collections import OrderedDict
from typing import Dict, Iterator, Tuple

import numpy as np

from navgen.errors import ShapeError
from navgen.ndgrad import tensor as T
from navgen.ndgrad.tensor import Tensor, parameter


class Module:
    """Parameter container; attributes holding parameters or sub-modules are discovered in assignment order."""

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Tensor]]:
        for key, value in vars(self).items():
            if isinstance(value, Tensor) and value.requires_grad:
                yield f"{prefix}{key}", value
            elif isinstance(value, Module):
                yield from value.named_parameters(prefix=f"{prefix}{key}.")

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def state_dict(self) -> Dict[str, np.ndarray]:
        return OrderedDict((name, p.data.copy()) for name, p in self.named_parameters())

    def load_state_dict(self, state: Dict[str, np.ndarray]):
        params = dict(self.named_parameters())
        missing = sorted(set(params) - set(state))
        unexpected = sorted(set(state) - set(params))
        if missing or unexpected:
            raise ShapeError(f"state mismatch: missing {missing}, unexpected {unexpected}")
        for name, p in params.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != p.shape:
                raise ShapeError(f"{name}: checkpoint shape {value.shape} does not match {p.shape}")
            p.data = value.copy()

    def num_parameters(self) -> int:
        return int(sum(p.size for p in self.parameters()))


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class Linear(Module):
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, bias: bool = True, zero: bool = False):
        weight = np.zeros((in_dim, out_dim)) if zero else glorot(rng, in_dim, out_dim)
        self.weight = parameter(weight, "weight")
        self.bias = parameter(np.zeros(out_dim), "bias") if bias else None

    def __call__(self, x) -> Tensor:
        y = T.matmul(x, self.weight)
        return y + self.bias if self.bias is not None else y


class Embedding(Module):
    def __init__(self, num: int, dim: int, rng: np.random.Generator):
        self.table = parameter(rng.normal(0.0, 0.1, size=(num, dim)), "table")

    def __call__(self, ids) -> Tensor:
        return T.embedding_lookup(self.table, ids)


class GRUCell(Module):
    """Gated recurrent cell over a batch: x (B, in), h (B, H) -> (B, H)."""

    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator):
        self.hidden = hidden
        self.w_in = parameter(glorot(rng, in_dim, 3 * hidden), "w_in")
        self.w_hid = parameter(np.concatenate([glorot(rng, hidden, hidden) for _ in range(3)], axis=1), "w_hid")
        self.bias = parameter(np.zeros(3 * hidden), "bias")

    def __call__(self, x, h) -> Tensor:
        H = self.hidden
        gx = T.matmul(x, self.w_in) + self.bias
        gh = T.matmul(h, self.w_hid)
        z = T.sigmoid(T.slice(gx, 1, 0, H) + T.slice(gh, 1, 0, H))
        r = T.sigmoid(T.slice(gx, 1, H, 2 * H) + T.slice(gh, 1, H, 2 * H))
        n = T.tanh(T.slice(gx, 1, 2 * H, 3 * H) + r * T.slice(gh, 1, 2 * H, 3 * H))
        return (1.0 - z) * n + z * h
