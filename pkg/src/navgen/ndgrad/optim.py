from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from navgen.errors import ConfigError
from navgen.ndgrad.tensor import Tensor


def _check_lr(lr: float):
    if not lr > 0:
        raise ConfigError(f"learning rate must be positive, got {lr}")


def sgd_step(params: Sequence[Tensor], lr: float):
    _check_lr(lr)
    for p in params:
        if p.grad is not None:
            p.data = p.data - lr * p.grad


@dataclass
class AdamState:
    t: int = 0
    m: Dict[int, np.ndarray] = field(default_factory=dict)
    v: Dict[int, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: Sequence[Tensor],
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    state: AdamState = None,
) -> AdamState:
    """One bias-corrected Adam update; moments are keyed by parameter position."""
    _check_lr(lr)
    if not (0.0 <= beta1 < 1.0 and 0.0 <= beta2 < 1.0 and eps > 0):
        raise ConfigError(f"invalid Adam constants beta1={beta1}, beta2={beta2}, eps={eps}")
    state = state or AdamState()
    state.t += 1
    for i, p in enumerate(params):
        if p.grad is None:
            continue
        m = beta1 * state.m.get(i, np.zeros_like(p.data)) + (1.0 - beta1) * p.grad
        v = beta2 * state.v.get(i, np.zeros_like(p.data)) + (1.0 - beta2) * p.grad * p.grad
        state.m[i], state.v[i] = m, v
        m_hat = m / (1.0 - beta1**state.t)
        v_hat = v / (1.0 - beta2**state.t)
        p.data = p.data - lr * m_hat / (np.sqrt(v_hat) + eps)
    return state


def clip_grad_norm(params: Sequence[Tensor], max_norm: float) -> float:
    grads = [p.grad for p in params if p.grad is not None]
    if not grads:
        return 0.0
    norm = float(np.sqrt(np.sum([np.sum(g * g) for g in grads])))
    if max_norm and norm > max_norm:
        scale = max_norm / (norm + 1e-12)
        for p in params:
            if p.grad is not None:
                p.grad = p.grad * scale
    return norm


class Optimizer:
    def __init__(self, params: Sequence[Tensor], lr: float):
        _check_lr(lr)
        self.params: List[Tensor] = list(params)
        self.lr = lr

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    def scale_grads(self, factor: float):
        for p in self.params:
            if p.grad is not None:
                p.grad = p.grad * factor


class SGD(Optimizer):
    def step(self):
        sgd_step(self.params, self.lr)


class Adam(Optimizer):
    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        super().__init__(params, lr)
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.state = AdamState()

    def step(self):
        adam_step(self.params, self.lr, self.beta1, self.beta2, self.eps, self.state)


def make_optimizer(kind: str, params, lr: float) -> Optimizer:
    if kind == "adam":
        return Adam(params, lr=lr)
    if kind == "sgd":
        return SGD(params, lr=lr)
    raise ConfigError(f"unknown optimizer {kind!r}; expected 'adam' or 'sgd'")
