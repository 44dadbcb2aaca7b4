"""Adam optimizer over module parameters."""
import logging
from typing import Dict, List, Tuple

import numpy as np

from ssg_toolkit.sgpn.layers import Module
from ssg_toolkit.sgpn.tensor import Tensor

logger = logging.getLogger(__name__)


class Adam:
    def __init__(self, params: List[Tensor], lr: float = 1e-4, betas: Tuple[float, float] = (0.9, 0.999),
                 eps: float = 1e-8):
        if lr <= 0:
            raise ValueError(f"Learning rate must be positive, got {lr}")
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.steps = 0
        self._m: Dict[int, np.ndarray] = {}
        self._v: Dict[int, np.ndarray] = {}

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self) -> None:
        self.steps += 1
        bias1 = 1.0 - self.beta1 ** self.steps
        bias2 = 1.0 - self.beta2 ** self.steps
        for k, p in enumerate(self.params):
            if p.grad is None:
                continue
            m = self._m.get(k, np.zeros_like(p.data))
            v = self._v.get(k, np.zeros_like(p.data))
            m = self.beta1 * m + (1.0 - self.beta1) * p.grad
            v = self.beta2 * v + (1.0 - self.beta2) * p.grad * p.grad
            self._m[k], self._v[k] = m, v
            p.data = p.data - self.lr * (m / bias1) / (np.sqrt(v / bias2) + self.eps)


def backward_and_step(model: Module, loss: Tensor, optimizer: Adam) -> Module:
    """Fill every parameter gradient from ``loss`` and apply one optimizer step."""
    optimizer.zero_grad()
    loss.backward()
    for p in model.parameters():
        if p.grad is None:
            p.grad = np.zeros_like(p.data)
    optimizer.step()
    return model
