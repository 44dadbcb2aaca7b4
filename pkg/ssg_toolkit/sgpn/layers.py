"""Trainable building blocks on top of :mod:`ssg_toolkit.sgpn.tensor`."""
import logging
from typing import Dict, Iterator, List, Sequence, Tuple

import numpy as np

from ssg_toolkit.sgpn.tensor import Tensor, parameter

logger = logging.getLogger(__name__)


class Module:
    """Container whose parameters are discovered from its attributes.

    Attributes holding a parameter tensor, another module or a list of modules
    contribute to :meth:`named_parameters`, in attribute definition order.
    """

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Tensor]]:
        for attr, value in vars(self).items():
            name = f"{prefix}{attr}"
            if isinstance(value, Tensor) and value.requires_grad:
                yield name, value
            elif isinstance(value, Module):
                yield from value.named_parameters(f"{name}.")
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{name}.{i}.")

    def parameters(self) -> List[Tensor]:
        return [p for _, p in self.named_parameters()]

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        params = dict(self.named_parameters())
        missing, unexpected = set(params) - set(state), set(state) - set(params)
        if missing or unexpected:
            raise KeyError(f"State mismatch: missing {sorted(missing)}, unexpected {sorted(unexpected)}")
        for name, p in params.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != p.shape:
                raise ValueError(f"Parameter {name}: expected shape {p.shape}, got {value.shape}")
            p.data = value.copy()

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())


class Linear(Module):
    """Affine map ``x @ W + b`` acting on the last axis."""

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        bound = np.sqrt(1.0 / in_features)
        self.weight = parameter(rng.uniform(-bound, bound, (in_features, out_features)))
        self.bias = parameter(rng.uniform(-bound, bound, out_features))

    def __call__(self, x: Tensor) -> Tensor:
        return x @ self.weight + self.bias


class LayerNorm(Module):
    """Per-sample normalization over the last axis with a learned gain and offset."""

    def __init__(self, width: int, eps: float = 1e-5):
        self.gain = parameter(np.ones(width))
        self.offset = parameter(np.zeros(width))
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        centered = x - x.mean(axis=-1, keepdims=True)
        variance = (centered * centered).mean(axis=-1, keepdims=True)
        return centered / (variance + self.eps) ** 0.5 * self.gain + self.offset


class MLP(Module):
    """Linear -> LayerNorm -> ReLU blocks, ending in a plain linear layer."""

    def __init__(self, widths: Sequence[int], rng: np.random.Generator):
        if len(widths) < 2:
            raise ValueError(f"An MLP needs at least input and output widths, got {widths}")
        self.linears = [Linear(a, b, rng) for a, b in zip(widths[:-1], widths[1:])]
        self.norms = [LayerNorm(w) for w in widths[1:-1]]

    def __call__(self, x: Tensor) -> Tensor:
        for linear, norm in zip(self.linears[:-1], self.norms):
            x = norm(linear(x)).relu()
        return self.linears[-1](x)
