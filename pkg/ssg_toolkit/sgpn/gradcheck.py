"""Analytic gradients versus central finite differences."""
import logging
from typing import Callable, Dict, Optional

import numpy as np

from ssg_toolkit.sgpn.layers import Module
from ssg_toolkit.sgpn.tensor import Tensor

logger = logging.getLogger(__name__)


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-12) -> float:
    diff = np.linalg.norm(analytic - numeric)
    return float(diff / max(np.linalg.norm(analytic) + np.linalg.norm(numeric), floor))


def gradient_check(model: Module, loss_fn: Callable[[], Tensor], eps: float = 1e-4,
                   max_entries: Optional[int] = None, seed: int = 0) -> Dict[str, float]:
    """Relative error per parameter group.

    ``loss_fn`` must rebuild the loss from the current parameter values and be
    deterministic. With ``max_entries`` only that many randomly chosen entries
    of each group are perturbed.
    """
    rng = np.random.default_rng(seed)
    model.zero_grad()
    loss_fn().backward()
    errors = {}
    for name, p in model.named_parameters():
        analytic_full = p.grad if p.grad is not None else np.zeros_like(p.data)
        entries = np.arange(p.size)
        if max_entries is not None and p.size > max_entries:
            entries = np.sort(rng.choice(p.size, size=max_entries, replace=False))
        numeric = np.empty(len(entries))
        for k, entry in enumerate(entries):
            index = np.unravel_index(entry, p.shape)
            original = p.data[index]
            p.data[index] = original + eps
            plus = loss_fn().item()
            p.data[index] = original - eps
            minus = loss_fn().item()
            p.data[index] = original
            numeric[k] = (plus - minus) / (2.0 * eps)
        errors[name] = relative_error(analytic_full.reshape(-1)[entries], numeric)
        logger.debug(f"Gradient check {name}: relative error {errors[name]:.2e} over {len(entries)} entries")
    return errors
