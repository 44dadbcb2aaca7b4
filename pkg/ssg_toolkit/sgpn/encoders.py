"""Shared per-point encoders with max pooling for instances and instance pairs."""
import logging
from typing import Sequence

import numpy as np

from ssg_toolkit.geometry.extract import center_normalize
from ssg_toolkit.sgpn.layers import Linear, Module
from ssg_toolkit.sgpn.tensor import Tensor
from ssg_toolkit.utils.errors import EmptyPointSet

logger = logging.getLogger(__name__)

NODE_CHANNELS = 3
EDGE_CHANNELS = 4


class PointEncoder(Module):
    """Shared affine+ReLU layers per point, max pool over points, linear projection."""

    def __init__(self, in_channels: int, widths: Sequence[int], out_width: int, rng: np.random.Generator):
        sizes = [in_channels, *widths]
        self.in_channels = in_channels
        self.shared = [Linear(a, b, rng) for a, b in zip(sizes[:-1], sizes[1:])]
        self.projection = Linear(sizes[-1], out_width, rng)

    def __call__(self, points: Tensor) -> Tensor:
        """(sets, points, channels) -> (sets, out_width)."""
        if points.shape[-1] != self.in_channels:
            raise ValueError(f"Expected {self.in_channels} channels, got {points.shape[-1]}")
        x = points
        for layer in self.shared:
            x = layer(x).relu()
        return self.projection(x.max(axis=-2))


def sample_points(points: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform subsample of ``count`` rows, drawn with replacement when there are fewer."""
    if len(points) == 0:
        raise EmptyPointSet("Cannot sample from an empty point set")
    idx = rng.choice(len(points), size=count, replace=len(points) < count)
    return points[idx]


def _check(points: np.ndarray, channels: int) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or len(points) == 0:
        raise EmptyPointSet(f"Expected a non-empty (n, {channels}) point set, got shape {points.shape}")
    return points


def encode_node(encoder: PointEncoder, points: np.ndarray) -> Tensor:
    """Feature vector of one centered instance point set."""
    points = _check(points, NODE_CHANNELS)
    return encoder(Tensor(points[None]))[0]


def encode_edge(encoder: PointEncoder, points: np.ndarray, channels: np.ndarray) -> Tensor:
    """Feature vector of one pair point set with its 0/1/2 membership channel."""
    points = _check(points, NODE_CHANNELS)
    stacked = np.column_stack([points, np.asarray(channels, dtype=float)])
    return encoder(Tensor(stacked[None]))[0]


def node_input(points: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    return sample_points(center_normalize(points), count, rng)


def edge_input(points: np.ndarray, channels: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    stacked = np.column_stack([center_normalize(points), channels])
    return sample_points(stacked, count, rng)
