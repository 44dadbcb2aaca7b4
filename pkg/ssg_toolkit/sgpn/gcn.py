"""Triplet graph convolution with averaged messages and residual node updates."""
import logging
from typing import Sequence, Tuple

import numpy as np

from ssg_toolkit.sgpn.layers import Linear, Module
from ssg_toolkit.sgpn.tensor import Tensor, concat, split

logger = logging.getLogger(__name__)


def aggregate(psi_subject: Tensor, psi_object: Tensor, subjects: np.ndarray, objects: np.ndarray,
              num_nodes: int) -> Tensor:
    """Mean of all messages a node receives as subject or object; zero for isolated nodes."""
    segments = np.concatenate([subjects, objects]).astype(np.int64)
    counts = np.bincount(segments, minlength=num_nodes).astype(float)
    summed = concat([psi_subject, psi_object], axis=0).segment_sum(segments, num_nodes)
    return summed * (1.0 / np.maximum(counts, 1.0))[:, None]


class TripletGCNLayer(Module):
    """One round of message passing over (subject, predicate, object) triplets."""

    def __init__(self, width: int, rng: np.random.Generator):
        self.width = width
        self.g1 = Linear(3 * width, 3 * width, rng)
        self.g2 = Linear(width, width, rng)

    def __call__(self, nodes: Tensor, edges: Tensor, subjects: Sequence[int],
                 objects: Sequence[int]) -> Tuple[Tensor, Tensor]:
        subjects = np.asarray(subjects, dtype=np.int64)
        objects = np.asarray(objects, dtype=np.int64)
        if len(subjects) == 0:
            rho = Tensor(np.zeros(nodes.shape))
            return nodes + self.g2(rho).relu(), edges
        triplets = concat([nodes.take_rows(subjects), edges, nodes.take_rows(objects)], axis=1)
        psi_s, new_edges, psi_o = split(self.g1(triplets).relu(), [self.width] * 3, axis=1)
        rho = aggregate(psi_s, psi_o, subjects, objects, nodes.shape[0])
        return nodes + self.g2(rho).relu(), new_edges


class TripletGCN(Module):
    def __init__(self, width: int, depth: int, rng: np.random.Generator):
        self.layers = [TripletGCNLayer(width, rng) for _ in range(depth)]

    def __call__(self, nodes: Tensor, edges: Tensor, subjects: Sequence[int],
                 objects: Sequence[int]) -> Tuple[Tensor, Tensor]:
        for layer in self.layers:
            nodes, edges = layer(nodes, edges, subjects, objects)
        return nodes, edges
