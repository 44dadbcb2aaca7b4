"""Multiset similarity coefficients and the combined graph similarity."""
import logging
from abc import ABC, abstractmethod
from collections import Counter
from typing import Dict

from ssg_toolkit.core.multisets import AugmentedGraph

logger = logging.getLogger(__name__)

NODES_ONLY = "nodes-only"
FULL = "full"
MODES = (NODES_ONLY, FULL)


def intersection_size(a: Counter, b: Counter) -> int:
    return sum((a & b).values())


def union_size(a: Counter, b: Counter) -> int:
    return sum((a | b).values())


def jaccard(a: Counter, b: Counter) -> float:
    """|A ∩ B| / |A ∪ B| with min/max multiplicities; two empty sets are identical."""
    union = union_size(a, b)
    if union == 0:
        return 1.0
    return intersection_size(a, b) / union


def simpson(a: Counter, b: Counter) -> float:
    """|A ∩ B| / min(|A|, |B|); 0 when exactly one side is empty."""
    size_a, size_b = sum(a.values()), sum(b.values())
    if size_a == 0 and size_b == 0:
        return 1.0
    if size_a == 0 or size_b == 0:
        return 0.0
    return intersection_size(a, b) / min(size_a, size_b)


class SimilarityCoefficient(ABC):
    """Similarity between two multisets, in [0, 1]."""

    name: str

    @abstractmethod
    def __call__(self, a: Counter, b: Counter) -> float:
        pass


class JaccardCoefficient(SimilarityCoefficient):
    name = "jaccard"

    def __call__(self, a: Counter, b: Counter) -> float:
        return jaccard(a, b)


class SimpsonCoefficient(SimilarityCoefficient):
    """Overlap coefficient; saturates when one multiset is contained in the other."""
    name = "simpson"

    def __call__(self, a: Counter, b: Counter) -> float:
        return simpson(a, b)


COEFFICIENTS: Dict[str, SimilarityCoefficient] = {
    c.name: c for c in (JaccardCoefficient(), SimpsonCoefficient())
}


def get_coefficient(name) -> SimilarityCoefficient:
    if isinstance(name, SimilarityCoefficient):
        return name
    try:
        return COEFFICIENTS[name]
    except KeyError:
        raise ValueError(f"Unknown coefficient {name!r}; choose one of {sorted(COEFFICIENTS)}") from None


def graph_similarity(a: AugmentedGraph, b: AugmentedGraph, coeff="jaccard", mode: str = FULL) -> float:
    """Mean coefficient over the node, edge and triple multisets (node multiset only in nodes-only mode)."""
    coefficient = get_coefficient(coeff)
    if mode == NODES_ONLY:
        return coefficient(a.nodes, b.nodes)
    if mode != FULL:
        raise ValueError(f"Unknown mode {mode!r}; choose one of {MODES}")
    return sum(coefficient(x, y) for x, y in zip(a.components(), b.components())) / 3.0
