"""Projection of scene graphs to multisets of node classes, edges and triples."""
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Hashable, Tuple

from ssg_toolkit.core.graph import SceneGraph

Multiset = Counter

COMPONENTS = ("nodes", "edges", "triples")


@dataclass(frozen=True)
class AugmentedGraph:
    """The three multisets of a graph.

    ``edges`` holds unordered class pairs (one per connected ordered node pair),
    ``triples`` holds directed (subject class, predicate, object class) tokens.
    """
    scene_id: str
    nodes: Counter = field(default_factory=Counter)
    edges: Counter = field(default_factory=Counter)
    triples: Counter = field(default_factory=Counter)

    def components(self) -> Tuple[Counter, Counter, Counter]:
        return (self.nodes, self.edges, self.triples)

    def as_dict(self) -> Dict[str, Counter]:
        return dict(zip(COMPONENTS, self.components()))


def edge_token(subject_label: str, object_label: str) -> Tuple[str, str]:
    """Binary edges are undirected at the class level."""
    return tuple(sorted((subject_label, object_label)))


def to_multisets(graph: SceneGraph) -> AugmentedGraph:
    labels = {n.id: n.label for n in graph.nodes}
    nodes = Counter(labels.values())
    edges = Counter(edge_token(labels[e.subject_id], labels[e.object_id]) for e in graph.edges)
    triples = Counter(
        (labels[e.subject_id], p, labels[e.object_id]) for e in graph.edges for p in e.predicates
    )
    return AugmentedGraph(graph.scene_id, nodes, edges, triples)


def multiset_difference(a: Counter, b: Counter) -> Counter:
    """Multiplicity subtraction clipped at zero."""
    return a - b


def token_str(token: Hashable) -> str:
    """Stable text form of a multiset token for reports."""
    if isinstance(token, tuple):
        return "|".join(token)
    return str(token)
