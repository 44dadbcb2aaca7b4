"""Scene graph data model: nodes, multi-predicate edges and graphs."""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, Iterator, Mapping, Optional, Tuple

from ssg_toolkit.core.attributes import Attribute
from ssg_toolkit.core.hierarchy import ClassHierarchy
from ssg_toolkit.utils.errors import UnknownNode

logger = logging.getLogger(__name__)

SUPPORT_PREDICATES = ("standing on", "lying on", "hanging on")
DIRECTIONAL_PREDICATES = ("left", "right", "front", "behind")
PROXIMITY_PREDICATES = DIRECTIONAL_PREDICATES + ("close by",)
COMPARATIVE_PREDICATES = (
    "bigger than", "smaller than", "same shape as", "same material as", "darker than", "same as",
)
ALL_PREDICATES = SUPPORT_PREDICATES + PROXIMITY_PREDICATES + COMPARATIVE_PREDICATES

# Predicate as seen from the other endpoint.
MIRRORED_PREDICATES = {
    "left": "right", "right": "left", "front": "behind", "behind": "front",
    "close by": "close by", "bigger than": "smaller than", "smaller than": "bigger than",
    "same shape as": "same shape as", "same material as": "same material as", "same as": "same as",
}

Triple = Tuple[int, str, int]


@dataclass(frozen=True)
class NodeInstance:
    """A 3D object instance with its class hierarchy and attributes."""
    id: int
    hierarchy: ClassHierarchy
    attributes: FrozenSet[Attribute] = frozenset()

    def __post_init__(self):
        if self.id <= 0:
            raise ValueError(f"Node id must be positive, got {self.id}")
        object.__setattr__(self, "attributes", frozenset(self.attributes))

    @property
    def label(self) -> str:
        return self.hierarchy.label


@dataclass(frozen=True)
class Edge:
    """Directed edge carrying one or more predicates."""
    subject_id: int
    object_id: int
    predicates: FrozenSet[str]

    def __post_init__(self):
        if self.subject_id == self.object_id:
            raise ValueError(f"Self edge on node {self.subject_id}")
        object.__setattr__(self, "predicates", frozenset(self.predicates))
        if not self.predicates:
            raise ValueError(f"Edge {self.subject_id}->{self.object_id} has no predicates")

    @property
    def key(self) -> Tuple[int, int]:
        return (self.subject_id, self.object_id)


@dataclass(frozen=True)
class SceneGraph:
    """Immutable scene graph. Nodes are kept sorted by id, edges by (subject, object)."""
    scene_id: str
    nodes: Tuple[NodeInstance, ...] = ()
    edges: Tuple[Edge, ...] = ()
    _by_id: Dict[int, NodeInstance] = field(init=False, repr=False, compare=False, hash=False)
    _by_key: Dict[Tuple[int, int], Edge] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        nodes = tuple(sorted(self.nodes, key=lambda n: n.id))
        by_id = {n.id: n for n in nodes}
        if len(by_id) != len(nodes):
            raise ValueError(f"Duplicate node ids in graph {self.scene_id}")

        merged: Dict[Tuple[int, int], FrozenSet[str]] = {}
        for edge in self.edges:
            for endpoint in edge.key:
                if endpoint not in by_id:
                    raise UnknownNode(f"Edge {edge.key} references unknown node {endpoint}")
            merged[edge.key] = merged.get(edge.key, frozenset()) | edge.predicates
        edges = tuple(Edge(s, o, p) for (s, o), p in sorted(merged.items()))

        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_by_key", {e.key: e for e in edges})

    def node(self, node_id: int) -> NodeInstance:
        try:
            return self._by_id[node_id]
        except KeyError:
            raise UnknownNode(f"Node {node_id} not in graph {self.scene_id}") from None

    def has_node(self, node_id: int) -> bool:
        return node_id in self._by_id

    def edge(self, subject_id: int, object_id: int) -> Optional[Edge]:
        return self._by_key.get((subject_id, object_id))

    @property
    def node_ids(self) -> Tuple[int, ...]:
        return tuple(n.id for n in self.nodes)

    def triples(self) -> Iterator[Triple]:
        """All (subject id, predicate, object id) triples in sorted order."""
        for edge in self.edges:
            for predicate in sorted(edge.predicates):
                yield (edge.subject_id, predicate, edge.object_id)

    def label_triples(self) -> Iterator[Tuple[str, str, str]]:
        for s, p, o in self.triples():
            yield (self._by_id[s].label, p, self._by_id[o].label)

    def with_scene_id(self, scene_id: str) -> "SceneGraph":
        return replace(self, scene_id=scene_id)

    def subgraph(self, node_ids: Iterable[int]) -> "SceneGraph":
        """Induced subgraph on ``node_ids``."""
        keep = set(node_ids)
        return SceneGraph(
            self.scene_id,
            tuple(n for n in self.nodes if n.id in keep),
            tuple(e for e in self.edges if e.subject_id in keep and e.object_id in keep),
        )

    def relabel(self, mapping: Mapping[int, int]) -> "SceneGraph":
        """Apply a bijection on node ids."""
        return SceneGraph(
            self.scene_id,
            tuple(replace(n, id=mapping[n.id]) for n in self.nodes),
            tuple(Edge(mapping[e.subject_id], mapping[e.object_id], e.predicates) for e in self.edges),
        )

    def filter_predicates(self, keep: Iterable[str]) -> "SceneGraph":
        allowed = frozenset(keep)
        edges = []
        for e in self.edges:
            predicates = e.predicates & allowed
            if predicates:
                edges.append(Edge(e.subject_id, e.object_id, predicates))
        return SceneGraph(self.scene_id, self.nodes, tuple(edges))


def merge_edge(graph: SceneGraph, subject_id: int, object_id: int, predicate: str) -> SceneGraph:
    """Add ``predicate`` to the (subject, object) edge, creating it if needed."""
    for node_id in (subject_id, object_id):
        if not graph.has_node(node_id):
            raise UnknownNode(f"Node {node_id} not in graph {graph.scene_id}")
    existing = graph.edge(subject_id, object_id)
    if existing is not None and predicate in existing.predicates:
        return graph
    return SceneGraph(graph.scene_id, graph.nodes, graph.edges + (Edge(subject_id, object_id, {predicate}),))


def remove_node(graph: SceneGraph, node_id: int) -> SceneGraph:
    """Drop a node and every edge touching it."""
    graph.node(node_id)
    return graph.subgraph(i for i in graph.node_ids if i != node_id)


class GraphBuilder:
    """Mutable accumulator for building a SceneGraph in one pass."""

    def __init__(self, scene_id: str):
        self.scene_id = scene_id
        self._nodes: Dict[int, NodeInstance] = {}
        self._predicates: Dict[Tuple[int, int], set] = {}

    def add_node(self, node: NodeInstance) -> "GraphBuilder":
        self._nodes[node.id] = node
        return self

    def add_triple(self, subject_id: int, predicate: str, object_id: int) -> "GraphBuilder":
        for node_id in (subject_id, object_id):
            if node_id not in self._nodes:
                raise UnknownNode(f"Node {node_id} not in graph {self.scene_id}")
        self._predicates.setdefault((subject_id, object_id), set()).add(predicate)
        return self

    def add_triples(self, triples: Iterable[Triple]) -> "GraphBuilder":
        for s, p, o in triples:
            self.add_triple(s, p, o)
        return self

    def build(self) -> SceneGraph:
        edges = tuple(Edge(s, o, frozenset(p)) for (s, o), p in self._predicates.items())
        return SceneGraph(self.scene_id, tuple(self._nodes.values()), edges)
