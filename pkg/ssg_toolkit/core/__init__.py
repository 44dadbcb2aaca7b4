"""Scene graph data model, class hierarchies, attributes and multisets."""
from ssg_toolkit.core.attributes import Attribute, AttributeKind, derive_affordances
from ssg_toolkit.core.graph import (
    ALL_PREDICATES,
    COMPARATIVE_PREDICATES,
    DIRECTIONAL_PREDICATES,
    PROXIMITY_PREDICATES,
    SUPPORT_PREDICATES,
    Edge,
    GraphBuilder,
    NodeInstance,
    SceneGraph,
    merge_edge,
    remove_node,
)
from ssg_toolkit.core.hierarchy import ClassHierarchy, derive_hierarchy, load_hypernyms
from ssg_toolkit.core.multisets import AugmentedGraph, Multiset, to_multisets
from ssg_toolkit.core.serialization import load_graph, parse_graph, save_graph, serialize_graph
