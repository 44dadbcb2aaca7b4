from collections import Counter

import numpy as np
import pytest

from ssg_toolkit.core.attributes import Attribute, AttributeKind, derive_affordances, with_affordances
from ssg_toolkit.core.graph import (
    ALL_PREDICATES,
    Edge,
    GraphBuilder,
    NodeInstance,
    SceneGraph,
    merge_edge,
    remove_node,
)
from ssg_toolkit.core.hierarchy import ClassHierarchy, derive_hierarchy, load_hypernyms
from ssg_toolkit.core.multisets import to_multisets
from ssg_toolkit.core.serialization import load_graph, parse_graph, save_graph, serialize_graph
from ssg_toolkit.synth.priors import HYPERNYM_FILE
from ssg_toolkit.utils.errors import CyclicHierarchy, DataError, UnknownNode

from conftest import node

LABELS = (("chair", "seat"), ("table",), ("lamp", "light"), ("cup",), ("floor",))
COLORS = ("red", "white", "brown", "black")


def random_graph(seed: int) -> SceneGraph:
    """Random ids, hierarchies, attributes and predicates."""
    rng = np.random.default_rng(seed)
    ids = [int(i) for i in rng.choice(np.arange(1, 100), size=int(rng.integers(2, 9)), replace=False)]
    builder = GraphBuilder(f"random{seed}")
    for i in ids:
        attributes = {Attribute.static(c) for c in COLORS if rng.random() < 0.3}
        if rng.random() < 0.3:
            attributes.add(Attribute.state("open"))
        builder.add_node(NodeInstance(i, ClassHierarchy(LABELS[rng.integers(len(LABELS))]), attributes))
    for _ in range(int(rng.integers(0, 12))):
        s, o = rng.choice(ids, size=2, replace=False)
        builder.add_triple(int(s), ALL_PREDICATES[rng.integers(len(ALL_PREDICATES))], int(o))
    return builder.build()


class TestHierarchy:
    def test_chain_follows_hypernyms(self):
        hypernyms = {"chair": "seat", "seat": "furniture", "furniture": "entity"}
        assert derive_hierarchy("chair", hypernyms).labels == ("chair", "seat", "furniture", "entity")

    def test_label_without_parent(self):
        hierarchy = derive_hierarchy("lamp", {})
        assert hierarchy.labels == ("lamp",)
        assert hierarchy.label == "lamp"

    def test_cycle_is_reported(self):
        with pytest.raises(CyclicHierarchy) as err:
            derive_hierarchy("a", {"a": "b", "b": "c", "c": "a"})
        assert err.value.cycle == ("a", "b", "c", "a")

    def test_builtin_map_reaches_entity(self):
        hierarchy = derive_hierarchy("desk", load_hypernyms(HYPERNYM_FILE))
        assert hierarchy.labels[0] == "desk"
        assert hierarchy.labels[-1] == "entity"

    def test_parse_skips_comments(self, tmp_path):
        path = tmp_path / "h.tsv"
        path.write_text("# comment\n\nchair\tseat\nseat\tfurniture\n", encoding="utf-8")
        assert load_hypernyms(path) == {"chair": "seat", "seat": "furniture"}

    def test_malformed_line_names_line_number(self, tmp_path):
        path = tmp_path / "h.tsv"
        path.write_text("chair\tseat\nbroken line\n", encoding="utf-8")
        with pytest.raises(DataError, match=":2:"):
            load_hypernyms(path)

    def test_conflicting_parent(self, tmp_path):
        path = tmp_path / "h.tsv"
        path.write_text("chair\tseat\nchair\tfurniture\n", encoding="utf-8")
        with pytest.raises(DataError):
            load_hypernyms(path)


class TestAttributes:
    def test_categories(self):
        assert Attribute.static("wooden").category == "material"
        assert Attribute.static("sparkly").category is None

    def test_affordances_follow_state(self):
        closed = derive_affordances("cabinet", [Attribute.state("closed")])
        opened = derive_affordances("cabinet", [Attribute.state("open")])
        assert Attribute.affordance("opening") in closed
        assert Attribute.affordance("opening") not in opened
        assert Attribute.affordance("closing") in opened
        assert Attribute.affordance("placing items on") in closed & opened

    def test_with_affordances_replaces_stale_ones(self):
        attributes = {Attribute.state("on"), Attribute.affordance("turning on")}
        result = with_affordances("lamp", attributes)
        assert Attribute.affordance("turning off") in result
        assert Attribute.affordance("turning on") not in result
        assert all(a.kind in (AttributeKind.STATE, AttributeKind.AFFORDANCE) for a in result)


class TestSceneGraph:
    def test_edges_merge_predicates(self):
        graph = SceneGraph("g", (node(1, "a"), node(2, "b")),
                           (Edge(1, 2, {"left"}), Edge(1, 2, {"close by"})))
        assert len(graph.edges) == 1
        assert graph.edge(1, 2).predicates == {"left", "close by"}

    def test_self_edge_rejected(self):
        with pytest.raises(ValueError):
            Edge(1, 1, {"left"})

    def test_unknown_endpoint(self):
        with pytest.raises(UnknownNode):
            SceneGraph("g", (node(1, "a"),), (Edge(1, 2, {"left"}),))

    def test_nodes_sorted_by_id(self):
        graph = SceneGraph("g", (node(3, "c"), node(1, "a")))
        assert graph.node_ids == (1, 3)

    def test_merge_edge(self, toy_graph):
        merged = merge_edge(toy_graph, 4, 1, "close by")
        assert merged.edge(4, 1).predicates == {"standing on", "close by"}
        assert merge_edge(merged, 4, 1, "close by") is merged
        with pytest.raises(UnknownNode):
            merge_edge(toy_graph, 4, 9, "left")

    def test_remove_node_drops_incident_edges(self, toy_graph):
        reduced = remove_node(toy_graph, 2)
        assert 2 not in reduced.node_ids
        assert all(2 not in e.key for e in reduced.edges)
        with pytest.raises(UnknownNode):
            remove_node(reduced, 2)

    def test_filter_predicates_drops_empty_edges(self, toy_graph):
        support = toy_graph.filter_predicates({"standing on"})
        assert {p for _, p, _ in support.triples()} == {"standing on"}
        assert len(support.edges) == 3

    def test_builder_rejects_unknown_node(self):
        with pytest.raises(UnknownNode):
            GraphBuilder("g").add_node(node(1, "a")).add_triple(1, "left", 2)


class TestMultisets:
    def test_components(self, toy_graph):
        augmented = to_multisets(toy_graph)
        assert augmented.nodes == Counter({"chair": 2, "floor": 1, "table": 1})
        assert augmented.edges == Counter({("chair", "floor"): 2, ("floor", "table"): 1,
                                           ("chair", "chair"): 2, ("chair", "table"): 1})
        assert augmented.triples[("chair", "same as", "chair")] == 2
        assert augmented.triples[("table", "bigger than", "chair")] == 1
        assert sum(augmented.triples.values()) == sum(1 for _ in toy_graph.triples())

    def test_edge_tokens_are_unordered(self):
        graph = SceneGraph("g", (node(1, "a"), node(2, "b")), (Edge(2, 1, {"left"}),))
        assert to_multisets(graph).edges == Counter({("a", "b"): 1})

    def test_invariant_under_relabeling(self, toy_graph, generated):
        graphs = [toy_graph, *(g for _, g in generated), *(random_graph(seed) for seed in range(5))]
        for graph in graphs:
            ids = graph.node_ids
            mapping = dict(zip(ids, [100 + 3 * k for k in reversed(range(len(ids)))]))
            relabeled = to_multisets(graph.relabel(mapping))
            assert relabeled.components() == to_multisets(graph).components()


class TestSerialization:
    def test_round_trip(self, toy_graph, tmp_path):
        labelled = SceneGraph(
            "toy",
            (node(1, "floor"),
             NodeInstance(2, ClassHierarchy(("chair", "seat")), {Attribute.static("red"), Attribute.state("tidy")})),
            (Edge(2, 1, {"standing on"}),),
        )
        for graph in (toy_graph, labelled):
            text = serialize_graph(graph)
            assert parse_graph(text) == graph
            assert serialize_graph(parse_graph(text)) == text
        path = save_graph(labelled, tmp_path / "g.graph.json")
        assert load_graph(path) == labelled

    def test_round_trip_random_graphs(self, generated):
        graphs = [*(g for _, g in generated), *(random_graph(seed) for seed in range(20))]
        for graph in graphs:
            text = serialize_graph(graph)
            assert parse_graph(text) == graph
            assert serialize_graph(parse_graph(text)) == text

    def test_malformed_documents(self, tmp_path):
        with pytest.raises(DataError):
            parse_graph("{not json")
        with pytest.raises(DataError):
            parse_graph('{"scene_id": "x", "nodes": [{"id": 1}], "edges": []}')
        with pytest.raises(DataError):
            parse_graph('{"scene_id": "x", "nodes": [], "edges": [{"subject": 1, "object": 2, "predicates": ["left"]}]}')
        with pytest.raises(DataError):
            load_graph(tmp_path / "missing.graph.json")
