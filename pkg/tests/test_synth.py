import json

import numpy as np
import pytest

from ssg_toolkit.core.attributes import AttributeKind
from ssg_toolkit.core.multisets import to_multisets
from ssg_toolkit.core.serialization import serialize_graph
from ssg_toolkit.geometry.relations import extract_graph, support_candidates
from ssg_toolkit.retrieval.changes import changes_to_dict, detect_changes, is_unchanged
from ssg_toolkit.synth.dataset import GenerationStats, generate_dataset, load_generated, read_changes
from ssg_toolkit.synth.generator import MAX_CLASSES, Layout, SceneSpec, generate_scene, room_extent_of, sample_view
from ssg_toolkit.synth.priors import CLASS_PRIORS, PRIORS_BY_NAME
from ssg_toolkit.synth.rescan import RescanSpec, diff_graphs, generate_rescan, log_to_deltas, perturb
from ssg_toolkit.synth.shapes import MAX_POINTS, MIN_POINTS
from ssg_toolkit.utils.errors import DataError, InfeasibleSpec

from conftest import grid_box, make_scene, node


class TestSceneSpec:
    @pytest.mark.parametrize("kwargs", [
        {"node_range": (1, 4)},
        {"node_range": (6, 5)},
        {"num_classes": 0},
        {"num_classes": MAX_CLASSES + 1},
        {"predicates": ()},
        {"predicates": ("on top of",)},
        {"room_extent": (1.0, 3.0)},
    ])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SceneSpec(**kwargs)

    def test_rescan_spec(self):
        with pytest.raises(ValueError):
            RescanSpec(ops=("teleport",))
        with pytest.raises(ValueError):
            RescanSpec(op_count=-1)


class TestGenerator:
    def test_deterministic(self):
        spec = SceneSpec(seed=11, num_classes=12, scene_id="s")
        scene_a, graph_a = generate_scene(spec)
        scene_b, graph_b = generate_scene(spec)
        np.testing.assert_array_equal(scene_a.points, scene_b.points)
        np.testing.assert_array_equal(scene_a.mask, scene_b.mask)
        assert serialize_graph(graph_a) == serialize_graph(graph_b)

    def test_seeds_differ(self):
        scene_a, _ = generate_scene(SceneSpec(seed=1))
        scene_b, _ = generate_scene(SceneSpec(seed=2))
        assert scene_a.points.shape != scene_b.points.shape or not np.allclose(scene_a.points, scene_b.points)

    def test_scene_shape(self, generated):
        names = {p.name for p in CLASS_PRIORS[:12]}
        for scene, graph in generated:
            assert 4 <= len(graph.nodes) <= 6
            assert scene.floor_ids
            assert graph.node_ids == scene.instance_ids
            for i in scene.instance_ids:
                assert MIN_POINTS <= len(scene.point_indices(i)) <= MAX_POINTS
                assert scene.label(i) in names

    def test_graph_is_extraction_of_geometry(self, generated):
        for scene, graph in generated:
            assert extract_graph(scene) == graph

    def test_every_object_is_supported(self, generated):
        for scene, _ in generated:
            supported = {a for a, _ in support_candidates(scene)}
            assert supported == set(scene.instance_ids) - set(scene.floor_ids)

    def test_nodes_carry_hierarchy_and_affordances(self, generated):
        for _, graph in generated:
            for n in graph.nodes:
                assert n.hierarchy.labels[-1] == "entity"
                if n.label == "table":
                    assert any(a.kind is AttributeKind.AFFORDANCE and a.name == "placing items on"
                               for a in n.attributes)

    def test_large_rooms(self):
        for seed in (0, 1):
            spec = SceneSpec(seed=seed, num_classes=20, node_range=(10, 14), room_extent=(5.5, 5.5))
            scene, graph = generate_scene(spec)
            assert 10 <= len(graph.nodes) <= 14
            np.testing.assert_allclose(room_extent_of(scene), (5.5, 5.5), atol=0.2)
            eyes = np.array([sample_view(scene, np.random.default_rng(k)).center for k in range(40)])
            assert eyes[:, :2].min() >= 0.2 - 1e-9
            assert eyes[:, :2].max() <= 5.3 + 1e-9
            assert eyes[:, 0].max() > 3.5

    def test_predicate_vocabulary(self):
        keep = ("standing on", "left", "right")
        _, graph = generate_scene(SceneSpec(seed=5, predicates=keep))
        assert {p for _, p, _ in graph.triples()} <= set(keep)


class TestRescan:
    def test_change_log_matches_graph_difference(self, generated):
        for k, (scene, graph) in enumerate(generated):
            result = perturb(scene, graph, RescanSpec(seed=100 + k, op_count=3, num_classes=12))
            assert len(result.log) == 3
            expected = changes_to_dict(*detect_changes(to_multisets(graph), to_multisets(result.graph)))
            assert changes_to_dict(*log_to_deltas(result.log)) == expected
            assert result.graph == extract_graph(result.scene)

    def test_ids_are_not_reused(self, generated):
        for k, (scene, graph) in enumerate(generated):
            result = perturb(scene, graph, RescanSpec(seed=7 + k, ops=("remove", "add"), op_count=6, num_classes=12))
            used = set(scene.instance_ids)
            for record in result.log:
                for i in record.added_nodes:
                    assert i not in used
                    used.add(i)
            expected = changes_to_dict(*detect_changes(to_multisets(graph), to_multisets(result.graph)))
            assert changes_to_dict(*log_to_deltas(result.log)) == expected

    def test_layout_ids_survive_removal(self):
        layout = Layout(np.array([3.5, 3.5]))
        box = grid_box((0, 0, 0), (0.2, 0.2, 0.2), 0.1)
        first = layout.add(node(layout.next_id(), "floor"), box, None)
        second = layout.add(node(layout.next_id(), "chair"), box, first)
        for table in (layout.nodes, layout.points, layout.boxes, layout.supporter):
            table.pop(second, None)
        assert layout.next_id() == second + 1
        layout.add(node(9, "chair"), box, first)
        assert layout.next_id() == 10

    def test_zero_ops_keeps_graph(self, generated):
        scene, graph = generated[1]
        result = perturb(scene, graph, RescanSpec(seed=3, op_count=0, scene_id="same"))
        assert result.log == ()
        assert result.graph == graph.with_scene_id("same")
        assert is_unchanged(*detect_changes(to_multisets(graph), to_multisets(result.graph)))

    def test_toggle_changes_state_only(self):
        for seed in range(30):
            scene, graph = generate_scene(SceneSpec(seed=seed, node_range=(6, 9), num_classes=12))
            if any(PRIORS_BY_NAME[n.label].states for n in graph.nodes):
                break
        result = perturb(scene, graph, RescanSpec(seed=1, ops=("toggle",), op_count=1))
        record = result.log[0]
        assert record.op == "toggle"
        before = graph.node(record.instance_id)
        after = result.graph.node(record.instance_id)

        def states(n):
            return {a.name for a in n.attributes if a.kind is AttributeKind.STATE}

        assert states(before) != states(after)
        assert before.label == after.label
        np.testing.assert_array_equal(result.scene.points, scene.points)

    def test_generate_rescan_keeps_static_attributes(self, generated):
        scene, graph = generated[2]
        same_scene, same_graph = generate_rescan(scene, graph, RescanSpec(op_count=0))
        np.testing.assert_array_equal(same_scene.points, scene.points)
        assert set(same_graph.triples()) == set(graph.triples())

        _, rescan = generate_rescan(scene, graph, RescanSpec(seed=4, ops=("move", "toggle"), op_count=3))

        def static(n):
            return {a for a in n.attributes if a.kind is AttributeKind.STATIC}

        for n in graph.nodes:
            assert static(rescan.node(n.id)) == static(n)

    def test_scene_without_floor(self):
        scene = make_scene([(node(1, "table"), grid_box((0, 0, 0), (0.2, 0.2, 0.2), 0.1))])
        with pytest.raises(InfeasibleSpec):
            perturb(scene, extract_graph(scene), RescanSpec())

    def test_diff_graphs(self, toy_graph):
        reduced = toy_graph.subgraph([1, 2, 4])
        record = diff_graphs(toy_graph, reduced, "remove", 3)
        assert record.removed_nodes == (3,)
        assert record.added_nodes == ()
        assert set(record.removed_edges) == {(3, 1), (2, 3), (3, 2)}
        assert (3, "same as", 2) in record.removed_triples


class TestDataset:
    def test_pool_on_disk(self, tmp_path):
        updates = []
        stats = generate_dataset(
            3, 9, tmp_path, rescans=1,
            scene_spec=SceneSpec(node_range=(4, 6), num_classes=12),
            rescan_spec=RescanSpec(op_count=2, num_classes=12),
            progress_callback=lambda progress, s: updates.append((progress, s.scenes)),
        )
        assert isinstance(stats, GenerationStats)
        assert (stats.scenes, stats.rescans) == (3, 3)
        assert updates[-1] == (1.0, 3)
        assert [u[1] for u in updates] == [1, 2, 3]
        for k in range(3):
            for suffix in (".ply", ".graph.json", ".camera.json", ".rescan0.ply", ".rescan0.changes.json"):
                assert (tmp_path / f"scene{k}{suffix}").is_file()

        scene, graph = load_generated(tmp_path, "scene1")
        assert graph.scene_id == "scene1"
        assert scene.reference_view is not None
        _, rescan = load_generated(tmp_path, "scene1.rescan0")
        changes = read_changes(tmp_path / "scene1.rescan0.changes.json")
        expected = changes_to_dict(*detect_changes(to_multisets(graph), to_multisets(rescan)))
        assert {k: changes[k] for k in ("removed", "added")} == expected
        assert len(changes["ops"]) == 2

    def test_same_seed_same_files(self, tmp_path):
        spec = SceneSpec(node_range=(4, 5), num_classes=8)
        generate_dataset(2, 4, tmp_path / "a", scene_spec=spec)
        generate_dataset(2, 4, tmp_path / "b", scene_spec=spec)
        for name in ("scene0.ply", "scene1.graph.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_count_must_be_positive(self, tmp_path):
        with pytest.raises(ValueError):
            generate_dataset(0, 0, tmp_path)

    def test_malformed_change_file(self, tmp_path):
        path = tmp_path / "x.changes.json"
        path.write_text(json.dumps({"removed": {"nodes": {}}, "added": {}}), encoding="utf-8")
        with pytest.raises(DataError):
            read_changes(path)
