import itertools

import numpy as np
import pytest
from scipy.spatial.distance import cdist

from ssg_toolkit.geometry.extract import center_normalize, instance_bbox, instance_points, pair_points
from ssg_toolkit.geometry.io import (
    UNKNOWN_CLASS,
    load_scene,
    read_camera,
    read_ply,
    write_camera,
    write_ply,
)
from ssg_toolkit.geometry.relations import (
    DEFAULT_THRESHOLDS,
    comparative_relations,
    extract_graph,
    lowest_z,
    support_candidates,
    support_predicate,
)
from ssg_toolkit.geometry.render import render_graph_2d, render_instance_image, visible_pixel_counts
from ssg_toolkit.geometry.scene import BBox3, CameraPose, Scene, look_at, rotate_about_vertical
from ssg_toolkit.synth.generator import level_view
from ssg_toolkit.utils.errors import DataError, DegeneratePair, EmptyPointSet, UnknownInstance

from conftest import CABINET, CUP, FLOOR, TABLE, grid_box, make_scene, node

ROOM_TRIPLES = {
    (TABLE, "standing on", FLOOR), (CABINET, "standing on", FLOOR), (CUP, "standing on", TABLE),
    (TABLE, "left", CABINET), (CABINET, "right", TABLE),
    (TABLE, "same material as", CABINET), (CABINET, "same material as", TABLE),
    (TABLE, "darker than", CABINET),
}

SWAPPED = {"left": "right", "right": "left", "front": "behind", "behind": "front"}


def brute_force_support(scene: Scene, radius: float, fraction: float):
    """Support pairs from all pairwise point distances."""
    ids = list(scene.instance_ids)
    points = {i: scene.points[scene.point_indices(i)] for i in ids}
    pairs = set()
    for a, b in itertools.permutations(ids, 2):
        if a in scene.floor_ids:
            continue
        if lowest_z(points[a], fraction) <= points[b][:, 2].mean():
            continue
        if cdist(points[a], points[b]).min() <= radius:
            pairs.add((a, b))
    supported = {a for a, _ in pairs}
    for wall in scene.wall_ids:
        if wall not in supported:
            pairs.update((wall, f) for f in scene.floor_ids)
    return pairs


class TestSceneTypes:
    def test_bbox(self):
        box = BBox3.of(np.array([[0, 0, 0], [1, 2, 3]]))
        assert box.volume == pytest.approx(6.0)
        np.testing.assert_allclose(box.center, [0.5, 1.0, 1.5])
        other = BBox3(np.array([2.0, 0, 0]), np.array([3.0, 1, 1]))
        assert box.distance_to(other) == pytest.approx(1.0)
        assert box.distance_to(box) == 0.0

    def test_look_at_axes(self, front_view):
        np.testing.assert_allclose(front_view.rotation[0], [1.0, 0.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(front_view.center, [0.8, -2.0, 0.5], atol=1e-12)
        pixels, depth = front_view.project(np.array([[0.8, 0.8, 0.5]]))
        np.testing.assert_allclose(pixels[0], [front_view.cx, front_view.cy], atol=1e-6)
        assert depth[0] == pytest.approx(2.8)

    def test_rotation_orbits_pivot(self, front_view):
        turned = rotate_about_vertical(front_view, (0.8, 0.8, 0.5), np.pi)
        np.testing.assert_allclose(turned.center, [0.8, 3.6, 0.5], atol=1e-9)
        np.testing.assert_allclose(turned.rotation[0], [-1.0, 0.0, 0.0], atol=1e-9)

    def test_invalid_camera(self, front_view):
        extrinsic = np.array(front_view.extrinsic)
        extrinsic[0, 0] = 2.0
        with pytest.raises(ValueError):
            CameraPose(extrinsic, 1, 1, 0, 0, 10, 10)

    def test_mask_without_metadata(self):
        with pytest.raises(ValueError):
            Scene(np.zeros((2, 3)), np.array([1, 2]), {1: node(1, "floor")})


class TestExtraction:
    def test_instance_points(self, room):
        assert len(instance_points(room, CUP)) == 6 * 6 * 6
        with pytest.raises(UnknownInstance):
            instance_points(room, 99)

    def test_empty_instance(self, room):
        scene = Scene(room.points, room.mask, {**room.instances, 7: node(7, "lamp")})
        assert len(instance_points(scene, 7)) == 0
        with pytest.raises(EmptyPointSet):
            instance_bbox(scene, 7)

    def test_pair_points_channels(self, room):
        points, channels = pair_points(room, TABLE, CUP)
        assert set(np.unique(channels)) <= {0.0, 1.0, 2.0}
        assert (channels == 1).sum() == len(instance_points(room, TABLE))
        assert (channels == 2).sum() == len(instance_points(room, CUP))
        assert len(points) == len(channels)
        with pytest.raises(DegeneratePair):
            pair_points(room, TABLE, TABLE)

    def test_center_normalize(self):
        centered = center_normalize(np.array([[1.0, 2, 3], [3.0, 4, 5]]))
        np.testing.assert_allclose(centered.mean(axis=0), 0.0)
        with pytest.raises(EmptyPointSet):
            center_normalize(np.zeros((0, 3)))


class TestRelations:
    def test_support_pairs(self, room):
        assert support_candidates(room) == {(TABLE, FLOOR), (CABINET, FLOOR), (CUP, TABLE)}

    def test_room_graph(self, room):
        assert set(extract_graph(room).triples()) == ROOM_TRIPLES

    def test_without_view_no_directions(self, room):
        scene = Scene(room.points, room.mask, room.instances, scene_id="room")
        triples = set(extract_graph(scene).triples())
        assert triples == {t for t in ROOM_TRIPLES if t[1] not in SWAPPED}

    def test_turning_the_camera_swaps_directions(self, room, front_view):
        turned = rotate_about_vertical(front_view, (0.8, 0.8, 0.5), np.pi)
        triples = set(extract_graph(room, view=turned).triples())
        assert (TABLE, "right", CABINET) in triples
        assert (CABINET, "left", TABLE) in triples
        assert (TABLE, "left", CABINET) not in triples

    def test_close_by(self, front_view):
        scene = make_scene([
            (node(1, "floor"), grid_box((0.0, 0.0, -0.01), (1.6, 1.6, -0.01), 0.04)),
            (node(2, "box"), grid_box((0.2, 0.2, 0.005), (0.4, 0.4, 0.205), 0.05)),
            (node(3, "box"), grid_box((0.2, 0.6, 0.005), (0.4, 0.8, 0.205), 0.05)),
        ], view=front_view)
        triples = set(extract_graph(scene).triples())
        assert {(2, "close by", 3), (3, "close by", 2), (2, "front", 3), (3, "behind", 2)} <= triples
        assert (2, "same as", 3) in triples
        assert not {t for t in triples if t[1] in ("left", "right")}

    def test_lying_and_hanging(self):
        scene = make_scene([
            (node(1, "floor"), grid_box((0.0, 0.0, -0.01), (2.0, 2.0, -0.01), 0.04)),
            (node(2, "wall"), grid_box((0.0, 2.0, 0.0), (2.0, 2.1, 2.0), 0.1)),
            (node(3, "table"), grid_box((0.5, 0.5, 0.005), (1.0, 1.0, 0.405), 0.05)),
            (node(4, "book"), grid_box((0.6, 0.6, 0.41), (0.8, 0.8, 0.43), 0.02)),
            (node(5, "picture"), grid_box((0.8, 1.91, 1.2), (1.2, 1.99, 1.6), 0.04)),
        ])
        assert support_predicate(scene, 4, 3) == "lying on"
        assert support_predicate(scene, 5, 2) == "hanging on"
        triples = set(extract_graph(scene).triples())
        assert {(2, "standing on", 1), (3, "standing on", 1), (4, "lying on", 3),
                (5, "hanging on", 2)} <= triples

    def test_comparative_size(self):
        nodes = {1: node(1, "box", "black"), 2: node(2, "box", "black")}
        triples = comparative_relations(nodes, {1: 2.0, 2: 1.0}, [(1, 2)])
        assert {(1, "bigger than", 2), (2, "smaller than", 1)} <= triples
        assert not {t for t in triples if t[1] == "darker than"}
        assert comparative_relations(nodes, {1: 1.4, 2: 1.0}, [(1, 2)]) == {(1, "same as", 2), (2, "same as", 1)}

    def test_predicate_filter(self, room):
        graph = extract_graph(room, predicates=["left", "right"])
        assert set(graph.triples()) == {(TABLE, "left", CABINET), (CABINET, "right", TABLE)}
        assert graph.node_ids == (FLOOR, TABLE, CABINET, CUP)

    def test_support_matches_brute_force(self, generated):
        for scene, _ in generated:
            expected = brute_force_support(scene, DEFAULT_THRESHOLDS.support_radius, DEFAULT_THRESHOLDS.lowest_fraction)
            assert set(support_candidates(scene)) == expected


class TestRender:
    def test_all_visible_keeps_graph(self, room):
        graph = extract_graph(room)
        assert render_graph_2d(graph, room, room.reference_view, min_pixels=0) == graph

    def test_hidden_nodes_are_dropped(self, room):
        graph = extract_graph(room)
        away = look_at((0.8, -2.0, 0.5), (0.8, -4.0, 0.5))
        assert all(count == 0 for count in visible_pixel_counts(room, away).values())
        rendered = render_graph_2d(graph, room, away, min_pixels=1)
        assert rendered.nodes == ()
        assert rendered.edges == ()

    def test_opposite_view_mirrors_directions(self, generated):
        for scene, graph in generated:
            view = level_view((3.5, 3.5))
            opposite = rotate_about_vertical(view, (1.75, 1.75, 1.2), np.pi)
            seen = set(render_graph_2d(graph, scene, view, min_pixels=0).triples())
            mirrored = set(render_graph_2d(graph, scene, opposite, min_pixels=0).triples())
            assert {(s, SWAPPED.get(p, p), o) for s, p, o in seen} == mirrored

    def test_instance_image(self, room):
        image = render_instance_image(room, room.reference_view)
        assert image.size == (room.reference_view.width, room.reference_view.height)
        assert len(set(image.getdata())) > 1


class TestFiles:
    def test_ply_round_trip(self, room, tmp_path):
        path = write_ply(tmp_path / "room.ply", room.points, room.mask, "room")
        points, mask, scene_id = read_ply(path)
        np.testing.assert_allclose(points, room.points, atol=1e-6)
        np.testing.assert_array_equal(mask, room.mask)
        assert scene_id == "room"

    def test_scene_without_graph(self, room, tmp_path):
        path = write_ply(tmp_path / "room.ply", room.points, room.mask, "room")
        scene = load_scene(path)
        assert scene.instance_ids == (FLOOR, TABLE, CABINET, CUP)
        assert {scene.label(i) for i in scene.instance_ids} == {UNKNOWN_CLASS}

    def test_scene_with_graph(self, room, tmp_path):
        graph = extract_graph(room)
        path = write_ply(tmp_path / "room.ply", room.points, room.mask, "room")
        assert load_scene(path, graph).label(CUP) == "cup"
        with pytest.raises(DataError):
            load_scene(path, graph.subgraph([FLOOR]))

    def test_camera_round_trip(self, front_view, tmp_path):
        view = read_camera(write_camera(tmp_path / "cam.json", front_view))
        np.testing.assert_allclose(view.extrinsic, front_view.extrinsic)
        assert (view.fx, view.width) == (front_view.fx, front_view.width)

    def test_malformed_files(self, tmp_path):
        bad = tmp_path / "bad.ply"
        bad.write_text("ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\n"
                       "property float z\nproperty int instance_id\nend_header\n0 0 0 1\n", encoding="ascii")
        with pytest.raises(DataError, match="announces 2"):
            read_ply(bad)
        with pytest.raises(DataError):
            read_ply(tmp_path / "missing.ply")
        camera = tmp_path / "cam.json"
        camera.write_text('{"fx": 1}', encoding="utf-8")
        with pytest.raises(DataError):
            read_camera(camera)
