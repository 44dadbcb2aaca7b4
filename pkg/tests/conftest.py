"""Shared fixtures: a hand-built room, small generated scenes and a tiny network config."""
from typing import Sequence

import numpy as np
import pytest

from ssg_toolkit.core.attributes import Attribute
from ssg_toolkit.core.graph import GraphBuilder, NodeInstance
from ssg_toolkit.core.hierarchy import ClassHierarchy
from ssg_toolkit.geometry.scene import Scene, look_at
from ssg_toolkit.sgpn.model import ModelConfig
from ssg_toolkit.synth.generator import SceneSpec, generate_scene

FLOOR, TABLE, CABINET, CUP = 1, 2, 3, 4


def grid_box(lo: Sequence[float], hi: Sequence[float], step: float) -> np.ndarray:
    """Solid regular grid of points filling an axis-aligned box."""
    axes = [np.arange(a, b + 1e-9, step) for a, b in zip(lo, hi)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)


def node(instance_id: int, label: str, *static: str) -> NodeInstance:
    return NodeInstance(instance_id, ClassHierarchy.single(label), frozenset(Attribute.static(s) for s in static))


def make_scene(parts, scene_id="room", view=None) -> Scene:
    """Scene from (NodeInstance, points) parts."""
    points = np.concatenate([p for _, p in parts])
    mask = np.concatenate([np.full(len(p), n.id) for n, p in parts])
    return Scene(points, mask, {n.id: n for n, _ in parts}, scene_id=scene_id, reference_view=view)


@pytest.fixture
def front_view():
    """Level camera south of the room looking north; camera x is world x."""
    return look_at((0.8, -2.0, 0.5), (0.8, 0.8, 0.5))


@pytest.fixture
def room(front_view):
    """Floor slab, a table and a cabinet side by side on it, and a cup on the table."""
    return make_scene([
        (node(FLOOR, "floor"), grid_box((0.0, 0.0, -0.01), (1.6, 1.6, -0.01), 0.04)),
        (node(TABLE, "table", "brown", "wooden"), grid_box((0.1, 0.6, 0.005), (0.5, 1.0, 0.405), 0.05)),
        (node(CABINET, "cabinet", "white", "wooden"), grid_box((1.0, 0.6, 0.005), (1.4, 1.0, 0.405), 0.05)),
        (node(CUP, "cup", "red", "ceramic"), grid_box((0.2, 0.7, 0.41), (0.3, 0.8, 0.51), 0.02)),
    ], view=front_view)


@pytest.fixture
def toy_graph():
    builder = GraphBuilder("toy")
    for n in (node(1, "floor"), node(2, "chair"), node(3, "chair"), node(4, "table")):
        builder.add_node(n)
    builder.add_triples([
        (2, "standing on", 1), (3, "standing on", 1), (4, "standing on", 1),
        (2, "left", 3), (3, "right", 2), (2, "same as", 3), (3, "same as", 2),
        (4, "bigger than", 2),
    ])
    return builder.build()


@pytest.fixture(scope="session")
def generated():
    """A few small generated (scene, graph) pairs."""
    return [
        generate_scene(SceneSpec(seed=seed, node_range=(4, 6), num_classes=12, scene_id=f"scene{seed}"))
        for seed in range(4)
    ]


@pytest.fixture
def tiny_config():
    return ModelConfig(point_widths=(8, 8), feature_width=8, gcn_layers=2, head_widths=(8,), num_points=16)
