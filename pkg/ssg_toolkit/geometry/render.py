"""Rendering 3D scene graphs to the 2D graph seen from a camera."""
import logging
from typing import Dict, Iterable, Optional

import numpy as np
from PIL import Image

from ssg_toolkit.core.graph import (
    PROXIMITY_PREDICATES,
    SUPPORT_PREDICATES,
    GraphBuilder,
    SceneGraph,
)
from ssg_toolkit.geometry.relations import DEFAULT_THRESHOLDS, ExtractionThresholds, proximity_relations
from ssg_toolkit.geometry.scene import CameraPose, Scene

logger = logging.getLogger(__name__)


def visible_pixel_counts(scene: Scene, view: CameraPose) -> Dict[int, int]:
    """Number of points of each instance that project inside the image with positive depth."""
    in_view = view.in_view(scene.points)
    return {i: int(in_view[scene.point_indices(i)].sum()) for i in scene.instance_ids}


def render_graph_2d(graph: SceneGraph, scene: Scene, view: CameraPose,
                    min_pixels: Optional[int] = None,
                    thresholds: ExtractionThresholds = DEFAULT_THRESHOLDS,
                    predicates: Optional[Iterable[str]] = None) -> SceneGraph:
    """The part of ``graph`` visible from ``view``.

    Support and comparative predicates are copied; proximity predicates are
    recomputed for the new viewpoint. Occlusion is ignored.
    """
    min_pixels = thresholds.min_pixels if min_pixels is None else min_pixels
    counts = visible_pixel_counts(scene, view)
    visible = {n.id for n in graph.nodes if counts.get(n.id, 0) >= min_pixels}

    builder = GraphBuilder(graph.scene_id)
    for node in graph.nodes:
        if node.id in visible:
            builder.add_node(node)

    support = set()
    for edge in graph.edges:
        if edge.subject_id not in visible or edge.object_id not in visible:
            continue
        for predicate in edge.predicates:
            if predicate in PROXIMITY_PREDICATES:
                continue
            builder.add_triple(edge.subject_id, predicate, edge.object_id)
            if predicate in SUPPORT_PREDICATES:
                support.add(edge.key)
    builder.add_triples(proximity_relations(scene, support, view, thresholds))

    rendered = builder.build()
    if predicates is not None:
        rendered = rendered.filter_predicates(predicates)
    logger.debug(
        f"Rendered {graph.scene_id}: {len(rendered.nodes)}/{len(graph.nodes)} nodes visible"
    )
    return rendered


def render_instance_image(scene: Scene, view: CameraPose, point_size: int = 2) -> Image.Image:
    """Color-coded splat image of the projected instance mask (nearest point wins)."""
    canvas = np.full((view.height, view.width, 3), 255, dtype=np.uint8)
    depth_buffer = np.full((view.height, view.width), np.inf)
    pixels, depth = view.project(scene.points)
    keep = view.in_view(scene.points)
    palette = _palette(max(scene.instance_ids, default=0) + 1)
    order = np.argsort(-depth[keep])
    for (u, v), z, instance in zip(pixels[keep][order], depth[keep][order], scene.mask[keep][order]):
        u0, v0 = int(u), int(v)
        u_lo, u_hi = max(0, u0 - point_size), min(view.width, u0 + point_size + 1)
        v_lo, v_hi = max(0, v0 - point_size), min(view.height, v0 + point_size + 1)
        patch = depth_buffer[v_lo:v_hi, u_lo:u_hi]
        closer = z < patch
        patch[closer] = z
        canvas[v_lo:v_hi, u_lo:u_hi][closer] = palette[instance]
    return Image.fromarray(canvas)


def _palette(size: int) -> np.ndarray:
    rng = np.random.default_rng(7)
    colors = rng.integers(40, 220, size=(size, 3)).astype(np.uint8)
    colors[0] = (180, 180, 180)
    return colors
