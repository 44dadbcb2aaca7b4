"""Support, proximity and comparative relations derived from geometry and attributes."""
import itertools
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Set, Tuple

import numpy as np
from scipy.spatial import cKDTree

from ssg_toolkit.core.attributes import AttributeKind, BRIGHTNESS_RANK, attribute_of_category
from ssg_toolkit.core.graph import GraphBuilder, NodeInstance, SceneGraph, Triple
from ssg_toolkit.geometry.extract import instance_boxes, instance_centroids
from ssg_toolkit.geometry.scene import BBox3, CameraPose, Scene, WALL_CLASS
from ssg_toolkit.utils.decorators import log_exceptions

logger = logging.getLogger(__name__)

SupportPairs = FrozenSet[Tuple[int, int]]


@dataclass(frozen=True)
class ExtractionThresholds:
    """Geometric thresholds in meters (``size_ratio`` is a volume ratio)."""
    left_right: float = 0.1
    front_behind: float = 0.1
    close_by: float = 0.5
    size_ratio: float = 1.5
    min_pixels: int = 50
    support_radius: float = 0.05
    lowest_fraction: float = 0.1
    lying_ratio: float = 0.5


DEFAULT_THRESHOLDS = ExtractionThresholds()


def lowest_z(points: np.ndarray, fraction: float = 0.1) -> float:
    """z value below which ``fraction`` of the points lie."""
    return float(np.quantile(points[:, 2], fraction))


def support_candidates(scene: Scene, radius: float = 0.05, lowest_fraction: float = 0.1) -> SupportPairs:
    """(supported, supporter) pairs of touching instances where the supported one rests above.

    The floor is never supported. Walls without a detected supporter rest on the floor.
    """
    floors = set(scene.floor_ids)
    boxes = instance_boxes(scene)
    ids = [i for i in scene.instance_ids if i in boxes]
    points = {i: scene.points[scene.point_indices(i)] for i in ids}
    centroid_z = {i: float(points[i][:, 2].mean()) for i in ids}
    low_z = {i: lowest_z(points[i], lowest_fraction) for i in ids}
    trees: Dict[int, cKDTree] = {}

    pairs: Set[Tuple[int, int]] = set()
    for a, b in itertools.permutations(ids, 2):
        if a in floors or low_z[a] <= centroid_z[b]:
            continue
        if boxes[a].distance_to(boxes[b]) > radius:
            continue
        if b not in trees:
            trees[b] = cKDTree(points[b])
        distances, _ = trees[b].query(points[a], k=1)
        if float(distances.min()) <= radius:
            pairs.add((a, b))

    supported = {a for a, _ in pairs}
    for wall in scene.wall_ids:
        if wall not in supported and wall not in floors:
            pairs.update((wall, floor) for floor in floors)
    logger.debug(f"Scene {scene.scene_id}: {len(pairs)} support pairs")
    return frozenset(pairs)


def support_predicate(scene: Scene, supported: int, supporter: int, lying_ratio: float = 0.5) -> str:
    """Semantic support label from the pose of the supported object."""
    if scene.label(supporter) == WALL_CLASS:
        return "hanging on"
    if supporter in scene.floor_ids:
        return "standing on"
    extent = BBox3.of(scene.points[scene.point_indices(supported)]).extent
    if extent[2] < lying_ratio * min(extent[0], extent[1]):
        return "lying on"
    return "standing on"


def sibling_pairs(support: Iterable[Tuple[int, int]]) -> FrozenSet[Tuple[int, int]]:
    """Unordered (low id, high id) pairs sharing at least one supporter."""
    children: Dict[int, Set[int]] = {}
    for supported, supporter in support:
        children.setdefault(supporter, set()).add(supported)
    pairs = set()
    for group in children.values():
        pairs.update(itertools.combinations(sorted(group), 2))
    return frozenset(pairs)


def proximity_relations(scene: Scene, support: Iterable[Tuple[int, int]], view: Optional[CameraPose],
                        thresholds: ExtractionThresholds = DEFAULT_THRESHOLDS) -> FrozenSet[Triple]:
    """Directional and close-by triples between siblings, in both directions.

    Without a view only ``close by`` is emitted.
    """
    centroids = instance_centroids(scene)
    triples: Set[Triple] = set()
    for a, b in sibling_pairs(support):
        if a not in centroids or b not in centroids:
            continue
        if np.linalg.norm(centroids[a] - centroids[b]) < thresholds.close_by:
            triples.update({(a, "close by", b), (b, "close by", a)})
        if view is None:
            continue
        ca, cb = view.to_camera(np.stack([centroids[a], centroids[b]]))
        dx, dz = ca[0] - cb[0], ca[2] - cb[2]
        if dx < -thresholds.left_right:
            triples.update({(a, "left", b), (b, "right", a)})
        elif dx > thresholds.left_right:
            triples.update({(a, "right", b), (b, "left", a)})
        if dz < -thresholds.front_behind:
            triples.update({(a, "front", b), (b, "behind", a)})
        elif dz > thresholds.front_behind:
            triples.update({(a, "behind", b), (b, "front", a)})
    return frozenset(triples)


def comparative_relations(nodes: Mapping[int, NodeInstance], volumes: Mapping[int, float],
                          pairs: Iterable[Tuple[int, int]],
                          thresholds: ExtractionThresholds = DEFAULT_THRESHOLDS) -> FrozenSet[Triple]:
    """Triples from comparing sizes and attributes of the given node pairs."""
    triples: Set[Triple] = set()
    for a, b in pairs:
        na, nb = nodes[a], nodes[b]
        va, vb = volumes.get(a), volumes.get(b)
        if va is not None and vb is not None and va > 0 and vb > 0:
            if va / vb > thresholds.size_ratio:
                triples.update({(a, "bigger than", b), (b, "smaller than", a)})
            elif vb / va > thresholds.size_ratio:
                triples.update({(b, "bigger than", a), (a, "smaller than", b)})

        for category, predicate in (("shape", "same shape as"), ("material", "same material as")):
            value_a = attribute_of_category(na.attributes, category)
            if value_a is not None and value_a == attribute_of_category(nb.attributes, category):
                triples.update({(a, predicate, b), (b, predicate, a)})

        rank_a = BRIGHTNESS_RANK.get(attribute_of_category(na.attributes, "color"))
        rank_b = BRIGHTNESS_RANK.get(attribute_of_category(nb.attributes, "color"))
        if rank_a is not None and rank_b is not None and rank_a != rank_b:
            darker, lighter = (a, b) if rank_a < rank_b else (b, a)
            triples.add((darker, "darker than", lighter))

        static_a = {x for x in na.attributes if x.kind is AttributeKind.STATIC}
        static_b = {x for x in nb.attributes if x.kind is AttributeKind.STATIC}
        if na.label == nb.label and static_a == static_b:
            triples.update({(a, "same as", b), (b, "same as", a)})
    return frozenset(triples)


def instance_volumes(scene: Scene) -> Dict[int, float]:
    return {i: box.volume for i, box in instance_boxes(scene).items()}


@log_exceptions
def extract_graph(scene: Scene, view: Optional[CameraPose] = None,
                  thresholds: ExtractionThresholds = DEFAULT_THRESHOLDS,
                  predicates: Optional[Iterable[str]] = None) -> SceneGraph:
    """Full relation extraction for a scene.

    Directional predicates use ``view`` or, failing that, the scene's reference view.
    """
    view = view if view is not None else scene.reference_view
    support = support_candidates(scene, thresholds.support_radius, thresholds.lowest_fraction)

    builder = GraphBuilder(scene.scene_id)
    for node in scene.instances.values():
        builder.add_node(node)
    for supported, supporter in sorted(support):
        label = support_predicate(scene, supported, supporter, thresholds.lying_ratio)
        builder.add_triple(supported, label, supporter)
    builder.add_triples(proximity_relations(scene, support, view, thresholds))
    builder.add_triples(
        comparative_relations(scene.instances, instance_volumes(scene), sibling_pairs(support), thresholds)
    )
    graph = builder.build()
    if predicates is not None:
        graph = graph.filter_predicates(predicates)
    logger.debug(
        f"Extracted graph {scene.scene_id}: {len(graph.nodes)} nodes, "
        f"{sum(1 for _ in graph.triples())} triples"
    )
    return graph
