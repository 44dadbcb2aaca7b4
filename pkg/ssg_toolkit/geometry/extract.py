"""Instance and pair point-set extraction."""
import logging
from typing import Dict, Tuple

import numpy as np

from ssg_toolkit.geometry.scene import BBox3, Scene
from ssg_toolkit.utils.errors import DegeneratePair, EmptyPointSet, UnknownInstance

logger = logging.getLogger(__name__)


def _check_instance(scene: Scene, instance_id: int) -> None:
    if instance_id not in scene.instances:
        raise UnknownInstance(f"Instance {instance_id} not in scene {scene.scene_id}")


def instance_points(scene: Scene, instance_id: int) -> np.ndarray:
    """Points whose mask id equals ``instance_id``, in scene order."""
    _check_instance(scene, instance_id)
    return scene.points[scene.point_indices(instance_id)]


def instance_bbox(scene: Scene, instance_id: int) -> BBox3:
    points = instance_points(scene, instance_id)
    if len(points) == 0:
        raise EmptyPointSet(f"Instance {instance_id} has no points")
    return BBox3.of(points)


def pair_points(scene: Scene, i: int, j: int) -> Tuple[np.ndarray, np.ndarray]:
    """Points inside either instance box, with channel 1 for ``i``, 2 for ``j`` and 0 otherwise."""
    if i == j:
        raise DegeneratePair(f"Pair extraction needs two distinct instances, got {i} twice")
    box_i, box_j = instance_bbox(scene, i), instance_bbox(scene, j)
    inside = box_i.contains(scene.points) | box_j.contains(scene.points)
    mask = scene.mask[inside]
    channels = np.where(mask == i, 1, np.where(mask == j, 2, 0)).astype(float)
    return scene.points[inside], channels


def center_normalize(points: np.ndarray) -> np.ndarray:
    """Translate a point set so its centroid is the origin."""
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        raise EmptyPointSet("Cannot center an empty point set")
    return points - points.mean(axis=0)


def instance_centroids(scene: Scene) -> Dict[int, np.ndarray]:
    return {
        i: scene.points[idx].mean(axis=0)
        for i in scene.instance_ids
        if len(idx := scene.point_indices(i))
    }


def instance_boxes(scene: Scene) -> Dict[int, BBox3]:
    return {
        i: BBox3.of(scene.points[idx])
        for i in scene.instance_ids
        if len(idx := scene.point_indices(i))
    }
