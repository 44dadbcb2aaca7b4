"""Point-cloud and camera file formats.

Point clouds are ASCII PLY with one ``x y z instance_id`` row per point::

    ply
    format ascii 1.0
    comment scene_id scene0007
    element vertex 1234
    property float x
    property float y
    property float z
    property int instance_id
    end_header
    0.125 1.500 0.000 1
    ...

Cameras are JSON objects with ``extrinsic`` (16 row-major numbers, world to
camera) and ``fx, fy, cx, cy, width, height``.
"""
import json
import logging
from pathlib import Path
from typing import Mapping, Optional, Tuple, Union

import numpy as np

from ssg_toolkit.core.graph import NodeInstance, SceneGraph
from ssg_toolkit.core.hierarchy import ClassHierarchy
from ssg_toolkit.geometry.scene import CameraPose, Scene
from ssg_toolkit.utils.errors import DataError

logger = logging.getLogger(__name__)

UNKNOWN_CLASS = "object"

_PROPERTIES = ["x", "y", "z", "instance_id"]


def write_ply(path: Union[str, Path], points: np.ndarray, mask: np.ndarray, scene_id: str = "scene") -> Path:
    path = Path(path)
    header = [
        "ply",
        "format ascii 1.0",
        f"comment scene_id {scene_id}",
        f"element vertex {len(points)}",
        "property float x",
        "property float y",
        "property float z",
        "property int instance_id",
        "end_header",
    ]
    rows = [f"{x:.6f} {y:.6f} {z:.6f} {int(m)}" for (x, y, z), m in zip(points, mask)]
    path.write_text("\n".join(header + rows) + "\n", encoding="ascii")
    return path


def read_ply(path: Union[str, Path]) -> Tuple[np.ndarray, np.ndarray, str]:
    """Points, instance mask and scene id from an ASCII PLY file."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Point cloud not found: {path}")
    lines = path.read_text(encoding="ascii").splitlines()
    if not lines or lines[0].strip() != "ply":
        raise DataError(f"{path}: missing 'ply' magic line")

    scene_id, count, properties = path.name.split(".")[0], None, []
    for body_start, line in enumerate(lines[1:], start=2):
        tokens = line.split()
        if not tokens:
            continue
        if tokens[0] == "format" and tokens[1:2] != ["ascii"]:
            raise DataError(f"{path}: only ASCII PLY is supported")
        if tokens[:2] == ["comment", "scene_id"] and len(tokens) > 2:
            scene_id = tokens[2]
        elif tokens[:2] == ["element", "vertex"]:
            count = int(tokens[2])
        elif tokens[0] == "property":
            properties.append(tokens[-1])
        elif tokens[0] == "end_header":
            break
    else:
        raise DataError(f"{path}: no end_header")
    if properties != _PROPERTIES or count is None:
        raise DataError(f"{path}: expected properties {_PROPERTIES}, got {properties}")

    rows = [line.split() for line in lines[body_start:] if line.strip()]
    if len(rows) != count:
        raise DataError(f"{path}: header announces {count} points, found {len(rows)}")
    try:
        data = np.array(rows, dtype=float).reshape(-1, 4)
    except ValueError as e:
        raise DataError(f"{path}: malformed point row ({e})") from e
    mask = data[:, 3].astype(np.int64)
    if np.any(mask < 0) or np.any(mask != data[:, 3]):
        raise DataError(f"{path}: instance ids must be non-negative integers")
    return data[:, :3], mask, scene_id


def camera_to_dict(view: CameraPose) -> dict:
    return {
        "extrinsic": [float(v) for v in view.extrinsic.reshape(-1)],
        "fx": view.fx, "fy": view.fy, "cx": view.cx, "cy": view.cy,
        "width": view.width, "height": view.height,
    }


def camera_from_dict(payload: dict) -> CameraPose:
    try:
        return CameraPose(
            np.array(payload["extrinsic"], dtype=float).reshape(4, 4),
            float(payload["fx"]), float(payload["fy"]), float(payload["cx"]), float(payload["cy"]),
            int(payload["width"]), int(payload["height"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"Malformed camera document: {e}") from e


def write_camera(path: Union[str, Path], view: CameraPose) -> Path:
    path = Path(path)
    path.write_text(json.dumps(camera_to_dict(view), indent=2) + "\n", encoding="utf-8")
    return path


def read_camera(path: Union[str, Path]) -> CameraPose:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Camera file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DataError(f"{path}: invalid JSON ({e})") from e
    return camera_from_dict(payload)


def load_scene(ply_path: Union[str, Path], graph: Optional[SceneGraph] = None,
               view: Optional[CameraPose] = None) -> Scene:
    """Scene from a PLY file; instance metadata comes from ``graph`` when given."""
    points, mask, scene_id = read_ply(ply_path)
    ids = sorted(set(np.unique(mask[mask != 0]).tolist()))
    instances: Mapping[int, NodeInstance]
    if graph is not None:
        instances = {n.id: n for n in graph.nodes}
        missing = set(ids) - set(instances)
        if missing:
            raise DataError(f"{ply_path}: mask ids {sorted(missing)} missing from graph {graph.scene_id}")
        scene_id = graph.scene_id
    else:
        instances = {i: NodeInstance(i, ClassHierarchy.single(UNKNOWN_CLASS)) for i in ids}
    logger.info(f"Loaded scene {scene_id}: {len(points)} points, {len(instances)} instances")
    return Scene(points, mask, instances, scene_id=scene_id, reference_view=view)
