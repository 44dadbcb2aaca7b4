"""Scene, bounding box and camera types."""
import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence, Tuple

import cv2
import numpy as np

from ssg_toolkit.core.graph import NodeInstance

logger = logging.getLogger(__name__)

FLOOR_CLASS = "floor"
WALL_CLASS = "wall"


def _frozen(array, dtype) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class BBox3:
    """Axis-aligned box in meters."""
    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        lo, hi = _frozen(self.min, float), _frozen(self.max, float)
        if lo.shape != (3,) or hi.shape != (3,) or np.any(lo > hi):
            raise ValueError(f"Invalid box corners {lo} / {hi}")
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)

    @classmethod
    def of(cls, points: np.ndarray) -> "BBox3":
        points = np.asarray(points, dtype=float)
        return cls(points.min(axis=0), points.max(axis=0))

    @property
    def extent(self) -> np.ndarray:
        return self.max - self.min

    @property
    def volume(self) -> float:
        return float(np.prod(self.extent))

    @property
    def center(self) -> np.ndarray:
        return (self.min + self.max) / 2.0

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return np.all((points >= self.min) & (points <= self.max), axis=1)

    def distance_to(self, other: "BBox3") -> float:
        gap = np.maximum(0.0, np.maximum(self.min - other.max, other.min - self.max))
        return float(np.linalg.norm(gap))


@dataclass(frozen=True, eq=False)
class CameraPose:
    """Pinhole camera with a world-to-camera rigid transform (OpenCV axes: x right, y down, z forward)."""
    extrinsic: np.ndarray
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        extrinsic = _frozen(self.extrinsic, float).reshape(4, 4)
        rotation = extrinsic[:3, :3]
        if not np.allclose(rotation @ rotation.T, np.eye(3), atol=1e-6) or not np.isclose(
            np.linalg.det(rotation), 1.0, atol=1e-6
        ):
            raise ValueError("Camera rotation must be orthonormal with determinant +1")
        if not np.allclose(extrinsic[3], [0.0, 0.0, 0.0, 1.0]):
            raise ValueError("Camera extrinsic last row must be (0, 0, 0, 1)")
        object.__setattr__(self, "extrinsic", extrinsic)

    @property
    def rotation(self) -> np.ndarray:
        return self.extrinsic[:3, :3]

    @property
    def translation(self) -> np.ndarray:
        return self.extrinsic[:3, 3]

    @property
    def intrinsic_matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    @property
    def center(self) -> np.ndarray:
        """Camera position in world coordinates."""
        return -self.rotation.T @ self.translation

    def to_camera(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        return points @ self.rotation.T + self.translation

    def project(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Pixel coordinates and depths of world points."""
        points = np.ascontiguousarray(np.asarray(points, dtype=np.float64).reshape(-1, 3))
        depth = self.to_camera(points)[:, 2]
        if len(points) == 0:
            return np.zeros((0, 2)), depth
        rvec, _ = cv2.Rodrigues(np.ascontiguousarray(self.rotation))
        pixels, _ = cv2.projectPoints(
            points, rvec, np.ascontiguousarray(self.translation), self.intrinsic_matrix, None
        )
        return pixels.reshape(-1, 2), depth

    def in_view(self, points: np.ndarray) -> np.ndarray:
        """Mask of points in front of the camera that land inside the image."""
        pixels, depth = self.project(points)
        return (
            (depth > 0)
            & (pixels[:, 0] >= 0) & (pixels[:, 0] < self.width)
            & (pixels[:, 1] >= 0) & (pixels[:, 1] < self.height)
        )


DEFAULT_INTRINSICS = dict(fx=525.0, fy=525.0, cx=319.5, cy=239.5, width=640, height=480)


def look_at(eye: Sequence[float], target: Sequence[float], up: Sequence[float] = (0.0, 0.0, 1.0),
            **intrinsics) -> CameraPose:
    """Camera at ``eye`` looking at ``target`` with image rows aligned to ``up``."""
    eye = np.asarray(eye, dtype=float)
    forward = np.asarray(target, dtype=float) - eye
    forward /= np.linalg.norm(forward)
    right = np.cross(forward, np.asarray(up, dtype=float))
    if np.linalg.norm(right) < 1e-9:
        raise ValueError("Viewing direction is parallel to the up vector")
    right /= np.linalg.norm(right)
    down = np.cross(forward, right)
    rotation = np.stack([right, down, forward])
    extrinsic = np.eye(4)
    extrinsic[:3, :3] = rotation
    extrinsic[:3, 3] = -rotation @ eye
    params = {**DEFAULT_INTRINSICS, **intrinsics}
    return CameraPose(extrinsic, **params)


def rotate_about_vertical(view: CameraPose, pivot: Sequence[float], angle: float) -> CameraPose:
    """Orbit the camera by ``angle`` radians about the vertical axis through ``pivot``."""
    pivot = np.asarray(pivot, dtype=float)
    c, s = np.cos(angle), np.sin(angle)
    rz = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    center = rz @ (view.center - pivot) + pivot
    rotation = view.rotation @ rz.T
    extrinsic = np.eye(4)
    extrinsic[:3, :3] = rotation
    extrinsic[:3, 3] = -rotation @ center
    return CameraPose(extrinsic, view.fx, view.fy, view.cx, view.cy, view.width, view.height)


@dataclass(frozen=True, eq=False)
class Scene:
    """Point cloud with a per-point instance mask and per-instance metadata."""
    points: np.ndarray
    mask: np.ndarray
    instances: Mapping[int, NodeInstance]
    scene_id: str = "scene"
    reference_view: Optional[CameraPose] = None
    _index: Dict[int, np.ndarray] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        points = _frozen(self.points, float).reshape(-1, 3)
        mask = _frozen(self.mask, np.int64).reshape(-1)
        if len(mask) != len(points):
            raise ValueError(f"Mask has {len(mask)} entries for {len(points)} points")
        instances = dict(sorted(self.instances.items()))
        unknown = set(np.unique(mask[mask != 0]).tolist()) - set(instances)
        if unknown:
            raise ValueError(f"Mask ids without instance metadata: {sorted(unknown)}")
        index = {i: np.flatnonzero(mask == i) for i in instances}
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "instances", instances)
        object.__setattr__(self, "_index", index)

    @property
    def instance_ids(self) -> Tuple[int, ...]:
        return tuple(self.instances)

    def label(self, instance_id: int) -> str:
        return self.instances[instance_id].label

    def ids_of_class(self, label: str) -> Tuple[int, ...]:
        return tuple(i for i, n in self.instances.items() if n.label == label)

    @property
    def floor_ids(self) -> Tuple[int, ...]:
        return self.ids_of_class(FLOOR_CLASS)

    @property
    def wall_ids(self) -> Tuple[int, ...]:
        return self.ids_of_class(WALL_CLASS)

    def point_indices(self, instance_id: int) -> np.ndarray:
        return self._index[instance_id]
