"""Free-spot search for axis-aligned footprints inside a region."""
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

FLOOR_CLEARANCE = 0.15
SURFACE_CLEARANCE = 0.1
WALL_CLEARANCE = 0.1
SURFACE_MARGIN = 0.02
FLOOR_GAP = 0.005
SURFACE_GAP = 0.01
WALL_GAP = 0.01
WALL_THICKNESS = 0.1
ROOM_HEIGHT = 2.5
HANGING_RANGE = (1.4, 2.3)


@dataclass(frozen=True)
class Region:
    """Rectangle of allowed (x, y) origins plus the z of an object's bottom."""
    lo: np.ndarray
    hi: np.ndarray
    base_z: float
    clearance: float


class PlacementFailed(Exception):
    """No free spot was found; the caller retries with fresh samples."""


def find_spot(region: Region, footprint: np.ndarray, obstacles: Iterable[Tuple[np.ndarray, np.ndarray]],
              rng: np.random.Generator, tries: int = 60) -> np.ndarray:
    """Origin (x, y) of a footprint inside ``region`` keeping clearance to every obstacle."""
    hi = region.hi - footprint
    if np.any(hi < region.lo):
        raise PlacementFailed("footprint larger than region")
    obstacles = list(obstacles)
    for _ in range(tries):
        origin = region.lo + rng.random(2) * (hi - region.lo)
        lo_xy, hi_xy = origin - region.clearance, origin + footprint + region.clearance
        if all(np.any(hi_xy <= o_lo) or np.any(lo_xy >= o_hi) for o_lo, o_hi in obstacles):
            return origin
    raise PlacementFailed("no free spot")


def floor_region(room: np.ndarray) -> Region:
    margin = FLOOR_CLEARANCE
    return Region(np.array([margin, margin]), room - margin, FLOOR_GAP, FLOOR_CLEARANCE)


def surface_region(box_min: np.ndarray, box_max: np.ndarray) -> Region:
    return Region(box_min[:2] + SURFACE_MARGIN, box_max[:2] - SURFACE_MARGIN,
                  float(box_max[2]) + SURFACE_GAP, SURFACE_CLEARANCE)


def wall_region(room: np.ndarray, depth: float) -> Region:
    """Hanging spots along the north wall; z is sampled separately."""
    y = room[1] - WALL_GAP - depth
    return Region(np.array([0.2, y]), np.array([room[0] - 0.2, y + depth]), HANGING_RANGE[0], WALL_CLEARANCE)


def hanging_z(height: float, rng: np.random.Generator) -> float:
    lo, hi = HANGING_RANGE[0], HANGING_RANGE[1] - height
    if hi < lo:
        raise PlacementFailed("object too tall to hang")
    return float(lo + rng.random() * (hi - lo))
