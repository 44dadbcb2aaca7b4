"""Surface point sampling for the primitive shapes of synthetic objects."""
from typing import List, Tuple

import numpy as np

MIN_POINTS = 256
MAX_POINTS = 2048
POINTS_PER_SQUARE_METER = 1500.0

# (origin corner, size) of an axis-aligned box part
Part = Tuple[np.ndarray, np.ndarray]


def point_budget(area: float) -> int:
    return int(np.clip(round(area * POINTS_PER_SQUARE_METER), MIN_POINTS, MAX_POINTS))


def _jittered_grid(count: int, length_u: float, length_v: float, rng: np.random.Generator) -> np.ndarray:
    """``count`` points on a [0, length_u] x [0, length_v] rectangle, one per jittered cell."""
    if count <= 0:
        return np.zeros((0, 2))
    nu = max(1, int(round(np.sqrt(count * length_u / max(length_v, 1e-9)))))
    nv = int(np.ceil(count / nu))
    cells = np.stack(np.meshgrid(np.arange(nu), np.arange(nv), indexing="ij"), axis=-1).reshape(-1, 2)
    cells = cells[rng.permutation(len(cells))[:count]]
    uv = (cells + rng.random((count, 2))) / np.array([nu, nv])
    return uv * np.array([length_u, length_v])


def _box_faces(origin: np.ndarray, size: np.ndarray):
    """(area, fixed axis, fixed value, free axes) for the six faces of a box."""
    faces = []
    for axis in range(3):
        u, v = [a for a in range(3) if a != axis]
        area = size[u] * size[v]
        for value in (origin[axis], origin[axis] + size[axis]):
            faces.append((area, axis, value, (u, v)))
    return faces


def _sample_faces(faces, origin: np.ndarray, size: np.ndarray, count: int,
                  rng: np.random.Generator) -> np.ndarray:
    areas = np.array([f[0] for f in faces])
    counts = np.floor(count * areas / areas.sum()).astype(int)
    counts[np.argmax(areas)] += count - counts.sum()
    chunks = []
    for (area, axis, value, (u, v)), n in zip(faces, counts):
        uv = _jittered_grid(n, size[u], size[v], rng)
        pts = np.empty((n, 3))
        pts[:, axis] = value
        pts[:, u] = origin[u] + uv[:, 0]
        pts[:, v] = origin[v] + uv[:, 1]
        chunks.append(pts)
    return np.concatenate(chunks) if chunks else np.zeros((0, 3))


def box_area(size: np.ndarray) -> float:
    return float(2 * (size[0] * size[1] + size[0] * size[2] + size[1] * size[2]))


def sample_box(origin, size, count: int, rng: np.random.Generator) -> np.ndarray:
    origin, size = np.asarray(origin, float), np.asarray(size, float)
    return _sample_faces(_box_faces(origin, size), origin, size, count, rng)


def sample_plane(origin, size, count: int, rng: np.random.Generator) -> np.ndarray:
    """Top face only; ``size[2]`` is ignored."""
    origin, size = np.asarray(origin, float), np.asarray(size, float)
    uv = _jittered_grid(count, size[0], size[1], rng)
    return np.column_stack([origin[0] + uv[:, 0], origin[1] + uv[:, 1], np.full(count, origin[2] + size[2])])


def sample_cylinder(origin, size, count: int, rng: np.random.Generator) -> np.ndarray:
    """Vertical cylinder inscribed in the box footprint (diameter = ``size[0]``)."""
    origin, size = np.asarray(origin, float), np.asarray(size, float)
    radius, height = size[0] / 2.0, size[2]
    center = origin[:2] + size[:2] / 2.0
    side, cap = 2 * np.pi * radius * height, np.pi * radius ** 2
    n_side = int(round(count * side / (side + 2 * cap)))
    n_cap = (count - n_side) // 2
    n_bottom = count - n_side - n_cap

    uv = _jittered_grid(n_side, 2 * np.pi, height, rng)
    side_pts = np.column_stack([
        center[0] + radius * np.cos(uv[:, 0]),
        center[1] + radius * np.sin(uv[:, 0]),
        origin[2] + uv[:, 1],
    ])
    caps = []
    for n, z in ((n_bottom, origin[2]), (n_cap, origin[2] + height)):
        polar = _jittered_grid(n, 1.0, 2 * np.pi, rng)
        r = radius * np.sqrt(polar[:, 0])
        caps.append(np.column_stack([center[0] + r * np.cos(polar[:, 1]),
                                     center[1] + r * np.sin(polar[:, 1]), np.full(n, z)]))
    return np.concatenate([side_pts] + caps)


def table_parts(origin, size, top_thickness: float = 0.05, leg: float = 0.05) -> List[Part]:
    origin, size = np.asarray(origin, float), np.asarray(size, float)
    leg_height = size[2] - top_thickness
    parts = [(origin + [0, 0, leg_height], np.array([size[0], size[1], top_thickness]))]
    for x in (origin[0], origin[0] + size[0] - leg):
        for y in (origin[1], origin[1] + size[1] - leg):
            parts.append((np.array([x, y, origin[2]]), np.array([leg, leg, leg_height])))
    return parts


def chair_parts(origin, size, seat_height: float = 0.45, leg: float = 0.04) -> List[Part]:
    origin, size = np.asarray(origin, float), np.asarray(size, float)
    seat = 0.05
    parts = table_parts(origin, [size[0], size[1], seat_height], top_thickness=seat, leg=leg)
    back_origin = origin + [0.0, size[1] - 0.05, seat_height]
    parts.append((back_origin, np.array([size[0], 0.05, size[2] - seat_height])))
    return parts


def sample_parts(parts: List[Part], count: int, rng: np.random.Generator) -> np.ndarray:
    areas = np.array([box_area(s) for _, s in parts])
    counts = np.floor(count * areas / areas.sum()).astype(int)
    counts[0] += count - counts.sum()
    return np.concatenate([sample_box(o, s, n, rng) for (o, s), n in zip(parts, counts)])


def sample_primitive(primitive: str, origin, size, rng: np.random.Generator) -> np.ndarray:
    """Surface points of one object, with a point count scaled by its area."""
    size = np.asarray(size, float)
    if primitive == "plane":
        return sample_plane(origin, size, point_budget(size[0] * size[1]), rng)
    if primitive == "cylinder":
        r = size[0] / 2.0
        return sample_cylinder(origin, size, point_budget(2 * np.pi * r * (r + size[2])), rng)
    if primitive == "table":
        parts = table_parts(origin, size)
    elif primitive == "chair":
        parts = chair_parts(origin, size)
    elif primitive == "box":
        return sample_box(origin, size, point_budget(box_area(size)), rng)
    else:
        raise ValueError(f"Unknown primitive {primitive!r}")
    return sample_parts(parts, point_budget(sum(box_area(s) for _, s in parts)), rng)
