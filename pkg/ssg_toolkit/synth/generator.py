"""Procedural generator of labeled synthetic indoor scenes."""
import functools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ssg_toolkit.core.attributes import Attribute, with_affordances
from ssg_toolkit.core.graph import ALL_PREDICATES, NodeInstance, SceneGraph
from ssg_toolkit.core.hierarchy import derive_hierarchy
from ssg_toolkit.geometry.relations import DEFAULT_THRESHOLDS, ExtractionThresholds, extract_graph, support_candidates
from ssg_toolkit.geometry.scene import CameraPose, Scene, look_at
from ssg_toolkit.synth.placement import (
    ROOM_HEIGHT,
    WALL_THICKNESS,
    PlacementFailed,
    Region,
    find_spot,
    floor_region,
    hanging_z,
    surface_region,
    wall_region,
)
from ssg_toolkit.synth.priors import (
    CLASS_PRIORS,
    FLOOR,
    PRIORS_BY_NAME,
    SURFACE,
    WALL,
    ClassPrior,
    builtin_hypernyms,
)
from ssg_toolkit.synth.shapes import sample_primitive
from ssg_toolkit.utils.decorators import log_exceptions
from ssg_toolkit.utils.errors import InfeasibleSpec

logger = logging.getLogger(__name__)

MAX_CLASSES = 160
MAX_PREDICATES = 25
MAX_SLOT_FAILURES = 10
DEFAULT_ROOM = (3.5, 3.5)


@dataclass(frozen=True)
class SceneSpec:
    """Parameters of one synthetic scene."""
    seed: int = 0
    node_range: Tuple[int, int] = (4, 9)
    num_classes: int = len(CLASS_PRIORS)
    predicates: Optional[Tuple[str, ...]] = None
    room_extent: Tuple[float, float] = DEFAULT_ROOM
    wall_probability: float = 0.6
    max_attempts: int = 25
    scene_id: Optional[str] = None

    def __post_init__(self):
        lo, hi = self.node_range
        if not 2 <= lo <= hi:
            raise ValueError(f"node_range must satisfy 2 <= min <= max, got {self.node_range}")
        if not 1 <= self.num_classes <= MAX_CLASSES:
            raise ValueError(f"num_classes must be in [1, {MAX_CLASSES}], got {self.num_classes}")
        if self.predicates is not None:
            if not 0 < len(self.predicates) <= MAX_PREDICATES:
                raise ValueError(f"predicate vocabulary must hold 1..{MAX_PREDICATES} tokens")
            unknown = set(self.predicates) - set(ALL_PREDICATES)
            if unknown:
                raise ValueError(f"Unknown predicates {sorted(unknown)}")
        if min(self.room_extent) < 1.5:
            raise ValueError("room_extent must be at least 1.5 m per side")

    @property
    def vocabulary(self) -> Tuple[ClassPrior, ...]:
        return CLASS_PRIORS[: self.num_classes]

    @property
    def name(self) -> str:
        return self.scene_id or f"synth-{self.seed}"


@functools.lru_cache(maxsize=1)
def _hypernyms() -> Dict[str, str]:
    return builtin_hypernyms()


def make_node(instance_id: int, prior: ClassPrior, rng: np.random.Generator) -> NodeInstance:
    """Node with a derived class hierarchy and attributes sampled from the class prior."""
    attributes = set()
    for options, factory in ((prior.colors, Attribute.static), (prior.materials, Attribute.static),
                             (prior.shapes, Attribute.static), (prior.states, Attribute.state)):
        if options:
            attributes.add(factory(str(options[rng.integers(len(options))])))
    return NodeInstance(
        instance_id, derive_hierarchy(prior.name, _hypernyms()), with_affordances(prior.name, attributes)
    )


def sample_size(prior: ClassPrior, rng: np.random.Generator) -> np.ndarray:
    w, d, h = (lo + rng.random() * (hi - lo) for lo, hi in (prior.width, prior.depth, prior.height))
    if prior.primitive == "cylinder":
        d = w
    elif prior.placement != WALL and rng.random() < 0.5:
        w, d = d, w
    return np.array([w, d, h])


def reference_view(room: Sequence[float]) -> CameraPose:
    """Fixed viewpoint south of the room used for directional predicates of stored 3D graphs."""
    w, d = room
    return look_at((w / 2.0, -1.2, 1.6), (w / 2.0, d / 2.0, 0.5))


def level_view(room: Sequence[float], height: float = 1.2) -> CameraPose:
    """Unpitched view from the south side of the room."""
    w, d = room
    return look_at((w / 2.0, -1.5, height), (w / 2.0, d / 2.0, height))


def room_extent_of(scene: Scene) -> np.ndarray:
    """Horizontal extent of the first floor instance, or the default room without one."""
    if not scene.floor_ids:
        return np.array(DEFAULT_ROOM)
    floor = scene.floor_ids[0]
    return scene.points[scene.point_indices(floor)][:, :2].max(axis=0)


def sample_view(scene: Scene, rng: np.random.Generator, room: Optional[Sequence[float]] = None) -> CameraPose:
    """Random in-room viewpoint looking at one object, as a stand-in for a captured image.

    The room defaults to the extent of the scene's floor.
    """
    room = room_extent_of(scene) if room is None else room
    targets = [i for i in scene.instance_ids
               if i not in scene.floor_ids and i not in scene.wall_ids and len(scene.point_indices(i))]
    if not targets:
        return reference_view(room)
    target_id = targets[rng.integers(len(targets))]
    target = scene.points[scene.point_indices(target_id)].mean(axis=0)
    w, d = room
    for _ in range(20):
        eye = np.array([rng.uniform(0.2, w - 0.2), rng.uniform(0.2, d - 0.2), rng.uniform(1.3, 1.7)])
        if np.linalg.norm((eye - target)[:2]) > 1.0:
            break
    return look_at(eye, target + rng.normal(0.0, 0.1, 3))


@dataclass
class Layout:
    """Mutable scene under construction; ids handed out by ``next_id`` are never reused."""
    room: np.ndarray
    nodes: Dict[int, NodeInstance] = field(default_factory=dict)
    points: Dict[int, np.ndarray] = field(default_factory=dict)
    boxes: Dict[int, Tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    supporter: Dict[int, int] = field(default_factory=dict)
    floor_id: Optional[int] = None
    wall_id: Optional[int] = None
    min_id: int = 1

    def next_id(self) -> int:
        return max(max(self.nodes, default=0) + 1, self.min_id)

    def add(self, node: NodeInstance, points: np.ndarray, supporter: Optional[int]) -> int:
        self.nodes[node.id] = node
        self.min_id = max(self.min_id, node.id + 1)
        self.points[node.id] = points
        self.boxes[node.id] = (points.min(axis=0), points.max(axis=0))
        if supporter is not None:
            self.supporter[node.id] = supporter
        return node.id

    def children(self, supporter: int) -> List[int]:
        return [i for i, s in self.supporter.items() if s == supporter]

    def footprints(self, ids) -> List[Tuple[np.ndarray, np.ndarray]]:
        return [(self.boxes[i][0][:2], self.boxes[i][1][:2]) for i in ids]

    def expected_support(self) -> frozenset:
        return frozenset(self.supporter.items())


def _place(layout: Layout, prior: ClassPrior, region: Region, supporter: int, siblings,
           rng: np.random.Generator) -> int:
    size = sample_size(prior, rng)
    origin_xy = find_spot(region, size[:2], layout.footprints(siblings), rng)
    base_z = hanging_z(size[2], rng) if prior.placement == WALL else region.base_z
    origin = np.array([origin_xy[0], origin_xy[1], base_z])
    node = make_node(layout.next_id(), prior, rng)
    return layout.add(node, sample_primitive(prior.primitive, origin, size, rng), supporter)


def _place_structure(layout: Layout, rng: np.random.Generator, with_wall: bool) -> None:
    w, d = layout.room
    floor = make_node(layout.next_id(), PRIORS_BY_NAME["floor"], rng)
    layout.floor_id = layout.add(floor, sample_primitive("plane", (0.0, 0.0, -0.02), (w, d, 0.02), rng), None)
    if with_wall:
        wall = make_node(layout.next_id(), PRIORS_BY_NAME["wall"], rng)
        points = sample_primitive("box", (0.0, d, 0.0), (w, WALL_THICKNESS, ROOM_HEIGHT), rng)
        layout.wall_id = layout.add(wall, points, layout.floor_id)


def place_on(layout: Layout, prior: ClassPrior, rng: np.random.Generator,
             supporters: Sequence[int] = ()) -> int:
    """Place one instance of ``prior`` according to its placement kind."""
    if prior.placement == FLOOR:
        floor_items = [i for i, s in layout.supporter.items() if s == layout.floor_id and i != layout.wall_id]
        return _place(layout, prior, floor_region(layout.room), layout.floor_id, floor_items, rng)
    if prior.placement == WALL:
        if layout.wall_id is None:
            raise PlacementFailed("no wall to hang on")
        region = wall_region(layout.room, float(prior.depth[1]))
        return _place(layout, prior, region, layout.wall_id, layout.children(layout.wall_id), rng)
    for supporter in rng.permutation(np.asarray(supporters, dtype=int)).tolist():
        lo, hi = layout.boxes[supporter]
        try:
            return _place(layout, prior, surface_region(lo, hi), supporter, layout.children(supporter), rng)
        except PlacementFailed:
            continue
    raise PlacementFailed("no supporting surface with room left")


def surface_supporters(layout: Layout) -> List[int]:
    return [i for i, n in layout.nodes.items()
            if PRIORS_BY_NAME.get(n.label) and PRIORS_BY_NAME[n.label].supports]


def _compose(spec: SceneSpec, rng: np.random.Generator) -> Layout:
    vocabulary = {p.name: p for p in spec.vocabulary}
    by_kind = {kind: [p for p in vocabulary.values() if p.placement == kind] for kind in (FLOOR, SURFACE, WALL)}
    lo, hi = spec.node_range
    target = int(rng.integers(lo, hi + 1))

    layout = Layout(np.array(spec.room_extent, dtype=float))
    with_wall = "wall" in vocabulary and target >= 4 and rng.random() < spec.wall_probability
    _place_structure(layout, rng, with_wall)
    remaining = target - len(layout.nodes)
    if remaining > 0 and not by_kind[FLOOR]:
        raise InfeasibleSpec(f"Class vocabulary of size {spec.num_classes} has no placeable classes")

    n_furniture = max(1, int(round(remaining * rng.uniform(0.35, 0.65)))) if remaining else 0
    for _ in range(n_furniture):
        place_on(layout, by_kind[FLOOR][rng.integers(len(by_kind[FLOOR]))], rng)

    failures = 0
    while len(layout.nodes) < target:
        supporters = surface_supporters(layout)
        kinds = [FLOOR]
        if supporters and by_kind[SURFACE]:
            kinds += [SURFACE, SURFACE]
        if layout.wall_id is not None and by_kind[WALL]:
            kinds.append(WALL)
        kind = kinds[rng.integers(len(kinds))]
        options = by_kind[kind]
        try:
            place_on(layout, options[rng.integers(len(options))], rng, supporters)
        except PlacementFailed:
            failures += 1
            if failures > MAX_SLOT_FAILURES:
                raise
    return layout


def build_scene(layout: Layout, scene_id: str, view: Optional[CameraPose]) -> Scene:
    ids = sorted(layout.nodes)
    points = np.concatenate([layout.points[i] for i in ids])
    mask = np.concatenate([np.full(len(layout.points[i]), i, dtype=np.int64) for i in ids])
    return Scene(points, mask, {i: layout.nodes[i] for i in ids}, scene_id=scene_id, reference_view=view)


@log_exceptions
def generate_scene(spec: SceneSpec,
                   thresholds: ExtractionThresholds = DEFAULT_THRESHOLDS) -> Tuple[Scene, SceneGraph]:
    """Synthetic scene and its ground-truth graph, deterministic in ``spec.seed``.

    The graph is exactly what relation extraction recovers from the emitted
    geometry; layouts whose detected support differs from the intended one
    are re-sampled.
    """
    rng = np.random.default_rng(spec.seed)
    view = reference_view(spec.room_extent)
    for attempt in range(spec.max_attempts):
        try:
            layout = _compose(spec, rng)
        except PlacementFailed as e:
            logger.debug(f"Seed {spec.seed} attempt {attempt}: {e}")
            continue
        scene = build_scene(layout, spec.name, view)
        detected = support_candidates(scene, thresholds.support_radius, thresholds.lowest_fraction)
        if detected != layout.expected_support():
            logger.debug(
                f"Seed {spec.seed} attempt {attempt}: support mismatch "
                f"{sorted(detected ^ layout.expected_support())}"
            )
            continue
        graph = extract_graph(scene, view, thresholds, spec.predicates)
        logger.debug(f"Generated {spec.name}: {len(graph.nodes)} nodes after {attempt + 1} attempt(s)")
        return scene, graph
    raise InfeasibleSpec(f"Placement for seed {spec.seed} failed after {spec.max_attempts} attempts")


def layout_from_scene(scene: Scene, room: Sequence[float],
                      thresholds: ExtractionThresholds = DEFAULT_THRESHOLDS) -> Layout:
    """Rebuild a mutable layout from a generated scene and its detected support."""
    layout = Layout(np.array(room, dtype=float))
    supporters = {}
    for supported, supporter in sorted(support_candidates(scene, thresholds.support_radius,
                                                          thresholds.lowest_fraction)):
        supporters.setdefault(supported, supporter)
    for i in scene.instance_ids:
        idx = scene.point_indices(i)
        layout.add(scene.instances[i], scene.points[idx].copy(), supporters.get(i))
    layout.floor_id = scene.floor_ids[0] if scene.floor_ids else None
    layout.wall_id = scene.wall_ids[0] if scene.wall_ids else None
    return layout
