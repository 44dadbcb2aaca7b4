"""Perturbed rescans of synthetic scenes and their change logs."""
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from ssg_toolkit.core.attributes import Attribute, AttributeKind, with_affordances
from ssg_toolkit.core.graph import SceneGraph, Triple
from ssg_toolkit.core.multisets import AugmentedGraph, edge_token
from ssg_toolkit.geometry.relations import DEFAULT_THRESHOLDS, ExtractionThresholds, extract_graph, support_candidates
from ssg_toolkit.geometry.scene import Scene
from ssg_toolkit.synth.generator import (
    Layout,
    build_scene,
    layout_from_scene,
    place_on,
    room_extent_of,
    surface_supporters,
)
from ssg_toolkit.synth.placement import PlacementFailed, Region, find_spot, floor_region, surface_region, wall_region
from ssg_toolkit.synth.priors import CLASS_PRIORS, FLOOR, PRIORS_BY_NAME, SURFACE, WALL
from ssg_toolkit.utils.decorators import log_exceptions
from ssg_toolkit.utils.errors import InfeasibleSpec

logger = logging.getLogger(__name__)

RESCAN_OPS = ("move", "add", "remove", "toggle")


@dataclass(frozen=True)
class RescanSpec:
    """Which perturbations to apply to a base scene, and how many."""
    seed: int = 0
    ops: Tuple[str, ...] = RESCAN_OPS
    op_count: int = 2
    num_classes: int = len(CLASS_PRIORS)
    predicates: Optional[Tuple[str, ...]] = None
    max_attempts: int = 25
    scene_id: Optional[str] = None

    def __post_init__(self):
        if self.op_count < 0:
            raise ValueError(f"op_count must be >= 0, got {self.op_count}")
        unknown = set(self.ops) - set(RESCAN_OPS)
        if unknown or not self.ops:
            raise ValueError(f"ops must be a non-empty subset of {RESCAN_OPS}, got {self.ops}")


@dataclass(frozen=True)
class ChangeRecord:
    """Instance-level effect of one perturbation."""
    op: str
    instance_id: int
    removed_nodes: Tuple[int, ...] = ()
    added_nodes: Tuple[int, ...] = ()
    removed_edges: Tuple[Tuple[int, int], ...] = ()
    added_edges: Tuple[Tuple[int, int], ...] = ()
    removed_triples: Tuple[Triple, ...] = ()
    added_triples: Tuple[Triple, ...] = ()
    labels: Dict[int, str] = field(default_factory=dict, compare=False)


class RescanResult(NamedTuple):
    scene: Scene
    graph: SceneGraph
    log: Tuple[ChangeRecord, ...]


def diff_graphs(before: SceneGraph, after: SceneGraph, op: str = "diff", instance_id: int = 0) -> ChangeRecord:
    """Id-level node, edge and triple differences between two graphs of one scene."""
    labels = {n.id: n.label for n in before.nodes}
    labels.update({n.id: n.label for n in after.nodes})
    nodes_a, nodes_b = set(before.node_ids), set(after.node_ids)
    edges_a, edges_b = {e.key for e in before.edges}, {e.key for e in after.edges}
    triples_a, triples_b = set(before.triples()), set(after.triples())
    return ChangeRecord(
        op, instance_id,
        tuple(sorted(nodes_a - nodes_b)), tuple(sorted(nodes_b - nodes_a)),
        tuple(sorted(edges_a - edges_b)), tuple(sorted(edges_b - edges_a)),
        tuple(sorted(triples_a - triples_b)), tuple(sorted(triples_b - triples_a)),
        labels,
    )


def log_to_deltas(log: Tuple[ChangeRecord, ...], scene_id: str = "") -> Tuple[AugmentedGraph, AugmentedGraph]:
    """Net removed and added multiset tokens implied by a change log."""
    removed = {"nodes": Counter(), "edges": Counter(), "triples": Counter()}
    added = {"nodes": Counter(), "edges": Counter(), "triples": Counter()}
    for record in log:
        lab = record.labels
        removed["nodes"].update(lab[i] for i in record.removed_nodes)
        added["nodes"].update(lab[i] for i in record.added_nodes)
        removed["edges"].update(edge_token(lab[s], lab[o]) for s, o in record.removed_edges)
        added["edges"].update(edge_token(lab[s], lab[o]) for s, o in record.added_edges)
        removed["triples"].update((lab[s], p, lab[o]) for s, p, o in record.removed_triples)
        added["triples"].update((lab[s], p, lab[o]) for s, p, o in record.added_triples)
    net_removed = {k: removed[k] - added[k] for k in removed}
    net_added = {k: added[k] - removed[k] for k in added}
    return AugmentedGraph(scene_id, **net_removed), AugmentedGraph(scene_id, **net_added)


def _leaves(layout: Layout) -> List[int]:
    structural = {layout.floor_id, layout.wall_id}
    return sorted(i for i in layout.nodes if i not in structural and not layout.children(i))


def _region_for(layout: Layout, instance_id: int, supporter: int) -> Region:
    if supporter == layout.floor_id:
        return floor_region(layout.room)
    if supporter == layout.wall_id:
        lo, hi = layout.boxes[instance_id]
        return wall_region(layout.room, float(hi[1] - lo[1]))
    lo, hi = layout.boxes[supporter]
    return surface_region(lo, hi)


def _move(layout: Layout, rng: np.random.Generator) -> int:
    leaves = _leaves(layout)
    if not leaves:
        raise PlacementFailed("nothing movable")
    target = leaves[rng.integers(len(leaves))]
    current = layout.supporter[target]
    candidates = [current]
    if current not in (layout.floor_id, layout.wall_id):
        candidates = [s for s in surface_supporters(layout) if s != target]
    supporter = candidates[rng.integers(len(candidates))]
    region = _region_for(layout, target, supporter)

    lo, hi = layout.boxes[target]
    siblings = [i for i in layout.children(supporter) if i not in (target, layout.wall_id)]
    origin_xy = find_spot(region, (hi - lo)[:2], layout.footprints(siblings), rng)
    offset = np.array([origin_xy[0] - lo[0], origin_xy[1] - lo[1], 0.0])
    if supporter not in (layout.floor_id, layout.wall_id):
        offset[2] = region.base_z - lo[2]
    node = layout.nodes[target]
    layout.add(node, layout.points[target] + offset, supporter)
    return target


def _remove(layout: Layout, rng: np.random.Generator) -> int:
    leaves = _leaves(layout)
    if not leaves:
        raise PlacementFailed("nothing removable")
    target = leaves[rng.integers(len(leaves))]
    for table in (layout.nodes, layout.points, layout.boxes, layout.supporter):
        table.pop(target, None)
    return target


def _add(layout: Layout, rng: np.random.Generator, spec: RescanSpec) -> int:
    vocabulary = [p for p in CLASS_PRIORS[: spec.num_classes] if p.placement in (FLOOR, SURFACE, WALL)]
    if not vocabulary:
        raise PlacementFailed("no placeable class")
    prior = vocabulary[rng.integers(len(vocabulary))]
    return place_on(layout, prior, rng, surface_supporters(layout))


def _toggle(layout: Layout, rng: np.random.Generator) -> int:
    candidates = []
    for i, node in sorted(layout.nodes.items()):
        prior = PRIORS_BY_NAME.get(node.label)
        states = [a for a in node.attributes if a.kind is AttributeKind.STATE]
        if prior is not None and len(prior.states) > 1 and states:
            candidates.append((i, prior, states))
    if not candidates:
        raise PlacementFailed("no instance with a state")
    i, prior, states = candidates[rng.integers(len(candidates))]
    current = {a.name for a in states}
    options = [s for s in prior.states if s not in current]
    new_state = options[rng.integers(len(options))]
    kept = {a for a in layout.nodes[i].attributes if a.kind is not AttributeKind.STATE}
    attributes = with_affordances(prior.name, kept | {Attribute.state(new_state)})
    layout.nodes[i] = replace(layout.nodes[i], attributes=attributes)
    return i


def _copy_layout(layout: Layout) -> Layout:
    return replace(layout, nodes=dict(layout.nodes), points=dict(layout.points),
                   boxes=dict(layout.boxes), supporter=dict(layout.supporter))


@log_exceptions
def perturb(scene: Scene, graph: SceneGraph, spec: RescanSpec,
            thresholds: ExtractionThresholds = DEFAULT_THRESHOLDS) -> RescanResult:
    """Apply ``spec.op_count`` random perturbations, re-extracting the graph after each."""
    if not scene.floor_ids:
        raise InfeasibleSpec(f"Scene {scene.scene_id} has no floor to rebuild a layout on")
    rng = np.random.default_rng(spec.seed)
    scene_id = spec.scene_id or scene.scene_id
    view = scene.reference_view
    layout = layout_from_scene(scene, room_extent_of(scene), thresholds)
    current_scene = scene
    current_graph = graph.with_scene_id(scene_id)
    log: List[ChangeRecord] = []

    for step in range(spec.op_count):
        for attempt in range(spec.max_attempts):
            op = spec.ops[rng.integers(len(spec.ops))]
            candidate = _copy_layout(layout)
            try:
                if op == "move":
                    instance_id = _move(candidate, rng)
                elif op == "remove":
                    instance_id = _remove(candidate, rng)
                elif op == "add":
                    instance_id = _add(candidate, rng, spec)
                else:
                    instance_id = _toggle(candidate, rng)
            except PlacementFailed as e:
                logger.debug(f"Rescan step {step} attempt {attempt} ({op}): {e}")
                continue
            new_scene = build_scene(candidate, scene_id, view)
            detected = support_candidates(new_scene, thresholds.support_radius, thresholds.lowest_fraction)
            if detected != candidate.expected_support():
                logger.debug(f"Rescan step {step} attempt {attempt} ({op}): support mismatch")
                continue
            new_graph = extract_graph(new_scene, view, thresholds, spec.predicates)
            log.append(diff_graphs(current_graph, new_graph, op, instance_id))
            layout, current_scene, current_graph = candidate, new_scene, new_graph
            break
        else:
            raise InfeasibleSpec(f"Rescan step {step} of {scene.scene_id} failed after {spec.max_attempts} attempts")

    logger.debug(f"Rescan {scene_id}: {[r.op for r in log]}")
    return RescanResult(current_scene, current_graph, tuple(log))


def generate_rescan(scene: Scene, graph: SceneGraph, spec: RescanSpec,
                    thresholds: ExtractionThresholds = DEFAULT_THRESHOLDS) -> Tuple[Scene, SceneGraph]:
    """Perturbed copy of a generated scene with its consistent graph."""
    result = perturb(scene, graph, spec, thresholds)
    return result.scene, result.graph
