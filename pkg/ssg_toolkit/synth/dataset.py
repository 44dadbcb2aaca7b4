"""Writing and reading generated scene pools on disk.

A pool directory holds, per scene ``K``::

    sceneK.ply               points and instance mask
    sceneK.graph.json        ground-truth graph
    sceneK.camera.json       reference view
    sceneK.rescanM.*         the same three files for each rescan
    sceneK.rescanM.changes.json   removed/added multiset tokens of the rescan
"""
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

from tqdm import tqdm

from ssg_toolkit.core.graph import SceneGraph
from ssg_toolkit.core.multisets import COMPONENTS
from ssg_toolkit.core.serialization import load_graph, save_graph
from ssg_toolkit.geometry.io import load_scene, read_camera, write_camera, write_ply
from ssg_toolkit.geometry.scene import Scene
from ssg_toolkit.retrieval.changes import changes_to_dict
from ssg_toolkit.synth.generator import SceneSpec, generate_scene
from ssg_toolkit.synth.rescan import RescanSpec, log_to_deltas, perturb
from ssg_toolkit.utils.errors import DataError

logger = logging.getLogger(__name__)


@dataclass
class GenerationStats:
    """Counters for one dataset run."""
    scenes: int = 0
    rescans: int = 0
    nodes: int = 0
    triples: int = 0
    files: List[Path] = field(default_factory=list)


def scene_seed(seed: int, index: int) -> int:
    return seed + index


def rescan_seed(seed: int, index: int, rescan: int) -> int:
    return 1_000_003 * (seed + index) + rescan + 1


def save_scene(out_dir: Union[str, Path], stem: str, scene: Scene, graph: SceneGraph) -> List[Path]:
    out_dir = Path(out_dir)
    written = [
        write_ply(out_dir / f"{stem}.ply", scene.points, scene.mask, scene.scene_id),
        save_graph(graph, out_dir / f"{stem}.graph.json"),
    ]
    if scene.reference_view is not None:
        written.append(write_camera(out_dir / f"{stem}.camera.json", scene.reference_view))
    return written


def load_generated(out_dir: Union[str, Path], stem: str) -> Tuple[Scene, SceneGraph]:
    """Scene and graph written by :func:`save_scene`."""
    out_dir = Path(out_dir)
    graph = load_graph(out_dir / f"{stem}.graph.json")
    camera_path = out_dir / f"{stem}.camera.json"
    view = read_camera(camera_path) if camera_path.is_file() else None
    return load_scene(out_dir / f"{stem}.ply", graph, view), graph


def read_changes(path: Union[str, Path]) -> Dict[str, Dict[str, Dict[str, int]]]:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise DataError(f"{path}: cannot read change file ({e})") from e
    for side in ("removed", "added"):
        if set(payload.get(side, {})) != set(COMPONENTS):
            raise DataError(f"{path}: '{side}' must hold {list(COMPONENTS)}")
    return payload


def generate_dataset(count: int, seed: int, out_dir: Union[str, Path], rescans: int = 0,
                     scene_spec: Optional[SceneSpec] = None, rescan_spec: Optional[RescanSpec] = None,
                     progress_callback: Optional[Callable] = None) -> GenerationStats:
    """Generate ``count`` scenes (and ``rescans`` perturbed copies of each) into ``out_dir``."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scene_spec = scene_spec or SceneSpec()
    rescan_spec = rescan_spec or RescanSpec()
    stats = GenerationStats()
    logger.info(f"Generating {count} scene(s) with {rescans} rescan(s) each into {out_dir}")

    for k in tqdm(range(count), desc="Generating scenes", disable=progress_callback is not None):
        spec = replace(scene_spec, seed=scene_seed(seed, k), scene_id=f"scene{k}")
        scene, graph = generate_scene(spec)
        stats.files += save_scene(out_dir, f"scene{k}", scene, graph)
        stats.scenes += 1
        stats.nodes += len(graph.nodes)
        stats.triples += sum(1 for _ in graph.triples())

        for m in range(rescans):
            stem = f"scene{k}.rescan{m}"
            spec_m = replace(rescan_spec, seed=rescan_seed(seed, k, m), scene_id=stem)
            result = perturb(scene, graph, spec_m)
            stats.files += save_scene(out_dir, stem, result.scene, result.graph)
            path = out_dir / f"{stem}.changes.json"
            payload = changes_to_dict(*log_to_deltas(result.log, stem))
            payload["ops"] = [{"op": r.op, "instance_id": r.instance_id} for r in result.log]
            path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
            stats.files.append(path)
            stats.rescans += 1

        if progress_callback:
            progress_callback((k + 1) / count, stats)

    logger.info(
        f"Generated {stats.scenes} scenes and {stats.rescans} rescans "
        f"({stats.nodes} nodes, {stats.triples} triples)"
    )
    return stats
