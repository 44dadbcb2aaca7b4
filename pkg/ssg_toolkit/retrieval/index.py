"""Reference scan pools and top-k retrieval over them."""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Union

from ssg_toolkit.core.graph import SceneGraph
from ssg_toolkit.core.multisets import AugmentedGraph, to_multisets
from ssg_toolkit.core.serialization import load_graph
from ssg_toolkit.retrieval.similarity import FULL, graph_similarity
from ssg_toolkit.utils.errors import DataError, EmptyIndex

logger = logging.getLogger(__name__)

GRAPH_SUFFIX = ".graph.json"


class Match(NamedTuple):
    scene_id: str
    score: float


@dataclass(frozen=True)
class ScanIndex:
    """Augmented graphs of a reference pool, keyed by scene id."""
    entries: Mapping[str, AugmentedGraph]

    def __len__(self):
        return len(self.entries)

    def __contains__(self, scene_id: str) -> bool:
        return scene_id in self.entries

    @property
    def scene_ids(self) -> List[str]:
        return sorted(self.entries)


def build_index(graphs: Iterable[Union[SceneGraph, AugmentedGraph]]) -> ScanIndex:
    entries: Dict[str, AugmentedGraph] = {}
    for graph in graphs:
        augmented = graph if isinstance(graph, AugmentedGraph) else to_multisets(graph)
        if augmented.scene_id in entries:
            raise DataError(f"Duplicate scene id {augmented.scene_id!r} in retrieval pool")
        entries[augmented.scene_id] = augmented
    return ScanIndex(entries)


def load_pool(directory: Union[str, Path], include_rescans: bool = False) -> ScanIndex:
    """Index of every ``*.graph.json`` in ``directory`` (rescans skipped unless asked for)."""
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError(f"Pool directory {directory} does not exist")
    paths = sorted(directory.glob(f"*{GRAPH_SUFFIX}"))
    if not include_rescans:
        paths = [p for p in paths if ".rescan" not in p.name]
    index = build_index(load_graph(p) for p in paths)
    logger.info(f"Loaded retrieval pool of {len(index)} scene(s) from {directory}")
    return index


def retrieve(query: Union[SceneGraph, AugmentedGraph], index: ScanIndex, coeff="jaccard", mode: str = FULL,
             topk: Optional[int] = None) -> List[Match]:
    """Pool entries ranked by similarity to ``query``, ties broken by scene id."""
    if len(index) == 0:
        raise EmptyIndex("Cannot retrieve from an empty pool")
    query = query if isinstance(query, AugmentedGraph) else to_multisets(query)
    ranked = sorted(
        (Match(sid, graph_similarity(query, entry, coeff, mode)) for sid, entry in index.entries.items()),
        key=lambda m: (-m.score, m.scene_id),
    )
    return ranked if topk is None else ranked[:topk]


def rank_of(ranking: List[Match], scene_id: str) -> Optional[int]:
    """1-based position of ``scene_id`` in a ranking."""
    for position, match in enumerate(ranking, start=1):
        if match.scene_id == scene_id:
            return position
    return None
