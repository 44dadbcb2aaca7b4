"""Reading and writing ``graph.json`` documents."""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

from ssg_toolkit.core.attributes import Attribute
from ssg_toolkit.core.graph import Edge, NodeInstance, SceneGraph
from ssg_toolkit.core.hierarchy import ClassHierarchy
from ssg_toolkit.utils.errors import DataError, SceneGraphError

logger = logging.getLogger(__name__)


def graph_to_dict(graph: SceneGraph) -> Dict[str, Any]:
    return {
        "scene_id": graph.scene_id,
        "nodes": [
            {
                "id": node.id,
                "classes": list(node.hierarchy.labels),
                "attributes": [
                    {"kind": a.kind.value, "name": a.name} for a in sorted(node.attributes)
                ],
            }
            for node in graph.nodes
        ],
        "edges": [
            {"subject": e.subject_id, "object": e.object_id, "predicates": sorted(e.predicates)}
            for e in graph.edges
        ],
    }


def graph_from_dict(payload: Dict[str, Any]) -> SceneGraph:
    try:
        nodes = tuple(
            NodeInstance(
                int(n["id"]),
                ClassHierarchy(tuple(n["classes"])),
                frozenset(Attribute(a["kind"], a["name"]) for a in n.get("attributes", [])),
            )
            for n in payload["nodes"]
        )
        edges = tuple(
            Edge(int(e["subject"]), int(e["object"]), frozenset(e["predicates"]))
            for e in payload["edges"]
        )
        return SceneGraph(str(payload["scene_id"]), nodes, edges)
    except (KeyError, TypeError, ValueError, SceneGraphError) as e:
        raise DataError(f"Malformed graph document: {e}") from e


def serialize_graph(graph: SceneGraph) -> str:
    return json.dumps(graph_to_dict(graph), indent=2, sort_keys=True) + "\n"


def parse_graph(text: str) -> SceneGraph:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise DataError(f"Graph document is not valid JSON: {e}") from e
    return graph_from_dict(payload)


def save_graph(graph: SceneGraph, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(serialize_graph(graph), encoding="utf-8")
    logger.debug(f"Wrote graph {graph.scene_id} to {path}")
    return path


def load_graph(path: Union[str, Path]) -> SceneGraph:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Graph file not found: {path}")
    return parse_graph(path.read_text(encoding="utf-8"))
