"""Semantic change detection from the unmatched parts of two graphs."""
import logging
from typing import Dict, Tuple

from ssg_toolkit.core.multisets import AugmentedGraph, multiset_difference, token_str

logger = logging.getLogger(__name__)


def detect_changes(before: AugmentedGraph, after: AugmentedGraph) -> Tuple[AugmentedGraph, AugmentedGraph]:
    """Per component, tokens only in ``before`` (removed) and only in ``after`` (added)."""
    removed = AugmentedGraph(
        before.scene_id, *(multiset_difference(a, b) for a, b in zip(before.components(), after.components()))
    )
    added = AugmentedGraph(
        after.scene_id, *(multiset_difference(b, a) for a, b in zip(before.components(), after.components()))
    )
    logger.debug(
        f"Changes {before.scene_id} -> {after.scene_id}: "
        f"{sum(sum(c.values()) for c in removed.components())} removed, "
        f"{sum(sum(c.values()) for c in added.components())} added"
    )
    return removed, added


def is_unchanged(removed: AugmentedGraph, added: AugmentedGraph) -> bool:
    return not any(removed.components()) and not any(added.components())


def changes_to_dict(removed: AugmentedGraph, added: AugmentedGraph) -> Dict[str, Dict[str, Dict[str, int]]]:
    """JSON-ready residues with tokens joined by ``|``."""
    def side(graph: AugmentedGraph) -> Dict[str, Dict[str, int]]:
        return {name: {token_str(t): c for t, c in sorted(counter.items())}
                for name, counter in graph.as_dict().items()}
    return {"removed": side(removed), "added": side(added)}
