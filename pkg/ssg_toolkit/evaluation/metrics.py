"""Recall@k for triplets, objects and predicates, and retrieval top-k accuracy."""
import logging
from typing import TYPE_CHECKING, Callable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from ssg_toolkit.core.graph import SceneGraph
from ssg_toolkit.utils.errors import MissingGroundTruth, NoGroundTruthTriples, ShapeMismatch

if TYPE_CHECKING:
    from ssg_toolkit.retrieval.index import Match
    from ssg_toolkit.sgpn.model import PredictionScores

logger = logging.getLogger(__name__)

Hits = Tuple[int, int]


def _check_nodes(scores: "PredictionScores", gt: SceneGraph) -> None:
    if tuple(scores.node_ids) != tuple(gt.node_ids):
        raise ShapeMismatch(f"Scores cover nodes {list(scores.node_ids)}, graph has {list(gt.node_ids)}")


def _top(row: np.ndarray, n: int) -> np.ndarray:
    """Indices of the ``n`` highest entries, lower index first among ties."""
    return np.argsort(-row, kind="stable")[:n]


def _gt_slots(scores: "PredictionScores", gt: SceneGraph) -> List[Tuple[int, int]]:
    """(pair index, predicate index) of every ground-truth triple with an in-vocabulary predicate."""
    predicate_index = {p: q for q, p in enumerate(scores.vocabulary.predicates)}
    pair_index = {pair: k for k, pair in enumerate(scores.pairs)}
    return sorted(
        (pair_index[(s, o)], predicate_index[p])
        for s, p, o in gt.triples()
        if p in predicate_index and (s, o) in pair_index
    )


class TripletCandidate(NamedTuple):
    """One (subject class, predicate, object class) hypothesis for an ordered node pair."""
    score: float
    subject_id: int
    object_id: int
    subject_class: int
    predicate: int
    object_class: int


def _candidate_scores(scores: "PredictionScores") -> Tuple[np.ndarray, np.ndarray]:
    """Scores of every hypothesis, shaped (pair, subject class, predicate, object class), and their rank order.

    Ties are broken by subject id, object id, subject class, predicate and
    object class, in that order.
    """
    node_pos = {n: k for k, n in enumerate(scores.node_ids)}
    subjects = np.array([s for s, _ in scores.pairs], dtype=np.int64)
    objects = np.array([o for _, o in scores.pairs], dtype=np.int64)
    subject_rows = np.array([node_pos[s] for s in subjects.tolist()], dtype=np.int64)
    object_rows = np.array([node_pos[o] for o in objects.tolist()], dtype=np.int64)
    probs = scores.object_probs
    table = (probs[subject_rows][:, :, None, None] * scores.predicate_probs[:, None, :, None]
             * probs[object_rows][:, None, None, :])
    pair, subject_class, predicate, object_class = (a.ravel() for a in np.indices(table.shape))
    order = np.lexsort((object_class, predicate, subject_class,
                        objects[pair], subjects[pair], -table.ravel()))
    return table, order


def triplet_candidates(scores: "PredictionScores") -> List[TripletCandidate]:
    """Every hypothesis of every ordered pair, best first.

    A candidate's score is the product of the subject class, predicate and
    object class probabilities.
    """
    table, order = _candidate_scores(scores)
    candidates = []
    for flat in order:
        k, sc, q, oc = np.unravel_index(flat, table.shape)
        s, o = scores.pairs[k]
        candidates.append(TripletCandidate(float(table[k, sc, q, oc]), s, o, int(sc), int(q), int(oc)))
    return candidates


def triplet_hits(scores: "PredictionScores", gt: SceneGraph, n: int) -> Hits:
    """A ground-truth triple is a hit when its hypothesis, at the true classes, ranks within the first ``n``."""
    _check_nodes(scores, gt)
    vocabulary = scores.vocabulary
    predicate_index = {p: q for q, p in enumerate(vocabulary.predicates)}
    pair_index = {pair: k for k, pair in enumerate(scores.pairs)}
    truth = [(s, p, o) for s, p, o in gt.triples() if p in predicate_index]
    if not truth:
        return 0, 0
    table, order = _candidate_scores(scores)
    rank = np.empty(order.size, dtype=np.int64)
    rank[order] = np.arange(order.size)
    hits = 0
    for s, p, o in truth:
        subject_label, object_label = gt.node(s).label, gt.node(o).label
        if (s, o) not in pair_index or subject_label not in vocabulary.classes or object_label not in vocabulary.classes:
            continue
        flat = np.ravel_multi_index(
            (pair_index[(s, o)], vocabulary.class_index(subject_label), predicate_index[p],
             vocabulary.class_index(object_label)),
            table.shape,
        )
        hits += int(rank[flat] < n)
    return hits, len(truth)


def object_hits(scores: "PredictionScores", gt: SceneGraph, n: int) -> Hits:
    _check_nodes(scores, gt)
    hits = 0
    for k, node_id in enumerate(scores.node_ids):
        label = gt.node(node_id).label
        if label in scores.vocabulary.classes and scores.vocabulary.class_index(label) in _top(scores.object_probs[k], n):
            hits += 1
    return hits, len(scores.node_ids)


def predicate_hits(scores: "PredictionScores", gt: SceneGraph, n: int) -> Hits:
    _check_nodes(scores, gt)
    slots = _gt_slots(scores, gt)
    hits = sum(1 for k, q in slots if q in _top(scores.predicate_probs[k], n))
    return hits, len(slots)


def _recall(hits: Hits, what: str) -> float:
    found, total = hits
    if total == 0:
        raise NoGroundTruthTriples(f"No ground-truth {what} to recall")
    return found / total


def triplet_recall(scores: "PredictionScores", gt: SceneGraph, n: int) -> float:
    return _recall(triplet_hits(scores, gt, n), "triples")


def object_recall(scores: "PredictionScores", gt: SceneGraph, n: int) -> float:
    return _recall(object_hits(scores, gt, n), "objects")


def predicate_recall(scores: "PredictionScores", gt: SceneGraph, n: int) -> float:
    return _recall(predicate_hits(scores, gt, n), "predicates")


def pooled_recall(hits_fn: Callable[["PredictionScores", SceneGraph, int], Hits],
                  scores: Sequence["PredictionScores"], graphs: Sequence[SceneGraph], n: int) -> Optional[float]:
    """Recall over all items of all scenes; ``None`` when there is nothing to recall."""
    found = total = 0
    for s, g in zip(scores, graphs):
        h, t = hits_fn(s, g, n)
        found, total = found + h, total + t
    if total == 0:
        logger.warning(f"{hits_fn.__name__}: no ground truth to recall, skipped")
        return None
    return found / total


def retrieval_topk(assignments: Mapping[str, Sequence[Union["Match", str]]], gt: Mapping[str, str], k: int) -> float:
    """Fraction of queries whose true scene is among their first ``k`` matches."""
    if not assignments:
        raise MissingGroundTruth("No queries to evaluate")
    hits = 0
    for query, ranking in assignments.items():
        if query not in gt:
            raise MissingGroundTruth(f"Query {query!r} has no ground-truth scene")
        ids = [m if isinstance(m, str) else m.scene_id for m in ranking]
        if gt[query] not in ids:
            raise MissingGroundTruth(f"True scene {gt[query]!r} of query {query!r} is not in the pool")
        hits += gt[query] in ids[:k]
    return hits / len(assignments)
