"""Focal losses for object classification and predicate prediction."""
import logging
import math
from collections import Counter
from typing import Iterable, Optional, Sequence

import numpy as np

from ssg_toolkit.core.graph import SceneGraph
from ssg_toolkit.sgpn.model import MULTI, PredictionScores, Vocabulary
from ssg_toolkit.sgpn.tensor import Tensor
from ssg_toolkit.utils.errors import DataError, DomainError, ShapeMismatch

logger = logging.getLogger(__name__)


def focal_loss(p_t: float, alpha_t: float, gamma: float) -> float:
    """-alpha_t * (1 - p_t)^gamma * log(p_t) for a single probability."""
    if not 0.0 < p_t <= 1.0:
        raise DomainError(f"p_t must lie in (0, 1], got {p_t}")
    if alpha_t <= 0.0:
        raise DomainError(f"alpha_t must be positive, got {alpha_t}")
    if gamma < 0.0:
        raise DomainError(f"gamma must be non-negative, got {gamma}")
    return -alpha_t * (1.0 - p_t) ** gamma * math.log(p_t)


def focal_terms(log_p: Tensor, alpha: np.ndarray, gamma: float) -> Tensor:
    """Elementwise focal loss from log-probabilities of the true outcome."""
    return -(alpha * (1.0 - log_p.exp()) ** gamma * log_p)


def class_weights(labels: Iterable[str], vocabulary: Vocabulary) -> np.ndarray:
    """Inverse class frequency, scaled to mean 1 over the classes that occur; unseen classes get 1."""
    counts = Counter(labels)
    weights = np.ones(len(vocabulary.classes))
    seen = [k for k, c in enumerate(vocabulary.classes) if counts[c] > 0]
    if seen:
        inverse = np.array([1.0 / counts[vocabulary.classes[k]] for k in seen])
        weights[seen] = inverse / inverse.mean()
    return weights


def object_targets(scores: PredictionScores, graph: SceneGraph) -> np.ndarray:
    if tuple(graph.node_ids) != tuple(scores.node_ids):
        raise ShapeMismatch(
            f"Scores cover nodes {list(scores.node_ids)} but the graph has {list(graph.node_ids)}"
        )
    try:
        return np.array([scores.vocabulary.class_index(graph.node(i).label) for i in scores.node_ids])
    except ValueError as e:
        raise DataError(f"Graph {graph.scene_id}: {e}") from e


def predicate_targets(scores: PredictionScores, graph: SceneGraph) -> np.ndarray:
    """(pairs, predicates) 0/1 matrix; predicates outside the vocabulary are ignored."""
    index = {p: q for q, p in enumerate(scores.vocabulary.predicates)}
    targets = np.zeros((len(scores.pairs), len(index)))
    for k, (s, o) in enumerate(scores.pairs):
        edge = graph.edge(s, o)
        if edge is None:
            continue
        for p in edge.predicates:
            if p in index:
                targets[k, index[p]] = 1.0
    return targets


def single_targets(multi_targets: np.ndarray) -> np.ndarray:
    """Class index per pair for the single-predicate head: the first true predicate, or ``none``."""
    none = multi_targets.shape[1]
    return np.array([int(np.argmax(row)) if row.any() else none for row in multi_targets], dtype=np.int64)


def object_loss(scores: PredictionScores, targets: np.ndarray, weights: np.ndarray, gamma: float) -> Tensor:
    log_p = scores.object_logits.log_softmax(axis=-1)
    rows = np.arange(len(targets))
    return focal_terms(log_p[rows, targets], weights[targets], gamma).mean()


def predicate_loss(scores: PredictionScores, targets: np.ndarray, alpha: float, gamma: float) -> Tensor:
    logits = scores.predicate_logits
    if scores.mode == MULTI:
        log_pos = logits.log_sigmoid()
        log_neg = (-logits).log_sigmoid()
        positive = focal_terms(log_pos, np.full(targets.shape, alpha), gamma) * targets
        negative = focal_terms(log_neg, np.full(targets.shape, 1.0 - alpha), gamma) * (1.0 - targets)
        return (positive + negative).mean()
    labels = single_targets(targets)
    log_p = logits.log_softmax(axis=-1)
    rows = np.arange(len(labels))
    return focal_terms(log_p[rows, labels], np.full(len(labels), alpha), gamma).mean()


def total_loss(scores: PredictionScores, graph: SceneGraph, lambda_obj: float = 0.1, gamma: float = 2.0,
               predicate_alpha: float = 0.25, class_alpha: Optional[Sequence[float]] = None) -> Tensor:
    """lambda_obj * object loss + predicate loss for one scene."""
    if lambda_obj < 0 or gamma < 0 or not 0 < predicate_alpha < 1:
        raise DomainError(
            f"Need lambda_obj >= 0, gamma >= 0 and 0 < alpha < 1, got {lambda_obj}, {gamma}, {predicate_alpha}"
        )
    weights = np.ones(len(scores.vocabulary.classes)) if class_alpha is None else np.asarray(class_alpha, float)
    if weights.shape != (len(scores.vocabulary.classes),):
        raise ShapeMismatch(f"Expected {len(scores.vocabulary.classes)} class weights, got {weights.shape}")
    classes = object_targets(scores, graph)
    loss = predicate_loss(scores, predicate_targets(scores, graph), predicate_alpha, gamma)
    if lambda_obj > 0:
        loss = loss + lambda_obj * object_loss(scores, classes, weights, gamma)
    return loss
