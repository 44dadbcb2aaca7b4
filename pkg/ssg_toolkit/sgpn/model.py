"""Scene graph prediction network: encoders, triplet GCN and classifier heads."""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from ssg_toolkit.core.graph import GraphBuilder, NodeInstance, SceneGraph
from ssg_toolkit.core.hierarchy import ClassHierarchy
from ssg_toolkit.geometry.extract import instance_points, pair_points
from ssg_toolkit.geometry.scene import Scene
from ssg_toolkit.sgpn.encoders import EDGE_CHANNELS, NODE_CHANNELS, PointEncoder, edge_input, node_input
from ssg_toolkit.sgpn.gcn import TripletGCN
from ssg_toolkit.sgpn.layers import MLP, Module
from ssg_toolkit.sgpn.tensor import Tensor, no_grad
from ssg_toolkit.utils.errors import TooFewInstances

logger = logging.getLogger(__name__)

MULTI = "multi"
SINGLE = "single"
NONE_PREDICATE = "none"


@dataclass(frozen=True)
class Vocabulary:
    """Ordered object classes and predicates the heads are sized to."""
    classes: Tuple[str, ...]
    predicates: Tuple[str, ...]

    def __post_init__(self):
        for name, tokens in (("classes", self.classes), ("predicates", self.predicates)):
            if not tokens:
                raise ValueError(f"Vocabulary {name} must not be empty")
            if len(set(tokens)) != len(tokens):
                raise ValueError(f"Vocabulary {name} contains duplicates")

    @classmethod
    def from_graphs(cls, graphs: Iterable[SceneGraph], predicates: Optional[Sequence[str]] = None) -> "Vocabulary":
        graphs = list(graphs)
        classes = sorted({n.label for g in graphs for n in g.nodes})
        if predicates is None:
            predicates = sorted({p for g in graphs for e in g.edges for p in e.predicates})
        return cls(tuple(classes), tuple(predicates))

    def class_index(self, label: str) -> int:
        return self.classes.index(label)


@dataclass(frozen=True)
class ModelConfig:
    point_widths: Tuple[int, ...] = (64, 128, 256)
    feature_width: int = 256
    gcn_layers: int = 5
    head_widths: Tuple[int, ...] = (256, 128)
    num_points: int = 256
    predicate_mode: str = MULTI
    classify_from: str = "gcn"
    baseline: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.predicate_mode not in (MULTI, SINGLE):
            raise ValueError(f"predicate_mode must be '{MULTI}' or '{SINGLE}', got {self.predicate_mode!r}")
        if self.classify_from not in ("gcn", "pointnet"):
            raise ValueError(f"classify_from must be 'gcn' or 'pointnet', got {self.classify_from!r}")
        if self.num_points < 1 or self.feature_width < 1 or self.gcn_layers < 0:
            raise ValueError("num_points and feature_width must be positive, gcn_layers non-negative")


@dataclass(frozen=True, eq=False)
class ModelInputs:
    """Sampled, centered point sets of every instance and ordered instance pair."""
    scene_id: str
    node_ids: Tuple[int, ...]
    pairs: Tuple[Tuple[int, int], ...]
    node_points: np.ndarray
    edge_points: np.ndarray

    @property
    def subjects(self) -> np.ndarray:
        index = {n: k for k, n in enumerate(self.node_ids)}
        return np.array([index[s] for s, _ in self.pairs], dtype=np.int64)

    @property
    def objects(self) -> np.ndarray:
        index = {n: k for k, n in enumerate(self.node_ids)}
        return np.array([index[o] for _, o in self.pairs], dtype=np.int64)


def prepare_inputs(scene: Scene, num_points: int, rng: np.random.Generator) -> ModelInputs:
    """Network inputs for all non-empty instances of ``scene`` and all their ordered pairs."""
    node_ids = tuple(i for i in scene.instance_ids if len(scene.point_indices(i)))
    if len(node_ids) < 2:
        raise TooFewInstances(f"Scene {scene.scene_id} has {len(node_ids)} instance(s); at least 2 are needed")
    pairs = tuple(itertools.permutations(node_ids, 2))
    node_points = np.stack([node_input(instance_points(scene, i), num_points, rng) for i in node_ids])
    edge_points = np.stack([edge_input(*pair_points(scene, s, o), num_points, rng) for s, o in pairs])
    return ModelInputs(scene.scene_id, node_ids, pairs, node_points, edge_points)


@dataclass(eq=False)
class PredictionScores:
    """Object and predicate logits with their probabilities.

    ``predicate_probs`` holds one independent probability per predicate in the
    multi-label mode; in the single mode it holds the softmax mass of each real
    predicate and ``none_probs`` the remainder.
    """
    scene_id: str
    node_ids: Tuple[int, ...]
    pairs: Tuple[Tuple[int, int], ...]
    vocabulary: Vocabulary
    object_logits: Tensor
    predicate_logits: Tensor
    mode: str = MULTI
    object_probs: np.ndarray = field(init=False)
    predicate_probs: np.ndarray = field(init=False)
    none_probs: np.ndarray = field(init=False)

    def __post_init__(self):
        with no_grad():
            self.object_probs = self.object_logits.softmax(axis=-1).data
            if self.mode == MULTI:
                self.predicate_probs = self.predicate_logits.sigmoid().data
                self.none_probs = np.prod(1.0 - self.predicate_probs, axis=1)
            else:
                probs = self.predicate_logits.softmax(axis=-1).data
                self.predicate_probs, self.none_probs = probs[:, :-1], probs[:, -1]

    def pair_index(self, subject_id: int, object_id: int) -> int:
        return self.pairs.index((subject_id, object_id))

    def predicted_classes(self) -> Tuple[str, ...]:
        return tuple(self.vocabulary.classes[k] for k in self.object_probs.argmax(axis=1))


class SceneGraphNet(Module):
    """Node and edge point encoders, a triplet GCN and two classifier heads."""

    def __init__(self, config: ModelConfig, vocabulary: Vocabulary):
        rng = np.random.default_rng(config.seed)
        width = config.feature_width
        self.config = config
        self.vocabulary = vocabulary
        self.node_encoder = PointEncoder(NODE_CHANNELS, config.point_widths, width, rng)
        self.edge_encoder = PointEncoder(EDGE_CHANNELS, config.point_widths, width, rng)
        self.gcn = TripletGCN(width, config.gcn_layers, rng)
        num_predicates = len(vocabulary.predicates) + (1 if config.predicate_mode == SINGLE else 0)
        self.object_head = MLP([width, *config.head_widths, len(vocabulary.classes)], rng)
        self.predicate_head = MLP([width, *config.head_widths, num_predicates], rng)
        logger.debug(f"Built network with {self.num_parameters()} parameters")

    def sample_rng(self) -> np.random.Generator:
        return np.random.default_rng(self.config.seed)

    def forward_inputs(self, inputs: ModelInputs) -> PredictionScores:
        node_features = self.node_encoder(Tensor(inputs.node_points))
        edge_features = self.edge_encoder(Tensor(inputs.edge_points))
        if self.config.baseline:
            node_out, edge_out = node_features, edge_features
        else:
            node_out, edge_out = self.gcn(node_features, edge_features, inputs.subjects, inputs.objects)
        object_input = node_features if self.config.classify_from == "pointnet" else node_out
        return PredictionScores(
            inputs.scene_id, inputs.node_ids, inputs.pairs, self.vocabulary,
            self.object_head(object_input), self.predicate_head(edge_out), self.config.predicate_mode,
        )

    def __call__(self, scene: Scene) -> PredictionScores:
        return forward(scene, self)


def forward(scene: Scene, model: SceneGraphNet, rng: Optional[np.random.Generator] = None) -> PredictionScores:
    """Scores for every instance and ordered instance pair of ``scene``.

    Point sampling uses ``rng`` or, by default, a generator seeded from the
    model config, so repeated calls on one scene give identical scores.
    """
    rng = rng if rng is not None else model.sample_rng()
    return model.forward_inputs(prepare_inputs(scene, model.config.num_points, rng))


def predict_graph(scores: PredictionScores, threshold: float = 0.5) -> SceneGraph:
    """Graph of argmax classes and, per ordered pair, the predicted predicates."""
    builder = GraphBuilder(scores.scene_id)
    for node_id, label in zip(scores.node_ids, scores.predicted_classes()):
        builder.add_node(NodeInstance(node_id, ClassHierarchy.single(label)))
    predicates = scores.vocabulary.predicates
    for k, (s, o) in enumerate(scores.pairs):
        row = scores.predicate_probs[k]
        if scores.mode == MULTI:
            chosen = [predicates[q] for q in np.flatnonzero(row > threshold)]
        else:
            best = int(row.argmax())
            chosen = [predicates[best]] if row[best] > scores.none_probs[k] else []
        for predicate in chosen:
            builder.add_triple(s, predicate, o)
    return builder.build()
