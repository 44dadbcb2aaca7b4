"""Training loop with a bounded background loader."""
import logging
import queue
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from ssg_toolkit.core.graph import SceneGraph
from ssg_toolkit.evaluation.metrics import object_hits, pooled_recall, predicate_hits
from ssg_toolkit.geometry.scene import Scene
from ssg_toolkit.sgpn.losses import class_weights, total_loss
from ssg_toolkit.sgpn.model import ModelConfig, ModelInputs, SceneGraphNet, Vocabulary, forward, prepare_inputs
from ssg_toolkit.sgpn.optim import Adam, backward_and_step
from ssg_toolkit.sgpn.tensor import no_grad
from ssg_toolkit.utils.errors import EmptyDataset

logger = logging.getLogger(__name__)

Example = Tuple[Scene, SceneGraph]


@dataclass(frozen=True)
class TrainConfig:
    lambda_obj: float = 0.1
    gamma: float = 2.0
    predicate_alpha: float = 0.25
    learning_rate: float = 1e-4
    betas: Tuple[float, float] = (0.9, 0.999)
    epochs: int = 1
    seed: int = 0
    recall_k: int = 3
    queue_size: int = 4
    shuffle: bool = True

    def __post_init__(self):
        if self.lambda_obj < 0 or self.gamma < 0:
            raise ValueError("lambda_obj and gamma must be non-negative")
        if not 0 < self.predicate_alpha < 1:
            raise ValueError(f"predicate_alpha must lie in (0, 1), got {self.predicate_alpha}")
        if self.epochs < 1 or self.queue_size < 1 or self.recall_k < 1:
            raise ValueError("epochs, queue_size and recall_k must be positive")


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    object_recall: Optional[float] = None
    predicate_recall: Optional[float] = None


@dataclass
class TrainingLog:
    """Per-epoch mean training loss and validation recalls."""
    epochs: List[EpochRecord] = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.epochs[-1].loss if self.epochs else float("nan")


_DONE = object()


class SceneLoader:
    """Prepares network inputs on a producer thread, handing them over through a bounded queue."""

    def __init__(self, examples: Sequence[Example], order: Sequence[int], num_points: int,
                 seed: int, epoch: int, maxsize: int = 4):
        self.examples = examples
        self.order = list(order)
        self.num_points = num_points
        self.seed = seed
        self.epoch = epoch
        self._queue: queue.Queue = queue.Queue(maxsize=maxsize)
        self._stop = threading.Event()

    def _produce(self) -> None:
        try:
            for index in self.order:
                if self._stop.is_set():
                    return
                scene, graph = self.examples[index]
                rng = np.random.default_rng([self.seed, self.epoch, index])
                inputs = prepare_inputs(scene, self.num_points, rng)
                self._queue.put((inputs, graph.subgraph(inputs.node_ids)))
        except Exception as e:
            self._queue.put(e)
        else:
            self._queue.put(_DONE)

    def __iter__(self) -> Iterator[Tuple[ModelInputs, SceneGraph]]:
        worker = threading.Thread(target=self._produce, name=f"scene-loader-{self.epoch}", daemon=True)
        worker.start()
        try:
            while True:
                item = self._queue.get()
                if item is _DONE:
                    return
                if isinstance(item, Exception):
                    raise item
                yield item
        finally:
            self._stop.set()
            while worker.is_alive():
                try:
                    self._queue.get_nowait()
                except queue.Empty:
                    worker.join(timeout=0.05)


def evaluate(model: SceneGraphNet, examples: Sequence[Example], k: int) -> Tuple[Optional[float], Optional[float]]:
    """Object top-1 recall and predicate recall@k over ``examples``."""
    with no_grad():
        scores = [forward(scene, model) for scene, _ in examples]
    graphs = [g.subgraph(s.node_ids) for s, (_, g) in zip(scores, examples)]
    return pooled_recall(object_hits, scores, graphs, 1), pooled_recall(predicate_hits, scores, graphs, k)


def train(dataset: Sequence[Example], config: TrainConfig = TrainConfig(),
          model_config: ModelConfig = ModelConfig(), vocabulary: Optional[Vocabulary] = None,
          validation: Sequence[Example] = (), progress_callback: Optional[Callable] = None,
          ) -> Tuple[SceneGraphNet, TrainingLog]:
    """Fit a fresh network on ``dataset``; deterministic in the two seeds."""
    if not dataset:
        raise EmptyDataset("Training needs at least one (scene, graph) example")
    graphs = [g for _, g in dataset]
    vocabulary = vocabulary or Vocabulary.from_graphs(graphs + [g for _, g in validation])
    model = SceneGraphNet(model_config, vocabulary)
    optimizer = Adam(model.parameters(), config.learning_rate, config.betas)
    weights = class_weights((n.label for g in graphs for n in g.nodes), vocabulary)
    rng = np.random.default_rng(config.seed)
    log = TrainingLog()
    logger.info(
        f"Training on {len(dataset)} scene(s) for {config.epochs} epoch(s): "
        f"{len(vocabulary.classes)} classes, {len(vocabulary.predicates)} predicates, "
        f"{model.num_parameters()} parameters"
    )

    for epoch in tqdm(range(config.epochs), desc="Training", disable=progress_callback is not None):
        order = rng.permutation(len(dataset)) if config.shuffle else np.arange(len(dataset))
        loader = SceneLoader(dataset, order, model_config.num_points, config.seed, epoch, config.queue_size)
        losses = []
        for inputs, graph in loader:
            scores = model.forward_inputs(inputs)
            loss = total_loss(scores, graph, config.lambda_obj, config.gamma, config.predicate_alpha, weights)
            backward_and_step(model, loss, optimizer)
            losses.append(loss.item())
        record = EpochRecord(epoch, float(np.mean(losses)))
        if validation:
            record.object_recall, record.predicate_recall = evaluate(model, validation, config.recall_k)
        log.epochs.append(record)
        logger.info(
            f"Epoch {epoch}: loss {record.loss:.5f}, object R@1 {record.object_recall}, "
            f"predicate R@{config.recall_k} {record.predicate_recall}"
        )
        if progress_callback:
            progress_callback((epoch + 1) / config.epochs, log)
    return model, log
