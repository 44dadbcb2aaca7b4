"""End-to-end experiments: data, prediction, retrieval and change detection.

An experiment runs on a train and a test split of synthetic scenes, either
generated in memory or read from a directory written by ``gen-synth``.
Each test scene gets one rescan, which serves as the retrieval query (3D
graph or its 2D rendering from a sampled camera) and as the input pair for
change detection.
"""
import json
import logging
import re
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from tqdm import tqdm

from ssg_toolkit import __version__
from ssg_toolkit.core.graph import SceneGraph
from ssg_toolkit.core.multisets import to_multisets
from ssg_toolkit.evaluation.config import ExperimentConfig
from ssg_toolkit.evaluation.metrics import (
    object_hits,
    pooled_recall,
    predicate_hits,
    retrieval_topk,
    triplet_hits,
)
from ssg_toolkit.geometry.relations import ExtractionThresholds
from ssg_toolkit.geometry.render import render_graph_2d
from ssg_toolkit.geometry.scene import Scene
from ssg_toolkit.retrieval.changes import changes_to_dict, detect_changes
from ssg_toolkit.retrieval.index import build_index, retrieve
from ssg_toolkit.retrieval.similarity import FULL, NODES_ONLY
from ssg_toolkit.sgpn.checkpoint import load_checkpoint
from ssg_toolkit.sgpn.model import SceneGraphNet, Vocabulary, forward, predict_graph
from ssg_toolkit.sgpn.tensor import no_grad
from ssg_toolkit.sgpn.train import train
from ssg_toolkit.synth.dataset import load_generated, read_changes, rescan_seed, scene_seed
from ssg_toolkit.synth.generator import SceneSpec, generate_scene, sample_view
from ssg_toolkit.synth.rescan import RescanSpec, log_to_deltas, perturb
from ssg_toolkit.utils.errors import ConfigError

logger = logging.getLogger(__name__)

Example = Tuple[Scene, SceneGraph]

RELATIONSHIP_K = (50, 100)
OBJECT_K = (5, 10)
PREDICATE_K = (3, 5)
SETTINGS = ("3D-3D", "2D-3D")
_SCENE_STEM = re.compile(r"^scene(\d+)\.graph\.json$")


@dataclass
class ExperimentCase:
    """A test scene with its rescan and the change residues expected between them."""
    scene: Scene
    graph: SceneGraph
    rescan: Scene
    rescan_graph: SceneGraph
    expected_changes: Optional[dict]


@dataclass
class PredictionRow:
    model: str
    relationship: Dict[str, Optional[float]]
    object: Dict[str, Optional[float]]
    predicate: Dict[str, Optional[float]]


@dataclass
class RetrievalRow:
    source: str
    setting: str
    coefficient: str
    mode: str
    topk: Dict[str, float]


@dataclass
class ChangeSummary:
    pairs: int
    exact: int


@dataclass
class EvalReport:
    """Everything an experiment measured, plus what it was run with."""
    name: str
    counts: Dict[str, int]
    prediction: List[PredictionRow] = field(default_factory=list)
    retrieval: List[RetrievalRow] = field(default_factory=list)
    changes: Optional[ChangeSummary] = None
    config: dict = field(default_factory=dict)
    provenance: Dict[str, Union[int, str]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _scene_spec(config: ExperimentConfig) -> SceneSpec:
    data = config.dataset
    return SceneSpec(node_range=data.node_range, num_classes=data.num_classes, predicates=data.predicates,
                     room_extent=data.room_extent)


def _rescan_spec(config: ExperimentConfig, index: int) -> RescanSpec:
    lo, hi = config.retrieval.ops
    op_count = int(np.random.default_rng([config.seed, index]).integers(lo, hi + 1))
    return RescanSpec(
        seed=rescan_seed(config.seed, index, 0),
        ops=config.retrieval.rescan_ops,
        op_count=op_count,
        num_classes=config.dataset.num_classes,
        predicates=config.dataset.predicates,
        scene_id=f"scene{index}.rescan0",
    )


def _generated_example(config: ExperimentConfig, index: int, thresholds: ExtractionThresholds) -> Example:
    spec = replace(_scene_spec(config), seed=scene_seed(config.seed, index), scene_id=f"scene{index}")
    return generate_scene(spec, thresholds)


def _test_case(config: ExperimentConfig, index: int, scene: Scene, graph: SceneGraph,
               thresholds: ExtractionThresholds) -> ExperimentCase:
    result = perturb(scene, graph, _rescan_spec(config, index), thresholds)
    expected = changes_to_dict(*log_to_deltas(result.log, result.graph.scene_id))
    return ExperimentCase(scene, graph, result.scene, result.graph, expected)


def _stored_indices(directory: Path) -> List[int]:
    return sorted(int(m.group(1)) for p in directory.iterdir() if (m := _SCENE_STEM.match(p.name)))


def load_splits(config: ExperimentConfig,
                thresholds: ExtractionThresholds) -> Tuple[List[Example], List[ExperimentCase]]:
    """Train examples and test cases, generated or read from ``config.dataset.dir``.

    Stored scenes are split in index order: the first ``train_scenes`` train,
    the next ``test_scenes`` test. A stored ``sceneK.rescan0`` is used as the
    test rescan when present; otherwise one is generated.
    """
    data = config.dataset
    needed = data.train_scenes + data.test_scenes
    if data.dir is None:
        examples = [_generated_example(config, k, thresholds)
                    for k in tqdm(range(needed), desc="Generating scenes")]
        indices = list(range(needed))
    else:
        indices = _stored_indices(data.dir)
        if len(indices) < needed:
            raise ConfigError(
                f"dataset.dir: {data.dir} holds {len(indices)} scene(s), {needed} are needed"
            )
        indices = indices[:needed]
        examples = [load_generated(data.dir, f"scene{k}") for k in indices]

    train_examples = examples[:data.train_scenes]
    cases = []
    for k, (scene, graph) in zip(indices[data.train_scenes:], examples[data.train_scenes:]):
        stem = f"scene{k}.rescan0"
        if data.dir is not None and (data.dir / f"{stem}.graph.json").is_file():
            rescan, rescan_graph = load_generated(data.dir, stem)
            changes_path = data.dir / f"{stem}.changes.json"
            expected = read_changes(changes_path) if changes_path.is_file() else None
            if expected is not None:
                expected = {side: expected[side] for side in ("removed", "added")}
            cases.append(ExperimentCase(scene, graph, rescan, rescan_graph, expected))
        else:
            cases.append(_test_case(config, k, scene, graph, thresholds))
    logger.info(f"Experiment data: {len(train_examples)} train scene(s), {len(cases)} test case(s)")
    return train_examples, cases


def _models(config: ExperimentConfig, train_examples: List[Example],
            cases: List[ExperimentCase]) -> Dict[str, SceneGraphNet]:
    if config.checkpoint is not None:
        model, _ = load_checkpoint(config.checkpoint)
        return {"baseline" if model.config.baseline else "full": model}
    vocabulary = Vocabulary.from_graphs(
        [g for _, g in train_examples] + [c.graph for c in cases] + [c.rescan_graph for c in cases],
        config.dataset.predicates,
    )
    train_config = config.train.build(config.seed)
    models = {}
    variants = ("full", "baseline") if "prediction" in config.metrics else ("full",)
    for variant in variants:
        model_config = config.model.build(config.seed, baseline=variant == "baseline")
        logger.info(f"Training the {variant} model")
        models[variant], _ = train(train_examples, train_config, model_config, vocabulary)
    return models


def _prediction_row(name: str, model: SceneGraphNet, cases: List[ExperimentCase]) -> PredictionRow:
    with no_grad():
        scores = [forward(c.scene, model) for c in cases]
    graphs = [c.graph.subgraph(s.node_ids) for s, c in zip(scores, cases)]

    def recalls(hits_fn, ks):
        return {f"R@{k}": pooled_recall(hits_fn, scores, graphs, k) for k in ks}

    return PredictionRow(
        name, recalls(triplet_hits, RELATIONSHIP_K), recalls(object_hits, OBJECT_K), recalls(predicate_hits, PREDICATE_K)
    )


def _queries(config: ExperimentConfig, cases: List[ExperimentCase], rescan_graphs: List[SceneGraph],
             thresholds: ExtractionThresholds) -> Dict[str, List[SceneGraph]]:
    queries = {"3D-3D": rescan_graphs, "2D-3D": []}
    for k, (case, graph) in enumerate(zip(cases, rescan_graphs)):
        view = sample_view(case.rescan, np.random.default_rng([config.seed, k, 2]))
        queries["2D-3D"].append(render_graph_2d(
            graph, case.rescan, view, config.retrieval.min_pixels, thresholds, config.dataset.predicates
        ))
    return queries


def _retrieval_rows(config: ExperimentConfig, source: str, references: List[SceneGraph],
                    queries: Dict[str, List[SceneGraph]]) -> List[RetrievalRow]:
    index = build_index(references)
    truth = {q.scene_id: ref.scene_id for q, ref in zip(queries["3D-3D"], references)}
    rows = []
    for setting in SETTINGS:
        for coefficient in config.retrieval.coefficients:
            for mode in (NODES_ONLY, FULL):
                rankings = {q.scene_id: retrieve(q, index, coefficient, mode) for q in queries[setting]}
                topk = {f"top{k}": retrieval_topk(rankings, truth, k) for k in config.retrieval.topk}
                rows.append(RetrievalRow(source, setting, coefficient, mode, topk))
                logger.info(f"Retrieval {source} {setting} {coefficient}/{mode}: {topk}")
    return rows


def _change_summary(cases: List[ExperimentCase]) -> ChangeSummary:
    exact = 0
    checked = 0
    for case in cases:
        if case.expected_changes is None:
            logger.warning(f"No change log for {case.rescan_graph.scene_id}, skipped")
            continue
        checked += 1
        residues = changes_to_dict(*detect_changes(to_multisets(case.graph), to_multisets(case.rescan_graph)))
        if residues == case.expected_changes:
            exact += 1
        else:
            logger.warning(f"Change residues of {case.rescan_graph.scene_id} differ from its change log")
    return ChangeSummary(checked, exact)


def run_experiment(config: ExperimentConfig, progress_callback: Optional[Callable] = None) -> EvalReport:
    """Run every stage named in ``config.metrics`` and collect the results."""
    thresholds = config.thresholds.build()
    train_examples, cases = load_splits(config, thresholds)
    report = EvalReport(
        name=config.name,
        counts={
            "train_scenes": len(train_examples),
            "test_scenes": len(cases),
            "test_nodes": sum(len(c.graph.nodes) for c in cases),
            "test_triples": sum(sum(1 for _ in c.graph.triples()) for c in cases),
        },
        config=config.echo(),
        provenance={"seed": config.seed, "version": __version__},
    )
    stages = [m for m in ("prediction", "retrieval", "changes") if m in config.metrics]
    needs_model = config.graphs == "predicted" and ("prediction" in stages or "retrieval" in stages)
    models = _models(config, train_examples, cases) if needs_model else {}

    for done, stage in enumerate(stages, start=1):
        logger.info(f"Experiment {config.name}: {stage}")
        if stage == "prediction":
            report.prediction = [_prediction_row(name, model, cases) for name, model in models.items()]
        elif stage == "retrieval":
            rescans = [c.rescan_graph for c in cases]
            report.retrieval = _retrieval_rows(
                config, "GT", [c.graph for c in cases], _queries(config, cases, rescans, thresholds)
            )
            if needs_model:
                model = models.get("full") or next(iter(models.values()))
                with no_grad():
                    references = [predict_graph(forward(c.scene, model)).with_scene_id(c.graph.scene_id)
                                  for c in cases]
                    predicted = [predict_graph(forward(c.rescan, model)).with_scene_id(c.rescan_graph.scene_id)
                                 for c in cases]
                report.retrieval += _retrieval_rows(
                    config, "predicted", references, _queries(config, cases, predicted, thresholds)
                )
        else:
            report.changes = _change_summary(cases)
        if progress_callback:
            progress_callback(done / len(stages), report)
    return report


def write_report(report: EvalReport, path: Union[str, Path], text: Optional[str] = None) -> Path:
    """Write the JSON report and, when given, its text rendering next to it (``.txt``)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.to_json() + "\n", encoding="utf-8")
    if text is not None:
        path.with_suffix(".txt").write_text(text, encoding="utf-8")
    logger.info(f"Wrote report to {path}")
    return path
