"""Command line interface: ``python -m ssg_toolkit <command>``.

Exit codes: 0 on success, 2 for configuration errors and invalid parameter
values, 3 for data and other toolkit errors.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from config.logging_config import setup_logging
from ssg_toolkit.core.multisets import to_multisets
from ssg_toolkit.core.serialization import load_graph, save_graph
from ssg_toolkit.evaluation.config import ExperimentConfig, load_config
from ssg_toolkit.evaluation.experiment import run_experiment, write_report
from ssg_toolkit.evaluation.report import format_report
from ssg_toolkit.geometry.io import load_scene, read_camera
from ssg_toolkit.retrieval.changes import changes_to_dict, detect_changes
from ssg_toolkit.retrieval.index import load_pool, retrieve
from ssg_toolkit.retrieval.similarity import COEFFICIENTS, FULL, NODES_ONLY
from ssg_toolkit.sgpn.checkpoint import load_checkpoint, save_checkpoint
from ssg_toolkit.sgpn.model import Vocabulary, forward, predict_graph
from ssg_toolkit.sgpn.tensor import no_grad
from ssg_toolkit.sgpn.train import train
from ssg_toolkit.synth.dataset import generate_dataset, load_generated
from ssg_toolkit.synth.generator import SceneSpec
from ssg_toolkit.synth.rescan import RESCAN_OPS, RescanSpec
from ssg_toolkit.utils.errors import ConfigError, SceneGraphError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def _emit(payload, out: Optional[Path]) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out is None:
        print(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text + "\n", encoding="utf-8")
        logger.info(f"Wrote {out}")


def cmd_gen_synth(args) -> int:
    if args.count < 1:
        raise ConfigError(f"--count: must be at least 1, got {args.count}")
    scene_spec = SceneSpec(node_range=(args.min_nodes, args.max_nodes), num_classes=args.num_classes)
    rescan_spec = RescanSpec(ops=tuple(args.ops), op_count=args.op_count, num_classes=args.num_classes)
    stats = generate_dataset(args.count, args.seed, args.out, args.rescans, scene_spec, rescan_spec)
    print(f"{stats.scenes} scenes, {stats.rescans} rescans, {len(stats.files)} files in {args.out}")
    return EXIT_OK


def _stored_examples(directory: Path):
    if not directory.is_dir():
        raise ConfigError(f"--data: {directory} does not exist")
    stems = sorted(p.name[:-len(".graph.json")] for p in directory.glob("*.graph.json") if ".rescan" not in p.name)
    return [load_generated(directory, stem) for stem in stems]


def cmd_train(args) -> int:
    config = load_config(args.config) if args.config else ExperimentConfig()
    examples = _stored_examples(args.data)
    vocabulary = Vocabulary.from_graphs((g for _, g in examples), config.dataset.predicates)
    train_config = config.train.build(config.seed)
    model, log = train(examples, train_config, config.model.build(config.seed, args.baseline), vocabulary)
    save_checkpoint(model, args.out, train_config)
    print(f"Trained on {len(examples)} scene(s), final loss {log.final_loss:.5f}; checkpoint {args.out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    model, _ = load_checkpoint(args.ckpt)
    view = read_camera(args.camera) if args.camera else None
    scene = load_scene(args.scene, view=view)
    with no_grad():
        graph = predict_graph(forward(scene, model), args.threshold)
    save_graph(graph, args.out)
    print(f"Predicted {len(graph.nodes)} nodes and {sum(1 for _ in graph.triples())} triples; graph {args.out}")
    return EXIT_OK


def cmd_retrieve(args) -> int:
    index = load_pool(args.pool, args.include_rescans)
    query = load_graph(args.query)
    matches = retrieve(query, index, args.coeff, args.mode, args.topk)
    _emit({
        "query": query.scene_id,
        "coefficient": args.coeff,
        "mode": args.mode,
        "matches": [{"rank": r, "scene_id": m.scene_id, "score": m.score} for r, m in enumerate(matches, start=1)],
    }, args.out)
    return EXIT_OK


def cmd_diff(args) -> int:
    before, after = load_graph(args.a), load_graph(args.b)
    _emit(changes_to_dict(*detect_changes(to_multisets(before), to_multisets(after))), args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    report = run_experiment(load_config(args.config))
    text = format_report(report)
    write_report(report, args.out, text)
    print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssg_toolkit", description=__doc__.splitlines()[0])
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--log-file", type=Path, default=None, help="also log to this file")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen-synth", help="generate a synthetic scene pool")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--out", type=Path, required=True)
    gen.add_argument("--rescans", type=int, default=0, help="perturbed rescans per scene")
    gen.add_argument("--op-count", type=int, default=2, help="perturbations per rescan")
    gen.add_argument("--ops", nargs="+", default=list(RESCAN_OPS), choices=RESCAN_OPS)
    gen.add_argument("--num-classes", type=int, default=12)
    gen.add_argument("--min-nodes", type=int, default=4)
    gen.add_argument("--max-nodes", type=int, default=9)
    gen.set_defaults(handler=cmd_gen_synth)

    tr = commands.add_parser("train", help="train a prediction network on a generated pool")
    tr.add_argument("--data", type=Path, required=True)
    tr.add_argument("--config", type=Path, help="experiment config with model and train sections")
    tr.add_argument("--out", type=Path, required=True)
    tr.add_argument("--baseline", action="store_true", help="skip the GCN")
    tr.set_defaults(handler=cmd_train)

    pr = commands.add_parser("predict", help="predict a scene graph for a PLY scan")
    pr.add_argument("--ckpt", type=Path, required=True)
    pr.add_argument("--scene", type=Path, required=True)
    pr.add_argument("--camera", type=Path)
    pr.add_argument("--threshold", type=float, default=0.5)
    pr.add_argument("--out", type=Path, required=True)
    pr.set_defaults(handler=cmd_predict)

    rt = commands.add_parser("retrieve", help="rank a pool against a query graph")
    rt.add_argument("--query", type=Path, required=True)
    rt.add_argument("--pool", type=Path, required=True)
    rt.add_argument("--coeff", default="simpson", choices=sorted(COEFFICIENTS))
    rt.add_argument("--mode", default=FULL, choices=[FULL, NODES_ONLY])
    rt.add_argument("--topk", type=int, default=5)
    rt.add_argument("--include-rescans", action="store_true")
    rt.add_argument("--out", type=Path)
    rt.set_defaults(handler=cmd_retrieve)

    df = commands.add_parser("diff", help="change residues between two graphs")
    df.add_argument("--a", type=Path, required=True)
    df.add_argument("--b", type=Path, required=True)
    df.add_argument("--out", type=Path)
    df.set_defaults(handler=cmd_diff)

    ev = commands.add_parser("eval", help="run an experiment and write its report")
    ev.add_argument("--config", type=Path, required=True)
    ev.add_argument("--out", type=Path, required=True)
    ev.set_defaults(handler=cmd_eval)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level, args.log_file)
    try:
        return args.handler(args)
    except (ConfigError, ValueError) as e:
        logger.error(f"{args.command}: {e}")
        print(str(e), file=sys.stderr)
        return EXIT_CONFIG
    except SceneGraphError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
