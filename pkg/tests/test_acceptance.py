"""Long-running checks on larger synthetic pools; run with ``pytest -m slow``."""
from pathlib import Path

import numpy as np
import pytest

from ssg_toolkit.evaluation.config import load_config
from ssg_toolkit.evaluation.experiment import ChangeSummary, run_experiment
from ssg_toolkit.geometry.relations import DEFAULT_THRESHOLDS, support_candidates
from ssg_toolkit.geometry.render import render_graph_2d
from ssg_toolkit.geometry.scene import rotate_about_vertical
from ssg_toolkit.synth.generator import SceneSpec, generate_scene, level_view

from test_geometry import SWAPPED, brute_force_support

EXPERIMENTS = Path(__file__).resolve().parent.parent / "experiments"

pytestmark = pytest.mark.slow


def _row(report, source, setting, coefficient, mode):
    return next(r for r in report.retrieval
                if (r.source, r.setting, r.coefficient, r.mode) == (source, setting, coefficient, mode))


def test_support_and_directions_on_many_scenes():
    for seed in range(100):
        scene, graph = generate_scene(SceneSpec(seed=1000 + seed, node_range=(4, 12)))
        assert len(scene.instance_ids) <= 20
        expected = brute_force_support(scene, DEFAULT_THRESHOLDS.support_radius, DEFAULT_THRESHOLDS.lowest_fraction)
        assert set(support_candidates(scene)) == expected
        triples = set(graph.triples())
        for s, p, o in triples:
            if p in SWAPPED:
                assert (o, SWAPPED[p], s) in triples


def test_opposite_views_swap_directions():
    for seed in range(50):
        scene, graph = generate_scene(SceneSpec(seed=2000 + seed))
        view = level_view((3.5, 3.5))
        opposite = rotate_about_vertical(view, (1.75, 1.75, 1.2), np.pi)
        seen = set(render_graph_2d(graph, scene, view, min_pixels=0).triples())
        mirrored = set(render_graph_2d(graph, scene, opposite, min_pixels=0).triples())
        assert {(s, SWAPPED.get(p, p), o) for s, p, o in seen} == mirrored


def test_retrieval_benchmark_and_change_log():
    report = run_experiment(load_config(EXPERIMENTS / "gt_retrieval.json"))
    assert _row(report, "GT", "3D-3D", "jaccard", "full").topk["top1"] >= 0.95
    full_simpson = _row(report, "GT", "2D-3D", "simpson", "full").topk["top1"]
    nodes_jaccard = _row(report, "GT", "2D-3D", "jaccard", "nodes-only").topk["top1"]
    assert full_simpson > nodes_jaccard
    assert report.changes == ChangeSummary(50, 50)


def test_learning_on_synthetic_scenes():
    report = run_experiment(load_config(EXPERIMENTS / "small.json"))
    rows = {row.model: row for row in report.prediction}
    assert rows["full"].predicate["R@3"] >= 0.9
    assert rows["full"].object["R@5"] >= 0.9
    assert rows["full"].relationship["R@50"] > rows["baseline"].relationship["R@50"]
