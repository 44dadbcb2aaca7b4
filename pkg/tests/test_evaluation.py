import json
from pathlib import Path

import pytest

from ssg_toolkit.evaluation.config import ExperimentConfig, load_config, parse_config
from ssg_toolkit.evaluation.experiment import ChangeSummary, run_experiment, write_report
from ssg_toolkit.evaluation.report import format_report
from ssg_toolkit.geometry.relations import DEFAULT_THRESHOLDS
from ssg_toolkit.sgpn.checkpoint import save_checkpoint
from ssg_toolkit.sgpn.train import TrainConfig, train
from ssg_toolkit.synth.dataset import generate_dataset
from ssg_toolkit.synth.generator import SceneSpec
from ssg_toolkit.synth.rescan import RescanSpec
from ssg_toolkit.utils.errors import ConfigError

EXPERIMENTS = Path(__file__).resolve().parent.parent / "experiments"

TINY_MODEL = {"point_widths": [8], "feature_width": 8, "gcn_layers": 1, "head_widths": [8], "num_points": 16}


def gt_config(**overrides) -> ExperimentConfig:
    payload = {
        "name": "gt",
        "seed": 3,
        "graphs": "gt",
        "metrics": ["retrieval", "changes"],
        "dataset": {"train_scenes": 1, "test_scenes": 4, "node_range": [4, 6]},
        "retrieval": {"topk": [1, 4]},
    }
    payload.update(overrides)
    return parse_config(payload)


class TestConfig:
    def test_defaults(self):
        config = ExperimentConfig()
        assert config.thresholds.build() == DEFAULT_THRESHOLDS
        assert config.model.build(7).seed == 7
        assert config.model.build(0, baseline=True).baseline
        assert config.train.build(1) == TrainConfig(epochs=30, seed=1)

    def test_shipped_experiments_parse(self):
        paths = sorted(EXPERIMENTS.glob("*.json"))
        assert paths
        for path in paths:
            assert load_config(path).name == path.stem.replace("_", "-")

    def test_field_level_messages(self):
        with pytest.raises(ConfigError) as err:
            parse_config({"dataset": {"train_scenes": 0}, "retrieval": {"coefficients": ["cosine"]}})
        locations = [p.split(":")[0] for p in err.value.problems]
        assert "dataset.train_scenes" in locations
        assert "retrieval.coefficients" in locations

    @pytest.mark.parametrize("payload", [
        {"bogus": 1},
        {"graphs": "gt"},
        {"dataset": {"node_range": [1, 3]}},
        {"dataset": {"room_extent": [1.0, 3.0]}},
        {"dataset": {"predicates": ["on top of"]}},
        {"retrieval": {"topk": [0]}},
        {"train": {"predicate_alpha": 1.5}},
        {"model": {"predicate_mode": "many"}},
    ])
    def test_rejects_invalid(self, payload):
        with pytest.raises(ConfigError):
            parse_config(payload)

    def test_missing_paths(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config({"dataset": {"dir": str(tmp_path / "missing")}})
        with pytest.raises(ConfigError):
            parse_config({"checkpoint": str(tmp_path / "missing.json")})
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.json")

    def test_json_text(self):
        assert parse_config('{"name": "x", "seed": 4}').seed == 4
        with pytest.raises(ConfigError):
            parse_config("{broken")


class TestGroundTruthExperiment:
    def test_retrieval_and_changes(self):
        progress = []
        report = run_experiment(gt_config(), progress_callback=lambda p, r: progress.append(p))
        assert progress == [0.5, 1.0]
        assert report.counts["train_scenes"] == 1
        assert report.counts["test_scenes"] == 4
        assert len(report.retrieval) == 2 * 2 * 2
        assert {r.source for r in report.retrieval} == {"GT"}
        for row in report.retrieval:
            assert row.topk["top4"] == 1.0
            assert 0.0 <= row.topk["top1"] <= 1.0
        assert report.changes == ChangeSummary(4, 4)
        assert report.prediction == []
        assert report.provenance["seed"] == 3

    def test_reruns_are_identical(self):
        first = run_experiment(gt_config(metrics=["changes"]))
        second = run_experiment(gt_config(metrics=["changes"]))
        assert first.to_json() == second.to_json()

    def test_stored_dataset(self, tmp_path):
        generate_dataset(3, 5, tmp_path, rescans=1,
                         scene_spec=SceneSpec(node_range=(4, 5)), rescan_spec=RescanSpec(op_count=2))
        dataset = {"dir": str(tmp_path), "train_scenes": 1, "test_scenes": 2}
        report = run_experiment(gt_config(dataset=dataset, metrics=["changes"]))
        assert report.changes == ChangeSummary(2, 2)
        with pytest.raises(ConfigError):
            run_experiment(gt_config(dataset={**dataset, "train_scenes": 3}))

    def test_report_files(self, tmp_path):
        report = run_experiment(gt_config())
        text = format_report(report)
        assert "Retrieval 3D-3D" in text
        assert "Retrieval 2D-3D" in text
        assert "Change detection: 4/4" in text
        path = write_report(report, tmp_path / "out" / "report.json", text)
        assert json.loads(path.read_text(encoding="utf-8")) == json.loads(report.to_json())
        assert path.with_suffix(".txt").read_text(encoding="utf-8") == text


class TestPredictionExperiment:
    def test_trains_both_variants(self):
        config = parse_config({
            "name": "tiny",
            "metrics": ["prediction"],
            "dataset": {"train_scenes": 2, "test_scenes": 1, "node_range": [4, 5]},
            "model": TINY_MODEL,
            "train": {"epochs": 1, "learning_rate": 0.001},
        })
        report = run_experiment(config)
        assert [row.model for row in report.prediction] == ["full", "baseline"]
        row = report.prediction[0]
        assert set(row.relationship) == {"R@50", "R@100"}
        assert set(row.object) == {"R@5", "R@10"}
        assert set(row.predicate) == {"R@3", "R@5"}
        assert 0.0 <= row.object["R@5"] <= row.object["R@10"] <= 1.0
        assert "Scene graph prediction" in format_report(report)

    def test_checkpoint_replaces_training(self, generated, tiny_config, tmp_path):
        model, _ = train(generated[:2], TrainConfig(epochs=1), tiny_config)
        path = save_checkpoint(model, tmp_path / "model.json")
        config = parse_config({
            "checkpoint": str(path),
            "metrics": ["prediction", "retrieval"],
            "dataset": {"train_scenes": 1, "test_scenes": 2, "node_range": [4, 5]},
            "retrieval": {"topk": [1, 2]},
        })
        report = run_experiment(config)
        assert [row.model for row in report.prediction] == ["full"]
        assert {r.source for r in report.retrieval} == {"GT", "predicted"}
        assert all(r.topk["top2"] == 1.0 for r in report.retrieval)
