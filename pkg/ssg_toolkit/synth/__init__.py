"""Synthetic scenes, rescans and dataset files."""
from ssg_toolkit.synth.dataset import GenerationStats, generate_dataset, load_generated, save_scene
from ssg_toolkit.synth.generator import SceneSpec, generate_scene, level_view, reference_view, sample_view
from ssg_toolkit.synth.rescan import ChangeRecord, RescanResult, RescanSpec, diff_graphs, generate_rescan, log_to_deltas, perturb
