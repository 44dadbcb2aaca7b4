"""Geometric extraction: point sets, relations and 2D rendering."""
from ssg_toolkit.geometry.extract import center_normalize, instance_points, pair_points
from ssg_toolkit.geometry.relations import (
    DEFAULT_THRESHOLDS,
    ExtractionThresholds,
    comparative_relations,
    extract_graph,
    proximity_relations,
    support_candidates,
)
from ssg_toolkit.geometry.render import render_graph_2d
from ssg_toolkit.geometry.scene import BBox3, CameraPose, Scene, look_at, rotate_about_vertical
