"""Streamlit explorer for generated scan pools."""
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Tuple

import numpy as np
import streamlit as st

from ssg_toolkit.core.graph import SceneGraph
from ssg_toolkit.core.multisets import to_multisets
from ssg_toolkit.geometry.render import render_graph_2d, render_instance_image
from ssg_toolkit.geometry.scene import Scene
from ssg_toolkit.retrieval.changes import changes_to_dict, detect_changes
from ssg_toolkit.retrieval.index import Match, ScanIndex, load_pool, retrieve
from ssg_toolkit.retrieval.similarity import COEFFICIENTS, FULL, NODES_ONLY
from ssg_toolkit.synth.dataset import GenerationStats, generate_dataset, load_generated
from ssg_toolkit.synth.generator import sample_view
from ssg_toolkit.utils.decorators import log_exceptions


@dataclass
class UIConstants:
    """UI constants for the application."""
    TITLE = "Scene Graph Retrieval Explorer"
    DESCRIPTION = "Pick a generated pool, query it with a 3D scan or a 2D view and inspect what changed"
    PROGRESS_TITLE = "#### Generation Progress"
    STATS_ICONS = {
        'scenes': '🏠',
        'rescans': '🔁',
        'triples': '🔗'
    }
    PREVIEW_COLUMNS = 2
    STATS_COLUMNS = 3
    DEFAULT_POOL = "data/pool"
    MAX_TOPK = 10


@log_exceptions(default=None)
def _load_pool(directory: str, include_rescans: bool) -> Optional[ScanIndex]:
    return load_pool(directory, include_rescans)


@log_exceptions(default=None)
def _load_example(directory: str, stem: str) -> Optional[Tuple[Scene, SceneGraph]]:
    return load_generated(directory, stem)


def _query_stems(directory: Path) -> List[str]:
    return sorted(p.name[:-len(".graph.json")] for p in directory.glob("*.graph.json"))


class SceneGraphExplorerUI:
    """Handles the Streamlit UI for browsing and querying a scan pool."""

    def __init__(self):
        """Initialize the UI components."""
        st.title(UIConstants.TITLE)
        st.write(UIConstants.DESCRIPTION)

    def create_progress_components(self):
        """Create and return progress tracking components."""
        st.markdown(UIConstants.PROGRESS_TITLE)
        progress_bar = st.progress(0)
        progress_text = st.empty()
        columns = st.columns(UIConstants.STATS_COLUMNS)
        return progress_bar, progress_text, [c.empty() for c in columns]

    def create_progress_callback(self, progress_components) -> Callable:
        """Create a callback function for progress updates."""
        progress_bar, progress_text, (scenes_stat, rescans_stat, triples_stat) = progress_components

        def update_progress(progress: float, stats: GenerationStats):
            progress_bar.progress(progress)
            progress_text.markdown(f"**Progress:** {progress * 100:.1f}%")
            scenes_stat.markdown(f"{UIConstants.STATS_ICONS['scenes']} **Scenes** {stats.scenes}")
            rescans_stat.markdown(f"{UIConstants.STATS_ICONS['rescans']} **Rescans** {stats.rescans}")
            triples_stat.markdown(f"{UIConstants.STATS_ICONS['triples']} **Triples** {stats.triples}")

        return update_progress

    def handle_generation(self, directory: str):
        """Sidebar form that fills an empty pool with synthetic scenes."""
        with st.sidebar.expander("Generate a pool"):
            count = st.number_input("Scenes", min_value=1, max_value=500, value=20)
            rescans = st.number_input("Rescans per scene", min_value=0, max_value=5, value=1)
            seed = st.number_input("Seed", min_value=0, value=0)
            if st.button("Generate"):
                callback = self.create_progress_callback(self.create_progress_components())
                with st.spinner("Generating scenes..."):
                    try:
                        stats = generate_dataset(int(count), int(seed), directory, int(rescans),
                                                 progress_callback=callback)
                        st.success(f"Wrote {len(stats.files)} files to {directory}")
                    except Exception as e:
                        st.error(f"Generation failed: {e}")

    def get_query_settings(self) -> Tuple[str, str, str, int]:
        """Query dimension, coefficient, similarity mode and top-k."""
        col1, col2 = st.columns(UIConstants.PREVIEW_COLUMNS)
        with col1:
            setting = st.radio("Query", ["3D scan", "2D view"], horizontal=True)
            coefficient = st.selectbox("Coefficient", sorted(COEFFICIENTS), index=sorted(COEFFICIENTS).index("simpson"))
        with col2:
            mode = st.radio("Similarity", [FULL, NODES_ONLY], horizontal=True)
            topk = st.slider("Top-k", min_value=1, max_value=UIConstants.MAX_TOPK, value=5)
        return setting, coefficient, mode, topk

    def display_query(self, scene: Scene, graph: SceneGraph, setting: str, view_seed: int) -> SceneGraph:
        """Preview the query and return the graph that is matched against the pool."""
        view = scene.reference_view
        if setting == "2D view":
            view = sample_view(scene, np.random.default_rng(view_seed))
            graph = render_graph_2d(graph, scene, view)
        col1, col2 = st.columns(UIConstants.PREVIEW_COLUMNS)
        with col1:
            st.write("Projected instances")
            if view is not None:
                st.image(render_instance_image(scene, view), use_container_width=True)
        with col2:
            st.write(f"{len(graph.nodes)} nodes, {len(graph.edges)} edges")
            st.dataframe(
                [{"subject": graph.node(s).label, "predicate": p, "object": graph.node(o).label}
                 for s, p, o in graph.triples()],
                use_container_width=True,
            )
        return graph

    def display_matches(self, matches: List[Match], index: ScanIndex, query: SceneGraph):
        """Ranked matches and the change residues against the selected one."""
        st.write("### Matches")
        st.dataframe([{"rank": r, "scene": m.scene_id, "score": round(m.score, 4)}
                      for r, m in enumerate(matches, start=1)], use_container_width=True)
        choice = st.selectbox("Compare with", [m.scene_id for m in matches])
        removed, added = detect_changes(index.entries[choice], to_multisets(query))
        changes = changes_to_dict(removed, added)
        col1, col2 = st.columns(UIConstants.PREVIEW_COLUMNS)
        with col1:
            st.write("Only in the reference")
            st.json(changes["removed"])
        with col2:
            st.write("Only in the query")
            st.json(changes["added"])

    def handle_pool(self):
        """Pool selection, query and results."""
        directory = st.sidebar.text_input("Pool directory", UIConstants.DEFAULT_POOL)
        self.handle_generation(directory)
        if not Path(directory).is_dir():
            st.info("The pool directory does not exist yet; generate one from the sidebar.")
            return

        index = _load_pool(directory, st.sidebar.checkbox("Include rescans in the pool", value=False))
        if not index:
            st.warning("No scene graphs found in this directory.")
            return
        st.write(f"Pool of {len(index)} scene(s)")

        stem = st.selectbox("Query scan", _query_stems(Path(directory)))
        example = _load_example(directory, stem)
        if example is None:
            st.error(f"Could not load {stem}; see the log for details.")
            return
        setting, coefficient, mode, topk = self.get_query_settings()
        view_seed = st.sidebar.number_input("View seed", min_value=0, value=0)
        query = self.display_query(*example, setting, int(view_seed))
        if not query.nodes:
            st.warning("No instance is visible from this view; try another view seed.")
            return
        self.display_matches(retrieve(query, index, coefficient, mode, topk), index, query)

    def run(self):
        """Run the Streamlit application."""
        self.handle_pool()


def main():
    app = SceneGraphExplorerUI()
    app.run()


if __name__ == "__main__":
    main()
