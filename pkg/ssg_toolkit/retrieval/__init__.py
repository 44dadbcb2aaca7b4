"""Multiset graph similarity, scan retrieval and change detection."""
from ssg_toolkit.retrieval.changes import detect_changes
from ssg_toolkit.retrieval.index import Match, ScanIndex, build_index, load_pool, retrieve
from ssg_toolkit.retrieval.similarity import COEFFICIENTS, graph_similarity, jaccard, simpson
