"""Toolkit for 3D semantic scene graphs: extraction, prediction and retrieval."""

__version__ = "0.1.0"
