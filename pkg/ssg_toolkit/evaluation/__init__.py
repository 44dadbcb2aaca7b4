"""Recall metrics, experiment configuration and reports."""
