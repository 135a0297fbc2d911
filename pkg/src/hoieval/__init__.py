"""Evaluation toolkit for object pose, human and joint human-object reconstruction.

Metric modules are importable on their own; `hoieval.cli` wraps them for the
command line.
"""
__version__ = "0.1.0"
