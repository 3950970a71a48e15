"""Exact engine for doubles of modules, integral closure tests and
Lipschitz equisingularity conditions of analytic families."""

__version__ = "0.1.0"
