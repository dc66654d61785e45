"""Numerical laboratory for circle packings, PL capacities, and recurrence."""

__version__ = "0.1.0"

from .errors import PacklabError  # noqa: F401
