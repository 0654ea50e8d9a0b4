"""Decompositions of the NValue family of global constraints."""

from .decompositions import (
    AtMostVariant,
    DecompositionHandle,
    build_atleast_pyramid,
    build_atmost_pyramid,
    build_nvalue,
    build_simple_occurrence,
)
from .domains import Event, Failure, Store
from .engine import Model, Outcome, Propagator
from .search import Backend, SearchConfig, SearchResult, SearchStats, Status, VarOrder, solve

__version__ = "0.1.0"
