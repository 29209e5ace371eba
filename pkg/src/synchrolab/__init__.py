"""Exact analysis of synchronizing automata."""

from .core import Automaton, Transformation, canonical_form, fixture, is_isomorphic
from .search import (
    avoid_length,
    greedy_compress_worst,
    greedy_extend_worst,
    is_synchronizing,
    rank,
    reset_length,
    reset_word,
    shortest_word_of_rank,
    sync_profile,
)
from .structure import is_aperiodic, is_irreducibly_synchronizing, is_kari_like, is_strongly_connected
from .bounds import bound_report, dstar

__version__ = "0.1.0"

__all__ = [
    "Automaton",
    "Transformation",
    "canonical_form",
    "fixture",
    "is_isomorphic",
    "avoid_length",
    "greedy_compress_worst",
    "greedy_extend_worst",
    "is_synchronizing",
    "rank",
    "reset_length",
    "reset_word",
    "shortest_word_of_rank",
    "sync_profile",
    "is_aperiodic",
    "is_irreducibly_synchronizing",
    "is_kari_like",
    "is_strongly_connected",
    "bound_report",
    "dstar",
]
