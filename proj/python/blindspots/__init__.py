"""Blind spots of chord functions for superpositions of coherent states."""

from ._blindspots import *  # noqa: F401,F403
from ._blindspots import BlindSpotsError, Superposition, Term

__version__ = "0.1.0"


def superposition(hbar, centers, amplitudes=None, normalized=True):
    """Superposition of vacuum-frame coherent states at ``centers``."""
    if amplitudes is None:
        amplitudes = [1.0] * len(centers)
    state = Superposition(hbar, [Term(a, c) for a, c in zip(amplitudes, centers)])
    return normalize(state) if normalized else state  # noqa: F405
