"""Dispatch points shared by every formalism.

Each system type registers how to present itself as a tree space, what its
terminal alphabet is, and what kind name it has in the text format.
"""

from __future__ import annotations

from functools import singledispatch

from .symbols import TalforgeError


@singledispatch
def tree_space(system):
    """Return the :class:`~talforge.engine.TreeSpace` of ``system``."""
    raise TalforgeError(f"no derivation semantics for {type(system).__name__}")


@singledispatch
def terminal_alphabet(system) -> frozenset:
    raise TalforgeError(f"no terminal alphabet for {type(system).__name__}")


@singledispatch
def kind_of(system) -> str:
    raise TalforgeError(f"unknown system type {type(system).__name__}")


@singledispatch
def tree_style(system) -> str:
    """``"leaves"`` when yields are read off terminal leaves, ``"edges"`` when
    they are read off edge annotations along a chain, ``"plug"`` when they are
    assembled with holes."""
    return "leaves"
