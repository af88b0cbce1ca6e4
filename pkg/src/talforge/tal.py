"""One entry point over the four tree-adjoining formalisms.

Each formalism lives in its own module (:mod:`talforge.tag`,
:mod:`talforge.lig`, :mod:`talforge.epda`, :mod:`talforge.paa`); this module
dispatches on the system type so callers do not have to.
"""

from __future__ import annotations

from typing import Optional, Union

from .budget import StepBudget, default_budget
from .cf import enumerate_system
from .engine import Enumeration
from .epda import Epda, epda_normal_form
from .lig import Lig, lig_normal_form
from .paa import Paa, paa_is_normal_form, paa_is_spinal, paa_normal_form
from .paa import require_spinal as require_paa_spinal
from .symbols import TalforgeError
from .tag import Tag, tag_is_normal_form, tag_is_spinal, tag_normal_form
from .tag import require_spinal as require_tag_spinal

TalSystem = Union[Tag, Lig, Epda, Paa]
TAL_TYPES = (Tag, Lig, Epda, Paa)


def _require_tal(sys) -> None:
    if not isinstance(sys, TAL_TYPES):
        raise TalforgeError(f"expected a TAG, LIG, EPDA or PAA, got {type(sys).__name__}")


def is_spinal(sys: TalSystem) -> tuple[bool, list[int]]:
    """Spinal check for TAG and PAA (with offending rule indices); LIG and EPDA always pass."""
    _require_tal(sys)
    if isinstance(sys, Tag):
        return tag_is_spinal(sys)
    if isinstance(sys, Paa):
        return paa_is_spinal(sys)
    return True, []


def tal_is_normal_form(sys: TalSystem) -> bool:
    _require_tal(sys)
    if isinstance(sys, Tag):
        return tag_is_normal_form(sys)
    if isinstance(sys, Paa):
        return paa_is_normal_form(sys)
    return sys.is_normal_form()


def tal_normal_form(sys: TalSystem) -> TalSystem:
    """Bring ``sys`` into its formalism's normal form.

    Non-spinal TAG and PAA inputs raise :class:`NotSpinalError`.
    """
    _require_tal(sys)
    if isinstance(sys, Tag):
        require_tag_spinal(sys)
        return tag_normal_form(sys)
    if isinstance(sys, Paa):
        require_paa_spinal(sys)
        return paa_normal_form(sys)
    if isinstance(sys, Lig):
        return lig_normal_form(sys)
    return epda_normal_form(sys)


def tal_enumerate(sys: TalSystem, max_len: int, budget: Optional[StepBudget] = None) -> Enumeration:
    """Complete derivations of ``sys`` with at most ``max_len`` terminals, grouped by yield."""
    _require_tal(sys)
    return enumerate_system(sys, max_len, budget or default_budget())
