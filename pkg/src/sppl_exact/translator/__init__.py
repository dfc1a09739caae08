"""Source language: parsing, restriction checks, forward and reverse translation."""

from .parser import (ParseError, RestrictionError, Violation, check_restrictions,
                     desugar_switch, parse, parse_expr)
from .translate import (TranslationError, TranslationWarning, optimize, to_event,
                        translate, State)
from .reverse import spe_to_sppl

__all__ = [
    "ParseError", "RestrictionError", "Violation", "check_restrictions", "desugar_switch",
    "parse", "parse_expr", "TranslationError", "TranslationWarning", "optimize", "to_event",
    "translate", "State", "spe_to_sppl",
]
