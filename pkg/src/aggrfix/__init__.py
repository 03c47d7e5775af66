"""Semantics of logic programs with recursive aggregates over finite domains."""
from .aggregates import Caps, lookup, register_aggregate
from .errors import AggrfixError, CapacityError, ParseError
from .language import parse_program, program_to_text, stratify
from .semantics import SemanticsRequest, SemanticsResult, run_semantics, solve
from .structures import GroundAtom, Structure, instantiate
from .truth import ThreeValuedSet, TruthValue3

__all__ = ["Caps", "lookup", "register_aggregate", "AggrfixError", "CapacityError",
           "ParseError", "parse_program", "program_to_text", "stratify", "SemanticsRequest",
           "SemanticsResult", "run_semantics", "solve", "GroundAtom", "Structure",
           "instantiate", "ThreeValuedSet", "TruthValue3"]
