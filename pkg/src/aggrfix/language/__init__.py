from .analysis import (free_variables, is_definite, is_negative_formula, is_normal_body,
                       is_positive_formula, polarity, stratify, Stratification)
from .ast import *  # noqa: F401,F403
from .parser import parse_program, tokenize
from .printer import format_value, formula_to_text, program_to_text, term_to_text
