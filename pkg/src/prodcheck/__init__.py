"""Productivity analysis for orthogonal stream specifications."""

from .ioalg import (
    TOP,
    IOTerm,
    compose,
    equal_denotation,
    infimum,
    interpret,
    least_fixed_point,
    normalize,
    parse_ioterm,
    remove_requirement,
    render,
)
from .prodterm import Box, Gate, Meet, Mu, Peb, Src, Var, collapse, collapse_trace, gate_apply
from .streamspec import parse, validate, classify
from .translate import Caps, decide, translate_constant, translate_symbols

__all__ = [
    "TOP",
    "IOTerm",
    "compose",
    "equal_denotation",
    "infimum",
    "interpret",
    "least_fixed_point",
    "normalize",
    "parse_ioterm",
    "remove_requirement",
    "render",
    "Box",
    "Gate",
    "Meet",
    "Mu",
    "Peb",
    "Src",
    "Var",
    "collapse",
    "collapse_trace",
    "gate_apply",
    "parse",
    "validate",
    "classify",
    "Caps",
    "decide",
    "translate_constant",
    "translate_symbols",
]
