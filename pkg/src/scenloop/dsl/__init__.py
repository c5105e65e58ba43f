"""Scenario DSL: lexer, parser, validator and the prompt text pipeline."""

from .nodes import ScenarioProgram
from .parser import parse, split_docstring, try_parse
from .textproc import extract_description, postprocess_generated, preprocess_training
from .unparse import unparse
from .validator import validate

__all__ = [
    "ScenarioProgram", "parse", "try_parse", "split_docstring", "unparse",
    "validate", "preprocess_training", "postprocess_generated",
    "extract_description",
]
