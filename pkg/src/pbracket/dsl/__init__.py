"""Bracket-expression language: parser, printer, model files and evaluator."""
from .evaluator import evaluate
from .model import Model, load_model, load_model_dict
from .nodes import to_text
from .parser import parse, tokenize

__all__ = ["evaluate", "Model", "load_model", "load_model_dict", "parse", "to_text", "tokenize"]
