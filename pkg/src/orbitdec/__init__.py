"""Decision procedures for conjugacy in free-by-free and free-abelian-by-free extensions."""

from .decision import Answer, Decision, OverflowBudget
from .words import FreeAutomorphism, FreeWord, parse_word, format_word

__all__ = ["Answer", "Decision", "OverflowBudget", "FreeAutomorphism", "FreeWord", "parse_word", "format_word"]
