"""Tokenizer, syntax tree and parser for the Java subset the rules need."""

from .lexer import Token, tokenize, untokenize
from .nodes import ParseError, SyntaxModel, TypeDecl, Member
from .parser import parse, parse_source

__all__ = [
    "Member",
    "ParseError",
    "SyntaxModel",
    "Token",
    "TypeDecl",
    "parse",
    "parse_source",
    "tokenize",
    "untokenize",
]
