"""
Package: dsl
The .lgpac network description language: document model, parser, printer
and conversions to and from networks
"""

from .convert import construction_document, from_network, to_bindings, to_network
from .document import Diagnostic, DslDocument, DslError, Span, grid_text, parse_modulus
from .parser import ParseResult, parse, parse_document
from .printer import format_statement, print_document
