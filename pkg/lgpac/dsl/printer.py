"""
DSL printer

Writes a DslDocument in canonical form: one statement per line, single
spaces, formulas with minimal parentheses and numbers in their shortest
round-tripping spelling.
"""

from typing import List

from lgpac.models.formula import format_number, to_text
from lgpac.models.network import ModuleKind, Space

from .document import (
    DEFAULT_SAMPLES,
    BindDecl,
    DslDocument,
    ExpectDecl,
    ExportDecl,
    GridDecl,
    InputDecl,
    ModuleDecl,
    ModulusDecl,
    OutputDecl,
    PrecisionDecl,
    SimulateDecl,
    Statement,
    WireDecl,
    grid_text,
)


def _module(stmt: ModuleDecl) -> str:
    space = " in x" if stmt.space == Space.X else ""
    head = f"{stmt.kind.value if stmt.kind != ModuleKind.CONSTANT else 'const'} {stmt.name}{space}"
    if stmt.kind == ModuleKind.CONSTANT:
        return f"{head} = {to_text(stmt.value)}"
    if stmt.kind == ModuleKind.LIMIT:
        head = f"{head} using {stmt.modulus}"
    if stmt.ports:
        head = f"{head} {{ {'; '.join(f'{port} = {source}' for port, source in stmt.ports)} }}"
    return head


def format_statement(stmt: Statement) -> str:
    """One canonical line"""
    if isinstance(stmt, GridDecl):
        return f"grid {grid_text(stmt.grid)}"
    if isinstance(stmt, ModulusDecl):
        return f"modulus {stmt.name} = {stmt.rule}"
    if isinstance(stmt, InputDecl):
        return f"input {stmt.label} : {stmt.kind.value}{'' if stmt.derivative else ' underived'}"
    if isinstance(stmt, ModuleDecl):
        return _module(stmt)
    if isinstance(stmt, WireDecl):
        return f"wire {stmt.source} -> {stmt.module}.{stmt.port}"
    if isinstance(stmt, OutputDecl):
        return f"output {stmt.label}" if stmt.source == stmt.label else f"output {stmt.label} = {stmt.source}"
    if isinstance(stmt, BindDecl):
        text = f"bind {stmt.label} = {to_text(stmt.value)}"
        return text if stmt.derivative is None else f"{text}; {to_text(stmt.derivative)}"
    if isinstance(stmt, SimulateDecl):
        text = f"simulate {format_number(stmt.t_end)}"
        return text if stmt.samples == DEFAULT_SAMPLES else f"{text} samples {stmt.samples}"
    if isinstance(stmt, PrecisionDecl):
        return f"precision {format_number(stmt.tau)}"
    if isinstance(stmt, ExpectDecl):
        return f"expect {stmt.channel} = {to_text(stmt.formula)}"
    if isinstance(stmt, ExportDecl):
        return f"export {stmt.path}"
    raise TypeError(f"not a statement: {stmt!r}")


def print_document(doc: DslDocument) -> str:
    """Canonical text; parse(print_document(doc)) == doc"""
    lines: List[str] = [f"network {doc.name}"] if doc.name else []
    lines.extend(format_statement(stmt) for stmt in doc.statements)
    return "".join(f"{line}\n" for line in lines)
