"""
Conversions between DSL documents, networks and catalog constructions
"""

import logging
from typing import Dict, Iterable, Optional, Tuple

from lgpac.models.base import DataValidationError
from lgpac.models.compiler import StreamBinding
from lgpac.models.formula import Formula, format_number, parse_formula
from lgpac.models.frechet import GridFunction, SpatialGrid
from lgpac.models.network import ModuleKind, Network, NetworkBuilder

from .document import (
    BindDecl,
    DslDocument,
    ExpectDecl,
    GridDecl,
    InputDecl,
    ModuleDecl,
    ModulusDecl,
    OutputDecl,
    PrecisionDecl,
    SimulateDecl,
    Statement,
    WireDecl,
)

logger = logging.getLogger("flask.app")


######################################################################
#  D O C U M E N T   ->   N E T W O R K
######################################################################
def to_network(doc: DslDocument) -> Network:
    """The network a document declares"""
    nb = NetworkBuilder(doc.name or "network")
    moduli = doc.moduli
    for stmt in doc.statements:
        if isinstance(stmt, InputDecl):
            nb.input(stmt.label, stmt.kind, stmt.derivative)
        elif isinstance(stmt, ModuleDecl):
            ports = dict(stmt.ports)
            if stmt.kind == ModuleKind.CONSTANT:
                nb.constant(stmt.name, stmt.value, stmt.space)
            elif stmt.kind == ModuleKind.TIME:
                nb.time(stmt.name, stmt.space)
            elif stmt.kind == ModuleKind.LIMIT:
                nb.limit(stmt.name, moduli[stmt.modulus], stmt.space, stmt.modulus, **ports)
            else:
                getattr(nb, stmt.kind.value)(stmt.name, stmt.space, **ports)
        elif isinstance(stmt, WireDecl):
            nb.wire(stmt.source, stmt.module, stmt.port)
        elif isinstance(stmt, OutputDecl):
            nb.output(stmt.label, stmt.source)
    return nb.build()


def to_bindings(doc: DslDocument, net: Network) -> Dict[str, object]:
    """Input bindings for proper_input_binding; stream inputs become StreamBindings"""
    kinds = {spec.label: spec.kind for spec in net.proper_inputs()}
    bindings: Dict[str, object] = {}
    for stmt in doc.bindings:
        kind = kinds.get(stmt.label)
        if stmt.derivative is not None or (kind is not None and kind.is_stream):
            bindings[stmt.label] = StreamBinding(stmt.value, stmt.derivative)
        else:
            bindings[stmt.label] = stmt.value
    return bindings


######################################################################
#  N E T W O R K   ->   D O C U M E N T
######################################################################
def _formula(value) -> Formula:
    if isinstance(value, (int, float)):
        return parse_formula(format_number(value))
    if isinstance(value, str):
        return parse_formula(value)
    if isinstance(value, GridFunction):
        raise DataValidationError("grid function constants have no DSL spelling")
    return value


def _binding(label: str, value) -> BindDecl:
    if isinstance(value, StreamBinding):
        derivative = None if value.derivative is None else _formula(value.derivative)
        return BindDecl(label, _formula(value.value), derivative)
    return BindDecl(label, _formula(value))


def from_network(net: Network, grid: Optional[SpatialGrid] = None, bindings: Optional[Dict[str, object]] = None,
                 directives: Iterable[Statement] = ()) -> DslDocument:
    """The canonical document of a network; port wires become port blocks"""
    statements = [GridDecl(grid)] if grid is not None else []
    seen = set()
    for spec in net.modules:
        if spec.kind == ModuleKind.LIMIT and spec.modulus_name not in seen:
            seen.add(spec.modulus_name)
            statements.append(ModulusDecl(spec.modulus_name, spec.modulus.describe(), spec.modulus))
    statements.extend(InputDecl(spec.label, spec.kind, spec.derivative) for spec in net.inputs)
    for spec in net.modules:
        incoming = net.incoming(spec.name)
        ports: Tuple[Tuple[str, str], ...] = tuple((p, incoming[p]) for p in spec.ports if p in incoming)
        value = _formula(spec.value) if spec.kind == ModuleKind.CONSTANT else None
        modulus = spec.modulus_name if spec.kind == ModuleKind.LIMIT else ""
        statements.append(ModuleDecl(spec.name, spec.kind, spec.space, value, modulus, ports))
    statements.extend(OutputDecl(spec.label, spec.source) for spec in net.outputs)
    statements.extend(_binding(label, value) for label, value in (bindings or {}).items())
    statements.extend(directives)
    return DslDocument(net.name, tuple(statements))


def construction_document(item) -> DslDocument:
    """The shipped document of a catalog construction"""
    directives = []
    if item.tau is not None:
        directives.append(PrecisionDecl(float(item.tau)))
    else:
        directives.append(SimulateDecl(float(item.t_end)))
    if item.expected:
        directives.append(ExpectDecl(item.channel, parse_formula(item.expected)))
    return from_network(item.network, item.grid, item.bindings, directives)
