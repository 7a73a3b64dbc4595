"""
Models for L-GPAC networks

A Network is a set of named modules (constants, adders, multipliers,
integrators, continuous limits and time sources) connected by wires that
run from an output (a module or a proper input label) to a module port.
Ports left unconnected are implicit proper inputs labelled "module.port".
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

import networkx as nx

from .base import DataValidationError
from .formula import Formula, parse_formula, variables, to_text, format_number
from .frechet import GridFunction
from .modulus import Modulus

logger = logging.getLogger("flask.app")


######################################################################
#  K I N D S
######################################################################
class Space(str, Enum):
    """Where a module's values live: the reals or the function space"""

    R = "r"
    X = "x"


class ChannelKind(str, Enum):
    """The four continuous channel types"""

    R_SCALAR = "RScalar"
    X_SCALAR = "XScalar"
    R_STREAM = "RStream"
    X_STREAM = "XStream"

    @property
    def is_stream(self) -> bool:
        """True for stream kinds"""
        return self in (ChannelKind.R_STREAM, ChannelKind.X_STREAM)

    @property
    def space(self) -> Space:
        """The space the values live in"""
        return Space.X if self in (ChannelKind.X_SCALAR, ChannelKind.X_STREAM) else Space.R

    @classmethod
    def stream(cls, space: Space) -> "ChannelKind":
        """Stream kind of a space"""
        return cls.X_STREAM if space == Space.X else cls.R_STREAM

    @classmethod
    def scalar(cls, space: Space) -> "ChannelKind":
        """Scalar kind of a space"""
        return cls.X_SCALAR if space == Space.X else cls.R_SCALAR


def accepts(port: ChannelKind, source: ChannelKind) -> bool:
    """Whether a channel of kind source may drive a port of kind port"""
    if port == source:
        return True
    if source.is_stream:
        return False
    # scalars promote to constant streams, and reals to constant functions
    return source.space == Space.R or port.space == Space.X


class ModuleKind(str, Enum):
    """Module types"""

    CONSTANT = "constant"
    ADDER = "adder"
    MULTIPLIER = "multiplier"
    INTEGRATOR = "integrator"
    LIMIT = "limit"
    TIME = "time"


PORTS = {
    ModuleKind.CONSTANT: (),
    ModuleKind.TIME: (),
    ModuleKind.ADDER: ("in1", "in2"),
    ModuleKind.MULTIPLIER: ("in1", "in2"),
    ModuleKind.INTEGRATOR: ("c", "u", "v"),
    ModuleKind.LIMIT: ("in",),
}


######################################################################
#  M O D U L E S   A N D   W I R E S
######################################################################
@dataclass(frozen=True)
class ModuleSpec:
    """A module declaration"""

    name: str
    kind: ModuleKind
    space: Space = Space.R
    value: Union[None, float, Formula, GridFunction] = None
    modulus: Optional[Modulus] = field(default=None, compare=False)
    modulus_name: str = ""

    @property
    def ports(self) -> Tuple[str, ...]:
        """Input port names"""
        return PORTS[self.kind]

    def port_kind(self, port: str) -> ChannelKind:
        """Declared kind of an input port"""
        if port not in self.ports:
            raise DataValidationError(f"Module '{self.name}' has no port '{port}'")
        if self.kind == ModuleKind.INTEGRATOR and port == "c":
            return ChannelKind.scalar(self.space)
        return ChannelKind.stream(self.space)

    @property
    def output_kind(self) -> ChannelKind:
        """Kind of the output channel"""
        if self.kind in (ModuleKind.CONSTANT, ModuleKind.LIMIT):
            return ChannelKind.scalar(self.space)
        return ChannelKind.stream(self.space)

    def value_text(self) -> str:
        """The constant value as formula text"""
        if isinstance(self.value, (int, float)):
            return format_number(self.value)
        if isinstance(self.value, GridFunction):
            return "<grid function>"
        return to_text(self.value)


@dataclass(frozen=True)
class Wire:
    """A connection from an output channel to a module port"""

    source: str
    sink_module: str
    sink_port: str

    def __str__(self):
        return f"{self.source} -> {self.sink_module}.{self.sink_port}"


@dataclass(frozen=True)
class InputSpec:
    """A proper input label; streams may declare that no derivative is supplied"""

    label: str
    kind: ChannelKind
    derivative: bool = True
    implicit: bool = False


@dataclass(frozen=True)
class OutputSpec:
    """A proper output label attached to a channel"""

    label: str
    source: str


@dataclass(frozen=True)
class Channel:
    """A source together with every port and output it feeds"""

    source: str
    kind: Optional[ChannelKind]
    sinks: Tuple[str, ...]


######################################################################
#  N E T W O R K
######################################################################
@dataclass(frozen=True)
class Network:
    """The wiring graph of an L-GPAC"""

    name: str
    modules: Tuple[ModuleSpec, ...] = ()
    wires: Tuple[Wire, ...] = ()
    inputs: Tuple[InputSpec, ...] = ()
    outputs: Tuple[OutputSpec, ...] = ()

    def __repr__(self):
        return f"<Network {self.name} modules={len(self.modules)} wires={len(self.wires)}>"

    def module(self, name: str) -> ModuleSpec:
        """Finds a module by name"""
        for spec in self.modules:
            if spec.name == name:
                return spec
        raise DataValidationError(f"unknown module '{name}'")

    def has_module(self, name: str) -> bool:
        """True if a module with that name exists"""
        return any(spec.name == name for spec in self.modules)

    def declared_input(self, label: str) -> Optional[InputSpec]:
        """The declared proper input with that label, if any"""
        return next((spec for spec in self.inputs if spec.label == label), None)

    def incoming(self, name: str) -> Dict[str, str]:
        """port -> source for the wires into a module (first wire wins)"""
        ports = {}
        for wire in self.wires:
            if wire.sink_module == name:
                ports.setdefault(wire.sink_port, wire.source)
        return ports

    def source_kind(self, source: str) -> Optional[ChannelKind]:
        """Kind of the channel produced by a module or proper input"""
        declared = self.declared_input(source)
        if declared is not None:
            return declared.kind
        if self.has_module(source):
            return self.module(source).output_kind
        return None

    def implicit_inputs(self) -> List[InputSpec]:
        """Unconnected module ports, which act as proper inputs"""
        implicit = []
        for spec in self.modules:
            wired = self.incoming(spec.name)
            for port in spec.ports:
                if port not in wired:
                    implicit.append(InputSpec(f"{spec.name}.{port}", spec.port_kind(port), implicit=True))
        return implicit

    def proper_inputs(self) -> List[InputSpec]:
        """Declared and implicit proper inputs"""
        return list(self.inputs) + self.implicit_inputs()

    def channels(self) -> List[Channel]:
        """Every channel with its sinks, in declaration order"""
        sources = [spec.label for spec in self.inputs] + [spec.name for spec in self.modules]
        sinks = {source: [] for source in sources}
        for wire in self.wires:
            sinks.setdefault(wire.source, []).append(f"{wire.sink_module}.{wire.sink_port}")
        for output in self.outputs:
            sinks.setdefault(output.source, []).append(output.label)
        return [Channel(source, self.source_kind(source), tuple(items)) for source, items in sinks.items()]

    def channel_roles(self) -> Dict[str, List[str]]:
        """Proper inputs, mixed channels and proper outputs"""
        fed = {wire.source for wire in self.wires}
        return {
            "inputs": [spec.label for spec in self.proper_inputs()],
            "mixed": [spec.name for spec in self.modules if spec.name in fed],
            "outputs": [output.label for output in self.outputs],
        }


######################################################################
#  V A L I D A T I O N
######################################################################
class Severity(str, Enum):
    """How serious a finding is"""

    ERROR = "error"
    INFO = "info"


@dataclass(frozen=True)
class Violation:
    """A single validation finding"""

    code: str
    message: str
    location: str = ""
    severity: Severity = Severity.ERROR

    def serialize(self) -> dict:
        """Convert a violation into a dictionary"""
        return {"code": self.code, "message": self.message, "location": self.location, "severity": self.severity.value}


@dataclass
class ValidationReport:
    """All findings for a network; the check is syntactic"""

    network: str
    violations: List[Violation] = field(default_factory=list)
    note: str = "well-posedness checked syntactically: no integrator-free cycles; continuity is not verified"

    @property
    def errors(self) -> List[Violation]:
        """Findings that make the network invalid"""
        return [v for v in self.violations if v.severity == Severity.ERROR]

    @property
    def ok(self) -> bool:
        """True when there are no errors"""
        return not self.errors

    def codes(self) -> List[str]:
        """Codes of the error findings"""
        return [v.code for v in self.errors]

    def add(self, code: str, message: str, location: str = "", severity: Severity = Severity.ERROR):
        """Records a finding"""
        self.violations.append(Violation(code, message, location, severity))

    def serialize(self) -> dict:
        """Convert the report into a dictionary"""
        return {
            "network": self.network,
            "valid": self.ok,
            "violations": [v.serialize() for v in self.violations],
            "note": self.note,
        }


def _check_names(net: Network, report: ValidationReport):
    seen = set()
    for name in [spec.label for spec in net.inputs] + [spec.name for spec in net.modules]:
        if name in seen:
            report.add("duplicate-name", f"name '{name}' is declared more than once", name)
        seen.add(name)
    labels = set()
    for output in net.outputs:
        if output.label in labels:
            report.add("duplicate-name", f"output '{output.label}' is declared more than once", output.label)
        labels.add(output.label)
        if net.source_kind(output.source) is None:
            report.add("dangling-source", f"output '{output.label}' reads unknown channel '{output.source}'", output.label)


def _check_wires(net: Network, report: ValidationReport):
    driven = {}
    for wire in net.wires:
        where = str(wire)
        source_kind = net.source_kind(wire.source)
        if source_kind is None:
            report.add("dangling-source", f"unknown source '{wire.source}'", where)
        if not net.has_module(wire.sink_module):
            report.add("unknown-module", f"unknown module '{wire.sink_module}'", where)
            continue
        sink = net.module(wire.sink_module)
        if wire.sink_port not in sink.ports:
            report.add("unknown-port", f"module '{sink.name}' has no port '{wire.sink_port}'", where)
            continue
        key = (wire.sink_module, wire.sink_port)
        if key in driven:
            report.add("multiply-driven", f"port {sink.name}.{wire.sink_port} is driven by '{driven[key]}' and "
                       f"'{wire.source}'", where)
        driven.setdefault(key, wire.source)
        port_kind = sink.port_kind(wire.sink_port)
        if source_kind is not None and not accepts(port_kind, source_kind):
            report.add("kind-mismatch", f"{source_kind.value} channel '{wire.source}' cannot drive "
                       f"{port_kind.value} port {sink.name}.{wire.sink_port}", where)
        if net.has_module(wire.source) and net.module(wire.source).kind == ModuleKind.LIMIT:
            report.add("limit-feedback", f"limit output '{wire.source}' may only feed proper outputs", where)


def _check_modules(net: Network, report: ValidationReport):
    for spec in net.modules:
        if spec.kind == ModuleKind.CONSTANT:
            if spec.value is None:
                report.add("missing-value", f"constant '{spec.name}' has no value", spec.name)
            elif spec.space == Space.R and not isinstance(spec.value, (int, float)) and variables(spec.value):
                report.add("kind-mismatch", f"real constant '{spec.name}' depends on {sorted(variables(spec.value))}",
                           spec.name)
            elif spec.space == Space.X and not isinstance(spec.value, (int, float, GridFunction)) \
                    and "t" in variables(spec.value):
                report.add("kind-mismatch", f"constant '{spec.name}' depends on t", spec.name)
        if spec.kind == ModuleKind.LIMIT:
            if spec.modulus is None:
                report.add("missing-modulus", f"limit '{spec.name}' has no modulus", spec.name)
            elif spec.modulus.is_discrete:
                report.add("discrete-modulus", f"limit '{spec.name}' needs a continuous modulus", spec.name)
    for implicit in net.implicit_inputs():
        report.add("implicit-input", f"unconnected port acts as proper input '{implicit.label}'", implicit.label,
                   Severity.INFO)


def algebraic_cycles(net: Network) -> List[List[str]]:
    """Cycles of the module graph that avoid every integrator"""
    graph = nx.DiGraph()
    graph.add_nodes_from(spec.name for spec in net.modules)
    for wire in net.wires:
        if not (net.has_module(wire.source) and net.has_module(wire.sink_module)):
            continue
        if net.module(wire.sink_module).kind == ModuleKind.INTEGRATOR:
            continue
        graph.add_edge(wire.source, wire.sink_module)
    return [sorted(cycle) for cycle in nx.simple_cycles(graph)]


def validate(net: Network) -> ValidationReport:
    """Reports every wiring violation of the network"""
    logger.info("Validating network %s", net.name)
    report = ValidationReport(net.name)
    _check_names(net, report)
    _check_wires(net, report)
    _check_modules(net, report)
    for cycle in algebraic_cycles(net):
        report.add("algebraic-cycle", f"cycle without an integrator through {', '.join(cycle)}", cycle[0])
    if not report.ok:
        logger.warning("Network %s has %d violation(s)", net.name, len(report.errors))
    return report


######################################################################
#  B U I L D E R
######################################################################
class NetworkBuilder:
    """Fluent construction of networks; ports are passed as keyword arguments"""

    def __init__(self, name: str):
        self.name = name
        self.modules: List[ModuleSpec] = []
        self.wires: List[Wire] = []
        self.inputs: List[InputSpec] = []
        self.outputs: List[OutputSpec] = []

    def _add(self, spec: ModuleSpec, ports: Dict[str, str]) -> str:
        self.modules.append(spec)
        for port in spec.ports:
            if ports.get(port) is not None:
                self.wires.append(Wire(ports[port], spec.name, port))
        unknown = set(ports) - set(spec.ports)
        if unknown:
            raise DataValidationError(f"Module '{spec.name}' has no port(s) {sorted(unknown)}")
        return spec.name

    def input(self, label: str, kind: ChannelKind, derivative: bool = True) -> str:
        """Declares a proper input"""
        self.inputs.append(InputSpec(label, kind, derivative))
        return label

    def constant(self, name: str, value, space: Space = Space.R) -> str:
        """A constant module; value is a number, a formula text or a grid function"""
        if isinstance(value, str):
            value = parse_formula(value)
        elif isinstance(value, int):
            value = float(value)
        return self._add(ModuleSpec(name, ModuleKind.CONSTANT, space, value), {})

    def time(self, name: str = "t", space: Space = Space.R) -> str:
        """A time source"""
        return self._add(ModuleSpec(name, ModuleKind.TIME, space), {})

    def adder(self, name: str, space: Space = Space.R, **ports) -> str:
        """An adder; ports in1, in2"""
        return self._add(ModuleSpec(name, ModuleKind.ADDER, space), ports)

    def multiplier(self, name: str, space: Space = Space.R, **ports) -> str:
        """A multiplier; ports in1, in2"""
        return self._add(ModuleSpec(name, ModuleKind.MULTIPLIER, space), ports)

    def integrator(self, name: str, space: Space = Space.R, **ports) -> str:
        """An integrator w = c + int u dv; ports c, u, v"""
        return self._add(ModuleSpec(name, ModuleKind.INTEGRATOR, space), ports)

    def limit(self, name: str, modulus: Modulus, space: Space = Space.R, modulus_name: str = "T", **ports) -> str:
        """A one-input continuous limit module; port in"""
        return self._add(ModuleSpec(name, ModuleKind.LIMIT, space, modulus=modulus, modulus_name=modulus_name), ports)

    def wire(self, source: str, sink_module: str, sink_port: str):
        """Adds an explicit wire"""
        self.wires.append(Wire(source, sink_module, sink_port))

    def output(self, label: str, source: Optional[str] = None) -> str:
        """Declares a proper output"""
        self.outputs.append(OutputSpec(label, source or label))
        return label

    def build(self) -> Network:
        """The finished network"""
        return Network(self.name, tuple(self.modules), tuple(self.wires), tuple(self.inputs), tuple(self.outputs))
