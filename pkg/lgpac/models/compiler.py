"""
Compilation of networks into ODE initial value problems

Every integrator output w becomes a state with w' = u * v' and w(0) = c;
every other stream channel becomes an expression over states, time,
constants and proper inputs.  Derivatives are synthesized by the rules
(const)' = 0, t' = 1, (u + v)' = u' + v', (uv)' = u'v + uv' and
(integrator output)' = u * v'.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from .base import CompilationError, DataValidationError
from .formula import Formula, evaluate, format_number, parse_formula, variables
from .frechet import GridFunction, GridMismatchError, SpatialGrid
from .modulus import Modulus
from .network import ChannelKind, ModuleKind, Network, Space, validate

logger = logging.getLogger("flask.app")


class UnsupportedDerivative(CompilationError):
    """Raised when the derivative of an integrator's v input cannot be synthesized"""


class IllPosed(CompilationError):
    """Raised when the network has an algebraic cycle or fails validation"""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class BindingError(DataValidationError):
    """Raised when proper inputs are missing or bound to values of the wrong kind"""


# Node tuples: (op, *args).  Children always have smaller ids than parents.
LIT, CONST, TIME, STATE, INPUT, DINPUT, ADD, MUL = "lit", "const", "time", "state", "input", "dinput", "add", "mul"


@dataclass(frozen=True)
class StateSpec:
    """One integrator state; its values occupy slots [offset, offset + width)"""

    name: str
    space: Space
    offset: int
    width: int
    initial: int
    dynamics: int

    @property
    def slots(self) -> slice:
        """The slice of the state vector"""
        return slice(self.offset, self.offset + self.width)


@dataclass(frozen=True)
class LimitTap:
    """A limit module: the channel it reads and its modulus"""

    module: str
    source: str
    modulus: Modulus
    space: Space
    outputs: Tuple[str, ...] = ()


@dataclass
class CompiledSystem:
    """The executable form of the network's fixed point equation"""

    network: Network
    grid: Optional[SpatialGrid]
    nodes: List[tuple] = field(default_factory=list)
    states: List[StateSpec] = field(default_factory=list)
    channels: Dict[str, int] = field(default_factory=dict)
    derivatives: Dict[str, int] = field(default_factory=dict)
    kinds: Dict[str, ChannelKind] = field(default_factory=dict)
    constants: Dict[str, Union[float, np.ndarray]] = field(default_factory=dict)
    taps: List[LimitTap] = field(default_factory=list)

    @property
    def size(self) -> int:
        """Length of the state vector"""
        return sum(state.width for state in self.states)

    @property
    def width(self) -> int:
        """Number of grid points carried by X-streams"""
        return self.grid.size if self.grid is not None else 1

    def state(self, name: str) -> StateSpec:
        """Looks up a state by integrator name"""
        for state in self.states:
            if state.name == name:
                return state
        raise DataValidationError(f"unknown state '{name}'")

    def prefix(self, node_id: int, memo: Optional[Dict[int, str]] = None) -> str:
        """Normalized prefix notation of an expression"""
        memo = {} if memo is None else memo
        if node_id in memo:
            return memo[node_id]
        node = self.nodes[node_id]
        op = node[0]
        if op == LIT:
            text = format_number(node[1])
        elif op in (CONST, STATE, INPUT):
            text = node[1]
        elif op == TIME:
            text = "t"
        elif op == DINPUT:
            text = f"(d {node[1]})"
        else:
            symbol = "+" if op == ADD else "*"
            text = f"({symbol} {self.prefix(node[1], memo)} {self.prefix(node[2], memo)})"
        memo[node_id] = text
        return text

    def serialize(self) -> dict:
        """Dump of states and dynamics for debugging"""
        memo = {}
        return {
            "network": self.network.name,
            "grid": self.grid.serialize() if self.grid is not None else None,
            "state_count": self.size,
            "states": [
                {
                    "name": s.name,
                    "space": s.space.value,
                    "slots": [s.offset, s.offset + s.width],
                    "initial": self.prefix(s.initial, memo),
                    "dynamics": self.prefix(s.dynamics, memo),
                }
                for s in self.states
            ],
            "channels": {name: self.prefix(i, memo) for name, i in self.channels.items()},
            "derivatives": {name: self.prefix(i, memo) for name, i in self.derivatives.items()},
            "limits": [
                {"module": tap.module, "source": tap.source, "modulus": tap.modulus.describe(), "outputs": list(tap.outputs)}
                for tap in self.taps
            ],
        }

    def to_json(self) -> str:
        """The serialized dump as JSON"""
        return json.dumps(self.serialize(), indent=2)


######################################################################
#  C O M P I L E R
######################################################################
class _Compiler:
    """Builds the hash-consed expression graph of a network"""

    def __init__(self, net: Network, grid: Optional[SpatialGrid]):
        self.net = net
        self.grid = grid
        self.system = CompiledSystem(net, grid)
        self.index: Dict[tuple, int] = {}
        self.exprs: Dict[str, int] = {}
        self.pending: set = set()
        self.dmemo: Dict[int, int] = {}
        self.dpending: set = set()
        self.dynamics: Dict[str, int] = {}
        self.inputs = {spec.label: spec for spec in net.proper_inputs()}

    def node(self, *key) -> int:
        """Interns a node"""
        if key in self.index:
            return self.index[key]
        self.system.nodes.append(key)
        self.index[key] = len(self.system.nodes) - 1
        return self.index[key]

    def lit(self, value: float) -> int:
        return self.node(LIT, float(value))

    def is_lit(self, node_id: int, value: Optional[float] = None) -> bool:
        node = self.system.nodes[node_id]
        return node[0] == LIT and (value is None or node[1] == value)

    def add(self, a: int, b: int) -> int:
        if self.is_lit(a, 0.0):
            return b
        if self.is_lit(b, 0.0):
            return a
        if self.is_lit(a) and self.is_lit(b):
            return self.lit(self.system.nodes[a][1] + self.system.nodes[b][1])
        return self.node(ADD, a, b)

    def mul(self, a: int, b: int) -> int:
        if self.is_lit(a, 0.0) or self.is_lit(b, 0.0):
            return self.lit(0.0)
        if self.is_lit(a, 1.0):
            return b
        if self.is_lit(b, 1.0):
            return a
        if self.is_lit(a) and self.is_lit(b):
            return self.lit(self.system.nodes[a][1] * self.system.nodes[b][1])
        return self.node(MUL, a, b)

    ##################################################
    # Channel expressions
    ##################################################
    def constant(self, name: str, spec) -> int:
        value = spec.value
        if spec.space == Space.R or isinstance(value, (int, float)) or not variables(value):
            if isinstance(value, GridFunction):
                return self._grid_constant(name, value.values, value.grid)
            number = value if isinstance(value, (int, float)) else evaluate(value, {})
            return self.lit(float(number))
        if self.grid is None:
            raise CompilationError(f"constant '{name}' is a function of x but no grid was given")
        if isinstance(value, GridFunction):
            return self._grid_constant(name, value.values, value.grid)
        with np.errstate(all="ignore"):
            values = np.broadcast_to(np.asarray(evaluate(value, {"x": self.grid.array}), dtype=float), (self.grid.size,))
        if not np.all(np.isfinite(values)):
            raise CompilationError(f"constant '{name}' is not finite on the grid")
        return self._grid_constant(name, values, self.grid)

    def _grid_constant(self, name: str, values, grid: SpatialGrid) -> int:
        if grid != self.grid:
            raise GridMismatchError(f"constant '{name}' is sampled on a different grid")
        self.system.constants[name] = np.array(values, dtype=float)
        return self.node(CONST, name)

    def source(self, module: str, port: str) -> int:
        """Expression feeding a port"""
        source = self.net.incoming(module).get(port)
        if source is None:
            return self.node(INPUT, f"{module}.{port}")
        if source in self.inputs:
            return self.node(INPUT, source)
        return self.expr(source)

    def expr(self, name: str) -> int:
        """Expression of a module's output channel"""
        if name in self.exprs:
            return self.exprs[name]
        if name in self.pending:
            raise IllPosed(f"algebraic cycle through '{name}'")
        self.pending.add(name)
        spec = self.net.module(name)
        if spec.kind == ModuleKind.CONSTANT:
            node_id = self.constant(name, spec)
        elif spec.kind == ModuleKind.TIME:
            node_id = self.node(TIME)
        elif spec.kind == ModuleKind.ADDER:
            node_id = self.add(self.source(name, "in1"), self.source(name, "in2"))
        elif spec.kind == ModuleKind.MULTIPLIER:
            node_id = self.mul(self.source(name, "in1"), self.source(name, "in2"))
        elif spec.kind == ModuleKind.INTEGRATOR:
            node_id = self.node(STATE, name)
        else:
            raise CompilationError(f"limit output '{name}' is not a stream")
        self.pending.discard(name)
        self.exprs[name] = node_id
        return node_id

    ##################################################
    # Derivative closure
    ##################################################
    def derivative(self, node_id: int) -> int:
        """d/dt of an expression"""
        if node_id in self.dmemo:
            return self.dmemo[node_id]
        if node_id in self.dpending:
            raise IllPosed("integrator feedback through its own v input")
        self.dpending.add(node_id)
        try:
            result = self._derivative(self.system.nodes[node_id])
        finally:
            self.dpending.discard(node_id)
        self.dmemo[node_id] = result
        return result

    def _derivative(self, node: tuple) -> int:
        op = node[0]
        if op in (LIT, CONST):
            result = self.lit(0.0)
        elif op == TIME:
            result = self.lit(1.0)
        elif op == INPUT:
            spec = self.inputs[node[1]]
            if not spec.kind.is_stream:
                result = self.lit(0.0)
            elif spec.derivative:
                result = self.node(DINPUT, node[1])
            else:
                raise UnsupportedDerivative(f"input '{node[1]}' has no declared derivative")
        elif op == STATE:
            result = self.state_dynamics(node[1])
        elif op == ADD:
            result = self.add(self.derivative(node[1]), self.derivative(node[2]))
        elif op == MUL:
            result = self.add(
                self.mul(self.derivative(node[1]), node[2]),
                self.mul(node[1], self.derivative(node[2])),
            )
        else:
            raise UnsupportedDerivative(f"cannot differentiate '{op}' nodes")
        return result

    def state_dynamics(self, name: str) -> int:
        """u * v' for an integrator"""
        if name not in self.dynamics:
            u = self.source(name, "u")
            v = self.source(name, "v")
            try:
                dv = self.derivative(v)
            except UnsupportedDerivative as error:
                raise UnsupportedDerivative(f"integrator '{name}': {error}") from error
            self.dynamics[name] = self.mul(u, dv)
        return self.dynamics[name]

    ##################################################
    # Driver
    ##################################################
    def run(self) -> CompiledSystem:
        system = self.system
        offset = 0
        for label, spec in self.inputs.items():
            system.kinds[label] = spec.kind
            system.channels[label] = self.node(INPUT, label)
        for spec in self.net.modules:
            if spec.kind == ModuleKind.LIMIT:
                continue
            if spec.space == Space.X and self.grid is None:
                raise CompilationError(f"module '{spec.name}' lives in X but no grid was given")
            system.kinds[spec.name] = spec.output_kind
            system.channels[spec.name] = self.expr(spec.name)
        for spec in self.net.modules:
            if spec.kind != ModuleKind.INTEGRATOR:
                continue
            width = self.grid.size if spec.space == Space.X else 1
            initial = self.source(spec.name, "c")
            system.states.append(StateSpec(spec.name, spec.space, offset, width, initial, self.state_dynamics(spec.name)))
            offset += width
        for name, node_id in list(system.channels.items()):
            if system.kinds[name].is_stream:
                try:
                    system.derivatives[name] = self.derivative(node_id)
                except UnsupportedDerivative:
                    logger.debug("Channel %s has no derivative expression", name)
        for spec in self.net.modules:
            if spec.kind == ModuleKind.LIMIT:
                source = self.net.incoming(spec.name).get("in", f"{spec.name}.in")
                outputs = tuple(o.label for o in self.net.outputs if o.source == spec.name)
                system.taps.append(LimitTap(spec.name, source, spec.modulus, spec.space, outputs))
        return system


def compile_network(net: Network, grid: Optional[SpatialGrid] = None) -> CompiledSystem:
    """Compiles a validated network into a first-order system"""
    report = validate(net)
    if not report.ok:
        cycles = [v for v in report.errors if v.code == "algebraic-cycle"]
        message = cycles[0].message if cycles else report.errors[0].message
        raise IllPosed(f"network '{net.name}' is not valid: {message}", report)
    logger.info("Compiling network %s on %s grid points", net.name, grid.size if grid else 1)
    system = _Compiler(net, grid).run()
    logger.debug("Network %s compiled to %d states, %d nodes", net.name, system.size, len(system.nodes))
    return system


######################################################################
#  I N P U T   B I N D I N G S
######################################################################
@dataclass(frozen=True)
class StreamBinding:
    """Value and time derivative of a stream input; formula text or callables of t (and x)"""

    value: Union[str, Formula, Callable]
    derivative: Union[None, str, Formula, Callable] = None


@dataclass
class ResolvedInput:
    """A bound input, ready to be evaluated at any time"""

    label: str
    kind: ChannelKind
    value: Callable[[float], Union[float, np.ndarray]]
    derivative: Optional[Callable[[float], Union[float, np.ndarray]]] = None


def _formula_callable(spec, label: str, grid: Optional[SpatialGrid], space: Space):
    if isinstance(spec, str):
        spec = parse_formula(spec)
    if callable(spec):
        if space == Space.X:
            xs = grid.array
            return lambda t: np.broadcast_to(np.asarray(spec(t, xs), dtype=float), xs.shape)
        return lambda t: float(spec(t))
    used = variables(spec)
    if space == Space.R and "x" in used:
        raise BindingError(f"input '{label}' is real but its formula uses x")
    if space == Space.X:
        xs = grid.array
        return lambda t: np.broadcast_to(np.asarray(evaluate(spec, {"t": t, "x": xs}), dtype=float), xs.shape)
    return lambda t: float(evaluate(spec, {"t": t}))


def _resolve_scalar(label: str, kind: ChannelKind, value, grid: Optional[SpatialGrid]):
    if isinstance(value, StreamBinding):
        raise BindingError(f"input '{label}' is a {kind.value} but was bound to a stream")
    if isinstance(value, GridFunction):
        if kind != ChannelKind.X_SCALAR:
            raise BindingError(f"input '{label}' is a {kind.value} but was bound to a grid function")
        if value.grid != grid:
            raise GridMismatchError(f"input '{label}' is sampled on a different grid")
        constant = value.values
        return lambda t: constant
    if isinstance(value, (int, float)):
        number = float(value)
        return lambda t: number
    if isinstance(value, str) or not callable(value):
        node = parse_formula(value) if isinstance(value, str) else value
        used = variables(node)
        if "t" in used or (kind == ChannelKind.R_SCALAR and "x" in used):
            raise BindingError(f"input '{label}' is a {kind.value} but its formula uses {sorted(used)}")
        if kind == ChannelKind.X_SCALAR:
            constant = np.broadcast_to(np.asarray(evaluate(node, {"x": grid.array}), dtype=float), (grid.size,))
            return lambda t: constant
        number = float(evaluate(node, {}))
        return lambda t: number
    if kind == ChannelKind.X_SCALAR:
        constant = np.broadcast_to(np.asarray(value(grid.array), dtype=float), (grid.size,))
        return lambda t: constant
    number = float(value())
    return lambda t: number


@dataclass
class BoundNetwork:
    """A compiled system with every proper input bound"""

    system: CompiledSystem
    inputs: Dict[str, ResolvedInput]
    _plans: Dict[tuple, list] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._states = {state.name: state for state in self.system.states}

    @property
    def network(self) -> Network:
        """The source network"""
        return self.system.network

    def plan(self, roots: Tuple[int, ...]) -> list:
        """Node ids needed to evaluate the roots, children first"""
        if roots not in self._plans:
            needed = set()
            stack = list(roots)
            while stack:
                node_id = stack.pop()
                if node_id in needed:
                    continue
                needed.add(node_id)
                node = self.system.nodes[node_id]
                if node[0] in (ADD, MUL):
                    stack.extend(node[1:])
            self._plans[roots] = sorted(needed)
        return self._plans[roots]

    def evaluate(self, t: float, y: np.ndarray, roots: Tuple[int, ...]) -> Dict[int, object]:
        """Values of the root expressions at time t and state y"""
        values = {}
        nodes = self.system.nodes
        for node_id in self.plan(roots):
            node = nodes[node_id]
            op = node[0]
            if op == LIT:
                values[node_id] = node[1]
            elif op == CONST:
                values[node_id] = self.system.constants[node[1]]
            elif op == TIME:
                values[node_id] = t
            elif op == STATE:
                state = self._states[node[1]]
                values[node_id] = y[state.offset] if state.space == Space.R else y[state.slots]
            elif op == INPUT:
                values[node_id] = self.inputs[node[1]].value(t)
            elif op == DINPUT:
                values[node_id] = self.inputs[node[1]].derivative(t)
            elif op == ADD:
                values[node_id] = values[node[1]] + values[node[2]]
            else:
                values[node_id] = values[node[1]] * values[node[2]]
        return values

    def initial_state(self) -> np.ndarray:
        """The state vector at t = 0"""
        y0 = np.zeros(self.system.size)
        roots = tuple(state.initial for state in self.system.states)
        values = self.evaluate(0.0, y0, roots)
        for state in self.system.states:
            y0[state.slots] = values[state.initial]
        return y0

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        """dy/dt"""
        roots = tuple(state.dynamics for state in self.system.states)
        values = self.evaluate(t, y, roots)
        dy = np.empty_like(y)
        for state in self.system.states:
            dy[state.slots] = values[state.dynamics]
        return dy


def proper_input_binding(net_or_system: Union[Network, CompiledSystem], bindings: Dict[str, object],
                         grid: Optional[SpatialGrid] = None) -> BoundNetwork:
    """Binds every proper input of a network, producing a closed system"""
    system = net_or_system if isinstance(net_or_system, CompiledSystem) else compile_network(net_or_system, grid)
    grid = system.grid
    specs = {spec.label: spec for spec in system.network.proper_inputs()}
    unknown = sorted(set(bindings) - set(specs))
    if unknown:
        raise BindingError(f"no proper input named {', '.join(repr(u) for u in unknown)}")
    missing = sorted(set(specs) - set(bindings))
    if missing:
        raise BindingError(f"missing binding for {', '.join(repr(m) for m in missing)}")
    resolved = {}
    for label, spec in specs.items():
        value = bindings[label]
        if spec.kind.space == Space.X and grid is None:
            raise BindingError(f"input '{label}' lives in X but the system has no grid")
        if spec.kind.is_stream:
            if not isinstance(value, StreamBinding):
                raise BindingError(f"input '{label}' is a {spec.kind.value} and needs a StreamBinding")
            if value.derivative is None and spec.derivative:
                raise BindingError(f"stream input '{label}' needs both a value and a derivative")
            derivative = None
            if value.derivative is not None:
                derivative = _formula_callable(value.derivative, label, grid, spec.kind.space)
            resolved[label] = ResolvedInput(label, spec.kind, _formula_callable(value.value, label, grid, spec.kind.space),
                                            derivative)
        else:
            resolved[label] = ResolvedInput(label, spec.kind, _resolve_scalar(label, spec.kind, value, grid))
    logger.info("Bound %d proper input(s) of %s", len(resolved), system.network.name)
    return BoundNetwork(system, resolved)
