"""
Models for DSL documents

A DslDocument is the abstract form of a .lgpac file: an optional network
name followed by statements in source order.  Statements compare
structurally, so parse(print(doc)) == doc is a plain equality check.
"""

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from lgpac.models.base import DataValidationError
from lgpac.models.formula import Formula, format_number
from lgpac.models.frechet import SpatialGrid
from lgpac.models.modulus import Exponential, Linear, Modulus, ModulusFlavor, Tabulated
from lgpac.models.network import ChannelKind, ModuleKind, Severity, Space

DEFAULT_SAMPLES = 101
NUMBER = r"[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?"


######################################################################
#  D I A G N O S T I C S
######################################################################
@dataclass(frozen=True)
class Span:
    """A column range [start, end) on a 1-based line"""

    line: int
    start: int
    end: int

    def __str__(self):
        return f"{self.line}:{self.start + 1}"


@dataclass(frozen=True)
class Diagnostic:
    """A problem found in DSL source"""

    severity: Severity
    span: Span
    message: str
    hint: str = ""

    def __str__(self):
        text = f"{self.span}: {self.severity.value}: {self.message}"
        return f"{text} ({self.hint})" if self.hint else text

    def serialize(self) -> dict:
        """Convert a diagnostic into a dictionary"""
        return {
            "severity": self.severity.value,
            "line": self.span.line,
            "start": self.span.start,
            "end": self.span.end,
            "message": self.message,
            "hint": self.hint,
        }


class DslError(DataValidationError):
    """Raised when a document has error diagnostics"""

    def __init__(self, diagnostics: List[Diagnostic]):
        self.diagnostics = list(diagnostics)
        first = self.diagnostics[0] if self.diagnostics else "no diagnostics"
        super().__init__(f"{len(self.diagnostics)} problem(s); first: {first}")


######################################################################
#  S T A T E M E N T S
######################################################################
@dataclass(frozen=True)
class GridDecl:
    """grid LOWER .. UPPER step S | grid LOWER .. UPPER points P, ..."""

    grid: SpatialGrid


@dataclass(frozen=True)
class ModulusDecl:
    """modulus NAME = RULE"""

    name: str
    rule: str
    modulus: Modulus = field(compare=False, repr=False, default=None)


@dataclass(frozen=True)
class InputDecl:
    """input LABEL : KIND [underived]"""

    label: str
    kind: ChannelKind
    derivative: bool = True


@dataclass(frozen=True)
class ModuleDecl:
    """const, time, adder, multiplier, integrator and limit declarations"""

    name: str
    kind: ModuleKind
    space: Space = Space.R
    value: Optional[Formula] = None
    modulus: str = ""
    ports: Tuple[Tuple[str, str], ...] = ()


@dataclass(frozen=True)
class WireDecl:
    """wire SOURCE -> MODULE.PORT"""

    source: str
    module: str
    port: str


@dataclass(frozen=True)
class OutputDecl:
    """output LABEL [= SOURCE]"""

    label: str
    source: str


@dataclass(frozen=True)
class BindDecl:
    """bind LABEL = VALUE [; DERIVATIVE]"""

    label: str
    value: Formula
    derivative: Optional[Formula] = None


@dataclass(frozen=True)
class SimulateDecl:
    """simulate T_END [samples N]"""

    t_end: float
    samples: int = DEFAULT_SAMPLES


@dataclass(frozen=True)
class PrecisionDecl:
    """precision TAU"""

    tau: float


@dataclass(frozen=True)
class ExpectDecl:
    """expect CHANNEL = FORMULA"""

    channel: str
    formula: Formula


@dataclass(frozen=True)
class ExportDecl:
    """export PATH"""

    path: str


Statement = Union[GridDecl, ModulusDecl, InputDecl, ModuleDecl, WireDecl, OutputDecl, BindDecl, SimulateDecl,
                  PrecisionDecl, ExpectDecl, ExportDecl]


@dataclass(frozen=True)
class DslDocument:
    """A parsed .lgpac file"""

    name: str = ""
    statements: Tuple[Statement, ...] = ()

    def _of(self, kind) -> list:
        return [s for s in self.statements if isinstance(s, kind)]

    @property
    def grid(self) -> Optional[SpatialGrid]:
        """The declared grid, if any"""
        grids = self._of(GridDecl)
        return grids[-1].grid if grids else None

    @property
    def moduli(self) -> Dict[str, Modulus]:
        """Declared moduli by name"""
        return {s.name: s.modulus for s in self._of(ModulusDecl)}

    @property
    def inputs(self) -> List[InputDecl]:
        return self._of(InputDecl)

    @property
    def modules(self) -> List[ModuleDecl]:
        return self._of(ModuleDecl)

    @property
    def wires(self) -> List[WireDecl]:
        return self._of(WireDecl)

    @property
    def outputs(self) -> List[OutputDecl]:
        return self._of(OutputDecl)

    @property
    def bindings(self) -> List[BindDecl]:
        return self._of(BindDecl)

    @property
    def expectations(self) -> List[ExpectDecl]:
        return self._of(ExpectDecl)

    @property
    def exports(self) -> List[str]:
        return [s.path for s in self._of(ExportDecl)]

    @property
    def simulate(self) -> Optional[SimulateDecl]:
        """The simulate directive, if any"""
        found = self._of(SimulateDecl)
        return found[-1] if found else None

    @property
    def precision(self) -> Optional[float]:
        """The limit precision tau, if any"""
        found = self._of(PrecisionDecl)
        return found[-1].tau if found else None


######################################################################
#  M O D U L U S   R U L E S
######################################################################
LINEAR_RE = re.compile(rf"linear\s+(?P<C>{NUMBER})(?:\s*\+\s*(?P<offset>{NUMBER}))?")
EXP2_RE = re.compile(rf"exp2\s+(?P<C>{NUMBER})")
TABLE_RE = re.compile(r"table\s*\[(?P<body>[^\]]*)\]")
PAIR_RE = re.compile(rf"\s*(?P<arg>{NUMBER})\s*:\s*(?P<value>{NUMBER})\s*")
NETWORK_RE = re.compile(rf"network\s+(?P<shape>exp2|linear)\s+(?P<C>{NUMBER})")


def parse_modulus(text: str) -> Modulus:
    """Builds a modulus from its rule text; raises DataValidationError"""
    body = text.strip()
    flavor = ModulusFlavor.CONTINUOUS
    if body.startswith("discrete ") or body.startswith("discrete\t"):
        flavor = ModulusFlavor.DISCRETE
        body = body[len("discrete"):].strip()
    match = LINEAR_RE.fullmatch(body)
    if match:
        return Modulus(flavor, Linear(float(match["C"]), float(match["offset"] or 0.0)))
    match = EXP2_RE.fullmatch(body)
    if match:
        return Modulus(flavor, Exponential(float(match["C"])))
    match = TABLE_RE.fullmatch(body)
    if match:
        pairs = []
        for item in match["body"].split(","):
            pair = PAIR_RE.fullmatch(item)
            if not pair:
                raise DataValidationError(f"table entries look like 'arg: value', got {item.strip()!r}")
            pairs.append((float(pair["arg"]), float(pair["value"])))
        return Modulus(flavor, Tabulated(tuple(pairs)))
    match = NETWORK_RE.fullmatch(body)
    if match:
        if flavor == ModulusFlavor.DISCRETE:
            raise DataValidationError("network moduli are continuous")
        # pylint: disable=import-outside-toplevel
        from lgpac.constructions import network_modulus

        return network_modulus(match["shape"], float(match["C"]))
    raise DataValidationError(f"unknown modulus rule {body!r}")


def grid_text(grid: SpatialGrid) -> str:
    """Canonical grid declaration body"""
    lower, upper = format_number(grid.lower), "inf" if grid.upper == float("inf") else format_number(grid.upper)
    points = grid.points
    if grid.lower == points[0] and grid.upper == points[-1]:
        step = points[1] - points[0] if len(points) > 1 else 1.0
        if SpatialGrid.uniform(grid.lower, grid.upper, step).points == points:
            return f"{lower} .. {upper} step {format_number(step)}"
    return f"{lower} .. {upper} points {', '.join(format_number(p) for p in points)}"
