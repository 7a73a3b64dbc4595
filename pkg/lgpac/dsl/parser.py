"""
DSL parser

Line-oriented: one statement per line, '#' starts a comment.  A bad
statement becomes a Diagnostic and parsing carries on with the next line,
so one pass reports every problem.  No input text raises; every failure
is a Diagnostic whose span lies inside the source.
"""

import logging
import math
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from lgpac.models.base import DataValidationError
from lgpac.models.formula import FormulaError, parse_formula
from lgpac.models.frechet import SpatialGrid
from lgpac.models.network import PORTS, ChannelKind, ModuleKind, Severity, Space

from .document import (
    NUMBER,
    BindDecl,
    Diagnostic,
    DslDocument,
    DslError,
    ExpectDecl,
    ExportDecl,
    GridDecl,
    InputDecl,
    ModuleDecl,
    ModulusDecl,
    OutputDecl,
    PrecisionDecl,
    SimulateDecl,
    Span,
    WireDecl,
    parse_modulus,
)

logger = logging.getLogger("flask.app")

IDENT = r"[A-Za-z_][A-Za-z_0-9]*"
LABEL = rf"{IDENT}(?:\.{IDENT})?"
SPACE = r"(?:\s+in\s+(?P<space>[rx]))?"
BLOCK = r"(?:\s*\{(?P<ports>[^{}]*)\})?"

STATEMENTS = {
    "network": (rf"network\s+(?P<name>{IDENT})", "network NAME"),
    "grid": (
        rf"grid\s+(?P<lower>{NUMBER})\s*\.\.\s*(?P<upper>{NUMBER}|inf)\s+"
        rf"(?:step\s+(?P<step>{NUMBER})|points\s+(?P<points>.+))",
        "grid LOWER .. UPPER step STEP  or  grid LOWER .. UPPER points P1, P2, ...",
    ),
    "modulus": (rf"modulus\s+(?P<name>{IDENT})\s*=\s*(?P<rule>.+)", "modulus NAME = linear C | exp2 C | table [a: v, ...]"),
    "input": (rf"input\s+(?P<label>{LABEL})\s*:\s*(?P<kind>{IDENT})(?:\s+(?P<underived>underived))?",
              "input LABEL : RScalar|XScalar|RStream|XStream [underived]"),
    "const": (rf"const\s+(?P<name>{IDENT}){SPACE}\s*=\s*(?P<value>.+)", "const NAME [in x] = FORMULA"),
    "time": (rf"time\s+(?P<name>{IDENT}){SPACE}", "time NAME [in x]"),
    "adder": (rf"adder\s+(?P<name>{IDENT}){SPACE}{BLOCK}", "adder NAME [in x] { in1 = A; in2 = B }"),
    "multiplier": (rf"multiplier\s+(?P<name>{IDENT}){SPACE}{BLOCK}", "multiplier NAME [in x] { in1 = A; in2 = B }"),
    "integrator": (rf"integrator\s+(?P<name>{IDENT}){SPACE}{BLOCK}", "integrator NAME [in x] { c = C; u = U; v = V }"),
    "limit": (rf"limit\s+(?P<name>{IDENT}){SPACE}\s+using\s+(?P<modulus>{IDENT}){BLOCK}",
              "limit NAME [in x] using MODULUS { in = SOURCE }"),
    "wire": (rf"wire\s+(?P<source>{LABEL})\s*->\s*(?P<module>{IDENT})\.(?P<port>{IDENT})", "wire SOURCE -> MODULE.PORT"),
    "output": (rf"output\s+(?P<label>{IDENT})(?:\s*=\s*(?P<source>{IDENT}))?", "output LABEL [= SOURCE]"),
    "bind": (rf"bind\s+(?P<label>{LABEL})\s*=\s*(?P<value>[^;]+?)(?:\s*;\s*(?P<derivative>.+))?",
             "bind LABEL = VALUE [; DERIVATIVE]"),
    "simulate": (rf"simulate\s+(?P<t_end>{NUMBER})(?:\s+samples\s+(?P<samples>\d+))?", "simulate T_END [samples N]"),
    "precision": (rf"precision\s+(?P<tau>{NUMBER})", "precision TAU"),
    "expect": (rf"expect\s+(?P<channel>{LABEL})\s*=\s*(?P<formula>.+)", "expect CHANNEL = FORMULA"),
    "export": (r"export\s+(?P<path>\S+)", "export PATH"),
}
PATTERNS = {keyword: re.compile(pattern) for keyword, (pattern, _) in STATEMENTS.items()}
PORT_RE = re.compile(rf"\s*(?P<port>{IDENT})\s*=\s*(?P<source>{LABEL})\s*")
KINDS = {kind.value: kind for kind in ChannelKind}
MAX_GRID_POINTS = 100_000


@dataclass
class ParseResult:
    """The document when there are no errors, and every diagnostic found"""

    document: Optional[DslDocument]
    diagnostics: List[Diagnostic] = field(default_factory=list)

    @property
    def errors(self) -> List[Diagnostic]:
        """Diagnostics of severity error"""
        return [d for d in self.diagnostics if d.severity == Severity.ERROR]

    @property
    def ok(self) -> bool:
        """True when a document was produced"""
        return self.document is not None


class _StatementError(Exception):
    """A problem local to one statement"""

    def __init__(self, message: str, start: int, end: int, hint: str = ""):
        super().__init__(message)
        self.start = start
        self.end = end
        self.hint = hint


######################################################################
#  P A R S E R
######################################################################
class _Parser:
    """Parses line by line, then checks references across statements"""

    def __init__(self, text: str):
        self.lines = text.split("\n")
        self.diagnostics: List[Diagnostic] = []
        self.name = ""
        self.statements: List[Tuple[object, int, "_Located"]] = []
        self.handlers = {
            "network": self.on_network,
            "grid": self.on_grid,
            "modulus": self.on_modulus,
            "input": self.on_input,
            "const": self.on_const,
            "time": self.on_time,
            "adder": self.block_module(ModuleKind.ADDER),
            "multiplier": self.block_module(ModuleKind.MULTIPLIER),
            "integrator": self.block_module(ModuleKind.INTEGRATOR),
            "limit": self.block_module(ModuleKind.LIMIT),
            "wire": self.on_wire,
            "output": self.on_output,
            "bind": self.on_bind,
            "simulate": self.on_simulate,
            "precision": self.on_precision,
            "expect": self.on_expect,
            "export": self.on_export,
        }

    def error(self, line: int, start: int, end: int, message: str, hint: str = ""):
        width = len(self.lines[line - 1]) if 0 < line <= len(self.lines) else 0
        start = min(max(start, 0), width)
        end = min(max(end, start), width)
        self.diagnostics.append(Diagnostic(Severity.ERROR, Span(line, start, end), message, hint))

    def run(self) -> ParseResult:
        for number, raw in enumerate(self.lines, start=1):
            try:
                self.statement(number, raw)
            except _StatementError as error:
                self.error(number, error.start, error.end, str(error), error.hint)
            except (DataValidationError, ValueError, OverflowError, RecursionError) as error:
                self.error(number, 0, len(raw), str(error) or type(error).__name__)
        self.check_references()
        if self.diagnostics:
            logger.info("Parse produced %d diagnostic(s)", len(self.diagnostics))
            return ParseResult(None, self.diagnostics)
        return ParseResult(DslDocument(self.name, tuple(s for s, _, _ in self.statements)))

    ##################################################
    # Single statements
    ##################################################
    def statement(self, number: int, raw: str):
        code = raw.split("#", 1)[0].rstrip()
        body = code.lstrip()
        if not body:
            return
        indent = len(code) - len(body)
        keyword = body.split(None, 1)[0]
        if keyword not in PATTERNS:
            raise _StatementError(f"unknown statement '{keyword}'", indent, indent + len(keyword),
                                  f"expected one of {', '.join(STATEMENTS)}")
        match = PATTERNS[keyword].fullmatch(body)
        if match is None:
            raise _StatementError(f"malformed {keyword} statement", indent, len(code), STATEMENTS[keyword][1])
        result = self.handlers[keyword](match, indent)
        if result is not None:
            self.statements.append((result, number, _Located(match, indent)))

    def formula(self, match: re.Match, group: str, indent: int):
        try:
            return parse_formula(match[group])
        except FormulaError as error:
            start = indent + match.start(group) + error.offset
            raise _StatementError(str(error), start, start + 1) from error

    def on_network(self, match, indent):
        if self.name:
            raise _StatementError("network name declared twice", indent, indent + len(match[0]))
        self.name = match["name"]

    def on_grid(self, match, indent):
        lower = float(match["lower"])
        upper = math.inf if match["upper"] == "inf" else float(match["upper"])
        if match["step"] is not None:
            if math.isinf(upper):
                raise _StatementError("a stepped grid needs a finite upper bound", indent + match.start("upper"),
                                      indent + match.end("upper"), "use 'points' for unbounded domains")
            step = float(match["step"])
            if step <= 0 or not (upper - lower) / step <= MAX_GRID_POINTS:
                raise _StatementError(f"a grid step of {match['step']} is out of range", indent + match.start("step"),
                                      indent + match.end("step"), f"at most {MAX_GRID_POINTS} points")
            return GridDecl(SpatialGrid.uniform(lower, upper, step))
        points = []
        for item in match["points"].split(","):
            if not re.fullmatch(rf"\s*{NUMBER}\s*", item):
                raise _StatementError(f"grid point {item.strip()!r} is not a number", indent + match.start("points"),
                                      indent + match.end("points"))
            points.append(float(item))
        return GridDecl(SpatialGrid(lower, upper, tuple(points)))

    def on_modulus(self, match, indent):
        try:
            modulus = parse_modulus(match["rule"])
        except DataValidationError as error:
            raise _StatementError(str(error), indent + match.start("rule"), indent + match.end("rule"),
                                  STATEMENTS["modulus"][1]) from error
        return ModulusDecl(match["name"], modulus.describe(), modulus)

    def on_input(self, match, indent):
        if match["kind"] not in KINDS:
            raise _StatementError(f"unknown channel kind '{match['kind']}'", indent + match.start("kind"),
                                  indent + match.end("kind"), ", ".join(KINDS))
        return InputDecl(match["label"], KINDS[match["kind"]], match["underived"] is None)

    def on_const(self, match, indent):
        return ModuleDecl(match["name"], ModuleKind.CONSTANT, Space(match["space"] or "r"), self.formula(match, "value", indent))

    def on_time(self, match, indent):
        return ModuleDecl(match["name"], ModuleKind.TIME, Space(match["space"] or "r"))

    def _ports(self, match, indent, kind: ModuleKind) -> Tuple[Tuple[str, str], ...]:
        if match["ports"] is None:
            return ()
        found: Dict[str, str] = {}
        offset = indent + match.start("ports")
        for entry in re.finditer(r"[^;]+", match["ports"]):
            if not entry.group(0).strip():
                continue
            port = PORT_RE.fullmatch(entry.group(0))
            start, end = offset + entry.start(), offset + entry.end()
            if port is None:
                raise _StatementError(f"malformed port entry {entry.group(0).strip()!r}", start, end, "PORT = SOURCE")
            if port["port"] not in PORTS[kind]:
                raise _StatementError(f"{kind.value} has no port '{port['port']}'", start, end,
                                      f"ports are {', '.join(PORTS[kind])}")
            if port["port"] in found:
                raise _StatementError(f"port '{port['port']}' connected twice", start, end)
            found[port["port"]] = port["source"]
        return tuple((p, found[p]) for p in PORTS[kind] if p in found)

    def block_module(self, kind: ModuleKind):
        def handler(match, indent):
            ports = self._ports(match, indent, kind)
            modulus = match["modulus"] if kind == ModuleKind.LIMIT else ""
            return ModuleDecl(match["name"], kind, Space(match["space"] or "r"), modulus=modulus, ports=ports)

        return handler

    def on_wire(self, match, indent):
        return WireDecl(match["source"], match["module"], match["port"])

    def on_output(self, match, indent):
        return OutputDecl(match["label"], match["source"] or match["label"])

    def on_bind(self, match, indent):
        derivative = self.formula(match, "derivative", indent) if match["derivative"] is not None else None
        return BindDecl(match["label"], self.formula(match, "value", indent), derivative)

    def on_simulate(self, match, indent):
        t_end = float(match["t_end"])
        if not 0 <= t_end < math.inf:
            raise _StatementError("simulation horizon must be finite and nonnegative", indent + match.start("t_end"),
                                  indent + match.end("t_end"))
        samples = int(match["samples"]) if match["samples"] else SimulateDecl.__dataclass_fields__["samples"].default
        if samples < 2:
            raise _StatementError("at least two samples are needed", indent + match.start("samples"),
                                  indent + match.end("samples"))
        return SimulateDecl(t_end, samples)

    def on_precision(self, match, indent):
        tau = float(match["tau"])
        if not 0 <= tau < math.inf:
            raise _StatementError("precision must be finite and nonnegative", indent + match.start("tau"),
                                  indent + match.end("tau"))
        return PrecisionDecl(tau)

    def on_expect(self, match, indent):
        return ExpectDecl(match["channel"], self.formula(match, "formula", indent))

    def on_export(self, match, indent):
        return ExportDecl(match["path"])

    ##################################################
    # Cross references
    ##################################################
    def check_references(self):
        names: Dict[str, ModuleDecl] = {}
        inputs: Dict[str, InputDecl] = {}
        moduli = set()
        for stmt, number, where in self.statements:
            if isinstance(stmt, (ModuleDecl, InputDecl)):
                name = stmt.name if isinstance(stmt, ModuleDecl) else stmt.label
                if name in names or name in inputs:
                    self.error(number, *where.span("name" if isinstance(stmt, ModuleDecl) else "label"), f"duplicate name '{name}'")
                elif isinstance(stmt, ModuleDecl):
                    names[name] = stmt
                else:
                    inputs[name] = stmt
            elif isinstance(stmt, ModulusDecl):
                if stmt.name in moduli:
                    self.error(number, *where.span("name"), f"duplicate modulus '{stmt.name}'")
                moduli.add(stmt.name)

        def known_source(label: str) -> bool:
            if label in names or label in inputs:
                return True
            module, _, port = label.partition(".")
            return module in names and port in PORTS[names[module].kind]

        outputs = set()
        for stmt, number, where in self.statements:
            if isinstance(stmt, ModuleDecl):
                if stmt.kind == ModuleKind.LIMIT and stmt.modulus not in moduli:
                    self.error(number, *where.span("modulus"), f"unknown modulus '{stmt.modulus}'")
                for port, source in stmt.ports:
                    if not known_source(source):
                        self.error(number, *where.span("ports"), f"unknown source '{source}' for port '{port}'")
            elif isinstance(stmt, WireDecl):
                if stmt.module not in names:
                    self.error(number, *where.span("module"), f"unknown module '{stmt.module}'")
                elif stmt.port not in PORTS[names[stmt.module].kind]:
                    self.error(number, *where.span("port"), f"module '{stmt.module}' has no port '{stmt.port}'")
                if not known_source(stmt.source):
                    self.error(number, *where.span("source"), f"unknown source '{stmt.source}'")
            elif isinstance(stmt, OutputDecl):
                if stmt.label in outputs:
                    self.error(number, *where.span("label"), f"duplicate output '{stmt.label}'")
                outputs.add(stmt.label)
                if not known_source(stmt.source):
                    self.error(number, *where.span("source" if where.match["source"] else "label"),
                               f"unknown source '{stmt.source}'")
            elif isinstance(stmt, BindDecl) and not known_source(stmt.label):
                self.error(number, *where.span("label"), f"unknown input '{stmt.label}'")
            elif isinstance(stmt, ExpectDecl) and not known_source(stmt.channel):
                self.error(number, *where.span("channel"), f"unknown channel '{stmt.channel}'")


@dataclass(frozen=True)
class _Located:
    """A statement's regex match and the indentation it was found at"""

    match: re.Match
    indent: int

    def span(self, group: Union[int, str]) -> Tuple[int, int]:
        if isinstance(group, int):
            return self.indent, self.indent + len(self.match.group(0))
        return self.indent + self.match.start(group), self.indent + self.match.end(group)


def parse(text: Union[str, bytes]) -> ParseResult:
    """Parses DSL source into a document, or diagnostics with spans"""
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    return _Parser(text).run()


def parse_document(text: Union[str, bytes]) -> DslDocument:
    """Like parse, but raises DslError on diagnostics"""
    result = parse(text)
    if not result.ok:
        raise DslError(result.diagnostics)
    return result.document
