"""
Test cases for the .lgpac language
"""

import random
from pathlib import Path
from unittest import TestCase

from lgpac.constructions import build_inverter, catalog_names, construction
from lgpac.dsl import (
    DslDocument,
    DslError,
    construction_document,
    from_network,
    grid_text,
    parse,
    parse_document,
    parse_modulus,
    print_document,
    to_bindings,
    to_network,
)
from lgpac.dsl.document import InputDecl, ModuleDecl, SimulateDecl
from lgpac.models.base import DataValidationError
from lgpac.models.compiler import StreamBinding, compile_network
from lgpac.models.frechet import SpatialGrid
from lgpac.models.network import ChannelKind, ModuleKind, Space

NETWORKS = Path(__file__).resolve().parent.parent / "lgpac" / "static" / "networks"

INVERTER = (NETWORKS / "inverter.lgpac").read_text(encoding="utf-8")


def _assert_spans_inside(case: TestCase, data, result):
    text = data.decode("utf-8", errors="replace") if isinstance(data, bytes) else data
    lines = text.split("\n")
    for diagnostic in result.diagnostics:
        span = diagnostic.span
        case.assertTrue(1 <= span.line <= len(lines), (data, diagnostic))
        case.assertTrue(0 <= span.start <= span.end <= len(lines[span.line - 1]), (data, diagnostic))


######################################################################
#  P A R S I N G
######################################################################
class TestParse(TestCase):
    """Test Cases for parse and parse_document"""

    def test_inverter(self):
        """It should parse the inverter into statements in source order"""
        doc = parse_document(INVERTER)
        self.assertEqual(doc.name, "inverter")
        self.assertEqual(doc.inputs[0], InputDecl("k", ChannelKind.R_SCALAR))
        self.assertEqual(doc.modules[-1].ports, (("c", "k"), ("u", "a_neg"), ("v", "b")))
        self.assertEqual(doc.simulate, SimulateDecl(10.0))
        self.assertEqual(len(doc.expectations), 1)
        self.assertIsNone(doc.grid)
        self.assertIsNone(doc.precision)

    def test_comments_and_blank_lines(self):
        """It should skip comments and blank lines"""
        result = parse("# nothing here\n\n   # indented comment\n")
        self.assertTrue(result.ok)
        self.assertEqual(result.document, DslDocument())
        self.assertEqual(print_document(result.document), "")

    def test_explicit_wires(self):
        """It should accept wire statements and port blocks side by side"""
        doc = parse_document("time t\nadder s { in1 = t }\nwire t -> s.in2\noutput s\n")
        net = to_network(doc)
        self.assertEqual(net.incoming("s"), {"in1": "t", "in2": "t"})

    def test_underived_input(self):
        """It should read and print the underived flag"""
        text = "input b : RStream underived\n"
        doc = parse_document(text)
        self.assertFalse(doc.inputs[0].derivative)
        self.assertEqual(print_document(doc), text)

    def test_unknown_module(self):
        """It should point at the module name of a bad wire"""
        result = parse("time t\nwire t -> b.in1\n")
        self.assertFalse(result.ok)
        self.assertEqual(len(result.diagnostics), 1)
        diagnostic = result.diagnostics[0]
        self.assertEqual(diagnostic.message, "unknown module 'b'")
        self.assertEqual((diagnostic.span.line, diagnostic.span.start, diagnostic.span.end), (2, 10, 11))
        self.assertEqual(str(diagnostic), "2:11: error: unknown module 'b'")

    def test_every_problem_is_reported(self):
        """It should carry on after a bad line and report every problem"""
        text = "\n".join([
            "frobnicate x",
            "const c = 1 +",
            "adder s { in3 = t }",
            "limit L using T { in = c }",
            "output c",
            "output c",
            "input q : Stream",
            "simulate 1 samples 1",
        ])
        result = parse(text)
        messages = [d.message for d in result.diagnostics]
        self.assertEqual(result.diagnostics[0].span.line, 1)
        self.assertIn("unknown statement 'frobnicate'", messages)
        self.assertIn("adder has no port 'in3'", messages)
        self.assertIn("unknown modulus 'T'", messages)
        self.assertIn("duplicate output 'c'", messages)
        self.assertIn("unknown channel kind 'Stream'", messages)
        self.assertIn("at least two samples are needed", messages)
        self.assertTrue(any(d.span.line == 2 and "expected" in d.message for d in result.diagnostics))
        _assert_spans_inside(self, text, result)

    def test_duplicates_and_references(self):
        """It should report duplicate names and unknown references"""
        result = parse("time t\nconst t = 1\nbind z = 1\nexpect w = t\n")
        messages = [d.message for d in result.diagnostics]
        self.assertEqual(messages, ["duplicate name 't'", "unknown input 'z'", "unknown channel 'w'"])

    def test_parse_document_raises(self):
        """It should raise DslError carrying the diagnostics"""
        with self.assertRaises(DslError) as context:
            parse_document("time\n")
        self.assertEqual(len(context.exception.diagnostics), 1)
        self.assertIn("malformed time statement", str(context.exception))

    def test_bytes(self):
        """It should decode bytes and never raise on bad UTF-8"""
        result = parse(b"time t\n\xff\xfe\n")
        self.assertFalse(result.ok)
        self.assertEqual(result.diagnostics[0].span.line, 2)

    def test_fuzz_random_bytes(self):
        """It should turn any byte string into a document or diagnostics inside the source"""
        rng = random.Random(2024)
        alphabet = b"abcdefghijklmnopqrstuvwxyz_0123456789 .,;:=+-*/^(){}[]#->\n\t\xff"
        for _ in range(10_000):
            size = rng.randint(0, 60)
            if rng.random() < 0.5:
                data = bytes(rng.randrange(256) for _ in range(size))
            else:
                data = bytes(rng.choice(alphabet) for _ in range(size))
            _assert_spans_inside(self, data, parse(data))

    def test_fuzz_mutated_sources(self):
        """It should keep diagnostics inside the source for mutated networks"""
        rng = random.Random(7)
        sources = [(NETWORKS / f"{name}.lgpac").read_text(encoding="utf-8") for name in ("inverter", "zeta_step4", "gamma")]
        pieces = ["", " ", "#", "{", "}", ";", "=", "..", "in x", "-", "1e3", "(", "\n", "underived", "->"]
        for _ in range(2_000):
            text = list(rng.choice(sources))
            for _ in range(rng.randint(1, 4)):
                position = rng.randrange(len(text))
                text[position:position + rng.randint(0, 3)] = rng.choice(pieces)
            source = "".join(text)
            _assert_spans_inside(self, source, parse(source))


######################################################################
#  M O D U L I   A N D   G R I D S
######################################################################
class TestModulusAndGridText(TestCase):
    """Test Cases for modulus rules and grid declarations"""

    def test_parse_modulus(self):
        """It should read every rule shape and print it back"""
        for text in ("linear 1", "exp2 3", "discrete linear 2 + 1", "table [0: 1, 2: 5]"):
            self.assertEqual(parse_modulus(text).describe(), text)
        self.assertEqual(parse_modulus("linear 2.50").describe(), "linear 2.5")
        self.assertEqual(parse_modulus("exp2 3")(2), 12.0)

    def test_bad_modulus(self):
        """It should reject unknown and malformed rules"""
        self.assertRaises(DataValidationError, parse_modulus, "cubic 2")
        self.assertRaises(DataValidationError, parse_modulus, "table [0: 1, two]")
        self.assertRaises(DataValidationError, parse_modulus, "discrete network exp2 3")
        result = parse("modulus T = linear -1 + 5\n")
        self.assertIn("not nondecreasing", result.diagnostics[0].message)

    def test_grid_text(self):
        """It should print uniform grids with a step and others with points"""
        self.assertEqual(grid_text(SpatialGrid.uniform(1.0, 6.0, 0.25)), "1 .. 6 step 0.25")
        unbounded = SpatialGrid(1.0, float("inf"), (1.0, 2.0, 4.0))
        self.assertEqual(grid_text(unbounded), "1 .. inf points 1, 2, 4")
        doc = parse_document(f"grid {grid_text(unbounded)}\n")
        self.assertEqual(doc.grid, unbounded)

    def test_bad_grids(self):
        """It should reject grids that are too fine or unbounded with a step"""
        for text in ("grid 0 .. 1 step 0.0000001", "grid 0 .. inf step 1", "grid 0 .. 1 points 0, x", "grid 2 .. 1 step 1"):
            result = parse(text)
            self.assertFalse(result.ok, text)
            _assert_spans_inside(self, text, result)


######################################################################
#  C O N V E R S I O N S
######################################################################
class TestConvert(TestCase):
    """Test Cases for converting between documents, networks and the catalog"""

    def test_shipped_files_match_the_catalog(self):
        """It should ship one canonical file per construction"""
        for name in catalog_names():
            text = (NETWORKS / f"{name}.lgpac").read_text(encoding="utf-8")
            doc = parse_document(text)
            self.assertEqual(doc, construction_document(construction(name)), name)
            self.assertEqual(print_document(doc), text, name)

    def test_inverter_round_trip(self):
        """It should compile a parsed network like the built one"""
        doc = parse_document(INVERTER)
        net = to_network(doc)
        self.assertEqual(compile_network(net).serialize(), compile_network(build_inverter()).serialize())
        bindings = to_bindings(doc, net)
        self.assertIsInstance(bindings["b"], StreamBinding)
        self.assertNotIsInstance(bindings["k"], StreamBinding)

    def test_from_network(self):
        """It should write wires as port blocks in port order"""
        doc = from_network(build_inverter())
        integrator = [s for s in doc.statements if isinstance(s, ModuleDecl) and s.kind == ModuleKind.INTEGRATOR][0]
        self.assertEqual(integrator, ModuleDecl("a", ModuleKind.INTEGRATOR, Space.R, ports=(("c", "k"), ("u", "a_neg"),
                                                                                          ("v", "b"))))
        self.assertTrue(print_document(doc).startswith("network inverter\ninput k : RScalar\n"))
        self.assertEqual(parse_document(print_document(doc)), doc)

    def test_unnamed_document(self):
        """It should give an unnamed document a default network name"""
        self.assertEqual(to_network(parse_document("time t\noutput t\n")).name, "network")
