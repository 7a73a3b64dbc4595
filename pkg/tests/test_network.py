"""
Test cases for networks and their validation
"""

from unittest import TestCase

from lgpac.constructions import build_inverter, build_zeta
from lgpac.models.base import DataValidationError
from lgpac.models.modulus import Linear, Modulus
from lgpac.models.network import (
    ChannelKind,
    ModuleKind,
    NetworkBuilder,
    Severity,
    Space,
    accepts,
    algebraic_cycles,
    validate,
)


def _chain() -> NetworkBuilder:
    """t -> double -> out with everything wired"""
    nb = NetworkBuilder("chain")
    nb.time("t")
    nb.constant("two", 2.0)
    nb.multiplier("double", in1="two", in2="t")
    nb.output("out", "double")
    return nb


######################################################################
#  C H A N N E L   K I N D S
######################################################################
class TestChannelKinds(TestCase):
    """Test Cases for port and channel kinds"""

    def test_promotions(self):
        """It should let scalars drive streams and reals drive functions, never the reverse"""
        self.assertTrue(accepts(ChannelKind.R_STREAM, ChannelKind.R_SCALAR))
        self.assertTrue(accepts(ChannelKind.X_STREAM, ChannelKind.R_SCALAR))
        self.assertTrue(accepts(ChannelKind.X_STREAM, ChannelKind.X_SCALAR))
        self.assertTrue(accepts(ChannelKind.X_SCALAR, ChannelKind.R_SCALAR))
        self.assertFalse(accepts(ChannelKind.R_STREAM, ChannelKind.X_SCALAR))
        self.assertFalse(accepts(ChannelKind.R_SCALAR, ChannelKind.R_STREAM))
        self.assertFalse(accepts(ChannelKind.X_STREAM, ChannelKind.R_STREAM))

    def test_port_kinds(self):
        """It should give integrator initial values a scalar port"""
        net = build_inverter()
        self.assertEqual(net.module("a").port_kind("c"), ChannelKind.R_SCALAR)
        self.assertEqual(net.module("a").port_kind("v"), ChannelKind.R_STREAM)
        self.assertRaises(DataValidationError, net.module("a").port_kind, "in1")
        self.assertEqual(net.module("minus_one").output_kind, ChannelKind.R_SCALAR)


######################################################################
#  N E T W O R K S
######################################################################
class TestNetwork(TestCase):
    """Test Cases for the Network model"""

    def test_builder(self):
        """It should build modules, wires and outputs"""
        net = _chain().build()
        self.assertEqual(len(net.modules), 3)
        self.assertEqual(net.incoming("double"), {"in1": "two", "in2": "t"})
        self.assertEqual(net.module("double").kind, ModuleKind.MULTIPLIER)
        self.assertRaises(DataValidationError, net.module, "nothing")
        self.assertIn("chain", repr(net))

    def test_unknown_port(self):
        """It should refuse a port the module does not have"""
        nb = NetworkBuilder("bad")
        self.assertRaises(DataValidationError, nb.adder, "sum", in3="t")

    def test_implicit_inputs(self):
        """It should turn unconnected ports into labelled proper inputs"""
        nb = NetworkBuilder("open")
        nb.time("t")
        nb.adder("sum", in1="t")
        nb.output("sum")
        net = nb.build()
        implicit = net.implicit_inputs()
        self.assertEqual([spec.label for spec in implicit], ["sum.in2"])
        self.assertEqual(implicit[0].kind, ChannelKind.R_STREAM)
        report = validate(net)
        self.assertTrue(report.ok)
        self.assertEqual(report.violations[0].severity, Severity.INFO)

    def test_channel_roles(self):
        """It should split channels into inputs, mixed channels and outputs"""
        net = build_inverter()
        roles = net.channel_roles()
        self.assertEqual(roles["inputs"], ["k", "b"])
        self.assertEqual(roles["outputs"], ["a"])
        self.assertIn("a", roles["mixed"])
        self.assertIn("a_sq", roles["mixed"])
        channels = {channel.source: channel for channel in net.channels()}
        self.assertEqual(channels["b"].sinks, ("a.v",))
        self.assertEqual(channels["k"].kind, ChannelKind.R_SCALAR)


######################################################################
#  V A L I D A T I O N
######################################################################
class TestValidate(TestCase):
    """Test Cases for network validation"""

    def test_valid_network(self):
        """It should accept a well wired network"""
        report = validate(_chain().build())
        self.assertTrue(report.ok)
        self.assertEqual(report.serialize()["valid"], True)
        self.assertIn("syntactically", report.serialize()["note"])

    def test_dangling_source(self):
        """It should report a wire from nowhere"""
        nb = _chain()
        nb.multiplier("ghost", in1="missing", in2="t")
        report = validate(nb.build())
        self.assertIn("dangling-source", report.codes())

    def test_unknown_module(self):
        """It should report a wire into a missing module"""
        nb = _chain()
        nb.wire("t", "b", "in1")
        report = validate(nb.build())
        self.assertEqual(report.codes(), ["unknown-module"])
        self.assertEqual(report.errors[0].message, "unknown module 'b'")

    def test_multiply_driven(self):
        """It should report a port with two drivers"""
        nb = _chain()
        nb.wire("t", "double", "in1")
        self.assertIn("multiply-driven", validate(nb.build()).codes())

    def test_duplicate_names(self):
        """It should report two modules with one name"""
        nb = _chain()
        nb.constant("two", 3.0)
        self.assertIn("duplicate-name", validate(nb.build()).codes())

    def test_kind_mismatch(self):
        """It should report a function-valued channel driving a real port"""
        nb = NetworkBuilder("mixed")
        nb.time("t")
        nb.time("tx", Space.X)
        nb.adder("sum", in1="t", in2="tx")
        nb.constant("bad", "t")
        report = validate(nb.build())
        self.assertEqual(report.codes(), ["kind-mismatch", "kind-mismatch"])

    def test_algebraic_cycle(self):
        """It should report a loop that passes through no integrator"""
        nb = NetworkBuilder("loop")
        nb.time("t")
        nb.adder("p", in1="t", in2="q")
        nb.adder("q", in1="p", in2="t")
        net = nb.build()
        self.assertEqual(algebraic_cycles(net), [["p", "q"]])
        self.assertIn("algebraic-cycle", validate(net).codes())

    def test_integrator_breaks_cycles(self):
        """It should accept feedback through an integrator"""
        net = build_inverter()
        self.assertEqual(algebraic_cycles(net), [])
        self.assertTrue(validate(net).ok)

    def test_limit_feeds_outputs_only(self):
        """It should report a limit output wired back into the network"""
        nb = NetworkBuilder("feedback")
        nb.time("t")
        nb.limit("L", Modulus.continuous(Linear(1.0)), **{"in": "t"})
        nb.adder("after", in1="L", in2="t")
        self.assertIn("limit-feedback", validate(nb.build()).codes())

    def test_discrete_limit_modulus(self):
        """It should require a continuous modulus on a limit module"""
        nb = NetworkBuilder("discrete")
        nb.time("t")
        nb.limit("L", Modulus.discrete(Linear(1.0)), **{"in": "t"})
        nb.output("L")
        self.assertIn("discrete-modulus", validate(nb.build()).codes())

    def test_zeta_validates(self):
        """It should accept the zeta network"""
        net, _ = build_zeta()
        report = validate(net)
        self.assertTrue(report.ok, report.codes())
