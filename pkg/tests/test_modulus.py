"""
Test cases for moduli of convergence
"""

from unittest import TestCase

from lgpac.constructions import network_modulus
from lgpac.models.base import DataValidationError
from lgpac.models.modulus import (
    Exponential,
    Linear,
    Modulus,
    ModulusFlavor,
    PseudonormModulus,
    Tabulated,
    identity_modulus,
)


class TestModulus(TestCase):
    """Test Cases for Modulus"""

    def test_continuous_rules(self):
        """It should evaluate linear and exponential rules at real tau"""
        self.assertEqual(Modulus.continuous(Linear(1.0))(16), 16.0)
        self.assertEqual(Modulus.continuous(Exponential(3.0))(8), 768.0)
        self.assertAlmostEqual(Modulus.continuous(Exponential(3.0))(0.5), 3.0 * 2**0.5)

    def test_discrete_moduli_round_up(self):
        """It should give the least integer at or above the rule for integer nu"""
        modulus = Modulus.discrete(Linear(0.5))
        self.assertEqual(modulus(3), 2)
        self.assertEqual(modulus(4), 2)
        self.assertIsInstance(modulus(4), int)
        self.assertRaises(DataValidationError, modulus, 1.5)

    def test_negative_argument(self):
        """It should reject a negative precision"""
        self.assertRaises(DataValidationError, Modulus.continuous(Linear(1.0)), -1)

    def test_decreasing_rule(self):
        """It should refuse a rule that decreases"""
        self.assertRaises(DataValidationError, Modulus.continuous, Linear(-1.0, 100.0))
        unchecked = Modulus(ModulusFlavor.CONTINUOUS, Linear(-1.0, 100.0), checked=False)
        self.assertFalse(unchecked.is_nondecreasing())

    def test_describe(self):
        """It should describe the rule in the network language"""
        self.assertEqual(Modulus.continuous(Exponential(3.0)).describe(), "exp2 3")
        self.assertEqual(Modulus.continuous(Linear(1.0)).describe(), "linear 1")
        self.assertEqual(Modulus.discrete(Linear(2.0, 1.0)).describe(), "discrete linear 2 + 1")
        table = Tabulated(((0, 1), (1, 2.5)))
        self.assertEqual(Modulus.continuous(table).describe(), "table [0: 1, 1: 2.5]")

    def test_identity(self):
        """It should build the identity and its shifts"""
        self.assertEqual(identity_modulus()(7.5), 7.5)
        self.assertEqual(identity_modulus(ModulusFlavor.DISCRETE, 2)(3), 5)


class TestTabulated(TestCase):
    """Test Cases for tabulated rules"""

    def test_interpolates_monotonically(self):
        """It should hit the table and stay monotone between points"""
        table = Tabulated(((0, 1), (1, 2), (2, 8), (3, 9)))
        self.assertAlmostEqual(table(2.0), 8.0)
        values = [table(i / 10) for i in range(31)]
        self.assertEqual(values, sorted(values))

    def test_bad_tables(self):
        """It should reject short or unordered tables and out of range arguments"""
        self.assertRaises(DataValidationError, Tabulated, ((0, 1),))
        self.assertRaises(DataValidationError, Tabulated, ((1, 1), (0, 2)))
        self.assertRaises(DataValidationError, Tabulated(((0, 1), (1, 2))), 2.0)


class TestPseudonormModulus(TestCase):
    """Test Cases for moduli indexed by pseudonorm"""

    def test_sections(self):
        """It should fix the index and give an ordinary modulus"""
        pm = PseudonormModulus(ModulusFlavor.CONTINUOUS, lambda n, tau: n * (tau + 1), "n (tau + 1)")
        section = pm.section(3)
        self.assertEqual(section(1.0), 6.0)
        self.assertEqual(pm(2, 0.5), 3.0)
        self.assertTrue(pm.sections_nondecreasing(range(1, 6)))
        self.assertIn("section 3", section.describe())

    def test_decreasing_section(self):
        """It should notice a section that decreases"""
        pm = PseudonormModulus(ModulusFlavor.DISCRETE, lambda n, nu: (10 - nu) * n)
        self.assertFalse(pm.sections_nondecreasing([1]))
        self.assertRaises(DataValidationError, pm, 1, -1)


class TestNetworkModulus(TestCase):
    """Test Cases for moduli generated by a network"""

    def test_exp2_generator(self):
        """It should tabulate y' = ln 2 y from C to agree with C 2^tau"""
        modulus = network_modulus("exp2", 3.0, horizon=8.0)
        self.assertAlmostEqual(modulus(4.0) / 48.0, 1.0, places=5)
        self.assertEqual(modulus.describe(), "network exp2 3")

    def test_linear_generator(self):
        """It should tabulate y' = C to agree with C tau"""
        modulus = network_modulus("linear", 2.0)
        self.assertAlmostEqual(modulus(5.0), 10.0, places=5)
        self.assertTrue(modulus.is_nondecreasing())

    def test_unknown_generator(self):
        """It should reject an unknown generator"""
        self.assertRaises(DataValidationError, network_modulus, "cubic", 1.0)
