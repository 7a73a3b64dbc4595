"""
Test cases for closed-form formulas
"""

import math
from unittest import TestCase

import numpy as np

from lgpac.models.formula import (
    BinOp,
    FormulaError,
    Name,
    Neg,
    Num,
    evaluate,
    format_number,
    parse_formula,
    to_text,
    variables,
)


######################################################################
#  P A R S I N G
######################################################################
class TestParseFormula(TestCase):
    """Test Cases for the formula parser"""

    def test_precedence(self):
        """It should bind powers tighter than products and products tighter than sums"""
        node = parse_formula("1 + 2 * t^2")
        self.assertEqual(node, BinOp("+", Num(1.0), BinOp("*", Num(2.0), BinOp("^", Name("t"), Num(2.0)))))

    def test_unary_minus_binds_looser_than_power(self):
        """It should read -2^x as -(2^x)"""
        self.assertEqual(parse_formula("-2^x"), Neg(BinOp("^", Num(2.0), Name("x"))))
        self.assertEqual(parse_formula("(-2)^x"), BinOp("^", Neg(Num(2.0)), Name("x")))

    def test_power_is_right_associative(self):
        """It should read 2^3^2 as 2^(3^2)"""
        self.assertEqual(evaluate(parse_formula("2^3^2"), {}), 512.0)

    def test_errors_carry_offsets(self):
        """It should report where a formula goes wrong"""
        cases = {"1 + ": 4, "foo(t)": 0, "1 $ 2": 2, "(1 + t": 6, "": 0, "1 2": 2}
        for text, offset in cases.items():
            with self.assertRaises(FormulaError) as context:
                parse_formula(text)
            self.assertEqual(context.exception.offset, offset, text)

    def test_variables(self):
        """It should list the free variables"""
        self.assertEqual(variables(parse_formula("sin(x * atan(t)) + pi")), frozenset({"t", "x"}))
        self.assertEqual(variables(parse_formula("exp(-1)")), frozenset())


######################################################################
#  E V A L U A T I O N
######################################################################
class TestEvaluate(TestCase):
    """Test Cases for evaluating formulas"""

    def test_scalar(self):
        """It should evaluate with named constants and functions"""
        self.assertAlmostEqual(evaluate(parse_formula("1 / (exp(pi * t) + 1)"), {"t": 0.0}), 0.5)
        self.assertAlmostEqual(evaluate(parse_formula("atan(1) * 4"), {}), math.pi)
        self.assertAlmostEqual(evaluate(parse_formula("sqrt(e^2)"), {}), math.e)

    def test_vectorized(self):
        """It should broadcast over an array of x"""
        xs = np.array([2.0, 3.0, 4.0])
        got = evaluate(parse_formula("2^(x - 1) / (x - 1)"), {"x": xs, "t": 0.0})
        np.testing.assert_allclose(got, [2.0, 2.0, 8.0 / 3.0])

    def test_missing_variable(self):
        """It should refuse to evaluate x where only t is available"""
        self.assertRaises(FormulaError, evaluate, parse_formula("x + t"), {"t": 1.0})


######################################################################
#  P R I N T I N G
######################################################################
class TestToText(TestCase):
    """Test Cases for canonical formula text"""

    def test_canonical_text(self):
        """It should print with spaced operators and minimal parentheses"""
        cases = {
            "1/(1+t)": "1 / (1 + t)",
            "2^(x-1)/(x-1)": "2^(x - 1) / (x - 1)",
            "-(2^x)": "-2^x",
            "(1+t^2)^(-x/2)": "(1 + t^2)^(-x / 2)",
            "-(x+x*t+t)/(1+t)^2": "-(x + x * t + t) / (1 + t)^2",
            "sin(x*atan(t))": "sin(x * atan(t))",
            "t - (1 - t)": "t - (1 - t)",
            "(t - 1) - t": "t - 1 - t",
        }
        for text, expected in cases.items():
            self.assertEqual(to_text(parse_formula(text)), expected)

    def test_text_reads_back(self):
        """It should print text that parses to the same formula"""
        for text in ("(-2)^x", "-(-t)", "2^-x", "t / (2 * t)", "1e-5 * t", "0.1 + 1/3"):
            node = parse_formula(text)
            self.assertEqual(parse_formula(to_text(node)), node, text)

    def test_format_number(self):
        """It should print the shortest float text and drop a trailing .0"""
        self.assertEqual(format_number(1.0), "1")
        self.assertEqual(format_number(-2.0), "-2")
        self.assertEqual(format_number(0.25), "0.25")
        self.assertEqual(float(format_number(1 / 3)), 1 / 3)
