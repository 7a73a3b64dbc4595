"""
Test cases for limits, reindexing and modulus conversions
"""

import math
from unittest import TestCase

import numpy as np

from lgpac.constructions import build_gamma, build_inverter, gamma_grid
from lgpac.limits import (
    CertifiedLimit,
    SequenceTooShort,
    SimulatedSource,
    StreamSource,
    continuous_limit,
    default_family,
    discrete_limit,
    fc_check,
    metric_check,
    metric_to_pseudonorm_modulus,
    network_limits,
    pseudonorm_to_metric_modulus,
    reindex_by_modulus,
)
from lgpac.models.base import DataValidationError
from lgpac.models.compiler import StreamBinding, proper_input_binding
from lgpac.models.frechet import GridFunction, SpatialGrid
from lgpac.models.modulus import Linear, Modulus, ModulusFlavor, PseudonormModulus

GRID = SpatialGrid.uniform(1.0, 6.0, 0.5)


def decaying(t: float) -> GridFunction:
    """x e^-t, so ||u(s) - u(t)||_n = min(n, 6) |e^-s - e^-t|"""
    return GridFunction(GRID, GRID.array * math.exp(-t))


######################################################################
#  L I M I T S
######################################################################
class TestContinuousLimit(TestCase):
    """Test Cases for continuous_limit"""

    def test_certified_real_limit(self):
        """It should certify 2 + e^-t under T(tau) = tau + 1"""
        source = StreamSource.from_function(lambda t: 2 + math.exp(-t))
        limit = continuous_limit(source, Modulus.continuous(Linear(1.0, 1.0)), 10)
        self.assertTrue(limit.certified)
        self.assertEqual(limit.sample_times, (11.0, 12.0))
        self.assertAlmostEqual(limit.value, 2 + math.exp(-12))
        self.assertEqual(limit.bound, 2.0**-10)
        self.assertLess(abs(limit.value - 2), limit.bound)

    def test_slow_modulus(self):
        """It should report a modulus that is too slow for 1 / (1 + t)"""
        source = StreamSource.from_function(lambda t: 1 / (1 + t))
        limit = continuous_limit(source, Modulus.continuous(Linear(1.0)), 10)
        self.assertFalse(limit.certified)
        self.assertAlmostEqual(limit.empirical_gap, 1 / 132)
        self.assertFalse(limit.serialize()["certified"])

    def test_function_valued_limit(self):
        """It should measure the sample gap with the metric"""
        limit = continuous_limit(StreamSource.from_function(decaying), Modulus.continuous(Linear(1.0, 2.0)), 4,
                                 default_family(GRID))
        self.assertTrue(limit.certified)
        self.assertIsInstance(limit.value, GridFunction)
        self.assertEqual(limit.serialize()["value"]["values"][0], math.exp(-7))

    def test_bad_arguments(self):
        """It should need a continuous modulus, a nonnegative tau and a family for grid functions"""
        source = StreamSource.from_function(decaying)
        self.assertRaises(DataValidationError, continuous_limit, source, Modulus.discrete(Linear(1.0)), 1)
        self.assertRaises(DataValidationError, continuous_limit, source, Modulus.continuous(Linear(1.0)), -1)
        self.assertRaises(DataValidationError, continuous_limit, source, Modulus.continuous(Linear(1.0)), 1)

    def test_certified_needs_small_gap(self):
        """It should not build a certified limit whose gap exceeds its bound"""
        self.assertRaises(DataValidationError, CertifiedLimit, 1.0, 1.0, 0.5, 0.75, True)

    def test_certified_for_every_smaller_tau(self):
        """It should keep certifying 1 / (1 + t) at every tau below one that certifies"""
        source = StreamSource.from_function(lambda t: 1 / (1 + t))
        modulus = Modulus.continuous(Linear(1.0))
        certified = [continuous_limit(source, modulus, tau).certified for tau in np.arange(0.0, 12.25, 0.25)]
        self.assertEqual(certified, sorted(certified, reverse=True))
        self.assertEqual(sum(certified), 23)


class TestDiscreteLimit(TestCase):
    """Test Cases for discrete_limit"""

    def test_geometric_sequence(self):
        """It should certify 2^-n under N(nu) = nu + 1"""
        seq = [2.0**-n for n in range(40)]
        limit = discrete_limit(seq, Modulus.discrete(Linear(1.0, 1.0)), 5)
        self.assertTrue(limit.certified)
        self.assertEqual(limit.value, 2.0**-7)
        self.assertEqual(limit.sample_times, (6.0, 7.0))

    def test_callable_sequence(self):
        """It should sample a sequence given as a function of n"""
        limit = discrete_limit(lambda n: 1 / n, Modulus.discrete(Linear(1.0, 1.0)), 6)
        self.assertFalse(limit.certified)

    def test_short_sequence(self):
        """It should say when the sequence is too short for the modulus"""
        self.assertRaises(SequenceTooShort, discrete_limit, [1.0, 0.5], Modulus.discrete(Linear(1.0)), 3)
        self.assertRaises(DataValidationError, discrete_limit, [1.0], Modulus.continuous(Linear(1.0)), 0)
        self.assertRaises(DataValidationError, discrete_limit, [1.0], Modulus.discrete(Linear(1.0)), 0.5)


######################################################################
#  R E I N D E X I N G
######################################################################
class TestReindex(TestCase):
    """Test Cases for reindex_by_modulus"""

    def test_sequences(self):
        """It should keep every term whose reindexed position exists"""
        seq = reindex_by_modulus(list(range(10)), Modulus.discrete(Linear(2.0)))
        self.assertEqual(len(seq), 5)
        self.assertEqual(list(seq), [0, 2, 4, 6, 8])
        self.assertEqual(seq[-1], 8)
        self.assertEqual(seq[1:3], [2, 4])
        with self.assertRaises(IndexError):
            seq[5]  # pylint: disable=pointless-statement

    def test_streams_and_functions(self):
        """It should compose streams and functions with the modulus"""
        modulus = Modulus.continuous(Linear(2.0))
        stream = reindex_by_modulus(StreamSource.from_function(lambda t: t + 1), modulus)
        self.assertEqual(stream.at(3.0), 7.0)
        func = reindex_by_modulus(lambda n: n * n, Modulus.discrete(Linear(2.0)))
        self.assertEqual(func(3), 36)
        self.assertRaises(DataValidationError, reindex_by_modulus, 42, modulus)


######################################################################
#  N E T W O R K   L I M I T S
######################################################################
class TestNetworkLimits(TestCase):
    """Test Cases for network_limits and simulated sources"""

    def test_gamma_at_low_precision(self):
        """It should certify Gamma at tau = 2 and land near (x - 1)!"""
        network, _ = build_gamma()
        bound = proper_input_binding(network, {}, gamma_grid())
        limits = network_limits(bound, 2)
        limit = limits["Gamma"]
        self.assertTrue(limit.certified)
        self.assertEqual(limit.sample_times, (12.0, 24.0))
        self.assertLess(abs(limit.value.at(2.0) - 1.0), 0.1)
        self.assertLess(abs(limit.value.at(4.0) - 6.0), 0.1)

    def test_no_limit_module(self):
        """It should refuse a network without limit modules"""
        bound = proper_input_binding(build_inverter(), {"k": 1.0, "b": StreamBinding("t", "1")})
        self.assertRaises(DataValidationError, network_limits, bound, 1)

    def test_simulated_source_caches(self):
        """It should simulate once for prefetched times"""
        bound = proper_input_binding(build_inverter(), {"k": 1.0, "b": StreamBinding("t", "1")})
        source = SimulatedSource(bound, "a")
        source.prefetch([1.0, 3.0])
        self.assertAlmostEqual(source.at(3.0), 0.25, places=7)
        self.assertAlmostEqual(source.at(1.0), 0.5, places=7)
        self.assertEqual(source.runs, 1)
        self.assertRaises(DataValidationError, SimulatedSource, bound, "nothing")


######################################################################
#  M O D U L U S   C O N V E R S I O N S
######################################################################
class TestModulusConversions(TestCase):
    """Test Cases for moving between metric and pseudonorm moduli"""

    def setUp(self):
        self.family = default_family(GRID)
        self.source = StreamSource.from_function(decaying)

    def test_metric_to_pseudonorm(self):
        """It should shift the metric modulus by the index"""
        pm = metric_to_pseudonorm_modulus(Modulus.continuous(Linear(1.0, 2.0)))
        self.assertEqual(pm(3, 1.5), 6.5)
        self.assertEqual(fc_check(self.source, pm, self.family, range(1, 7), range(0, 11)), [])
        self.assertEqual(metric_check(self.source, Modulus.continuous(Linear(1.0, 2.0)), self.family, range(0, 11)), [])

    def test_pseudonorm_to_metric(self):
        """It should take the max over sections up to the argument"""
        pm = PseudonormModulus(ModulusFlavor.CONTINUOUS, lambda n, tau: tau + n + 3, "tau + n + 3")
        modulus = pseudonorm_to_metric_modulus(pm)
        # max over n <= 2 of 1 + n + 3
        self.assertEqual(modulus(0), 6.0)
        self.assertEqual(modulus(1.5), 8.5)
        self.assertTrue(modulus.is_nondecreasing())
        self.assertEqual(fc_check(self.source, pm, self.family, range(1, 7), range(0, 11)), [])
        self.assertEqual(metric_check(self.source, modulus, self.family, range(0, 11)), [])

    def test_discrete_conversion(self):
        """It should convert discrete moduli over integer arguments"""
        pm = PseudonormModulus(ModulusFlavor.DISCRETE, lambda n, nu: nu + n)
        modulus = pseudonorm_to_metric_modulus(pm)
        self.assertEqual(modulus(0), 2)
        self.assertEqual(modulus(2), 6)

    def test_discrete_sequences(self):
        """It should carry a discrete modulus of x 2^-k through both conversions"""
        def seq(k):
            return GridFunction(GRID, GRID.array * 2.0**-k)

        modulus = Modulus.discrete(Linear(1.0, 4.0))
        self.assertEqual(metric_check(seq, modulus, self.family, range(0, 11)), [])
        pm = metric_to_pseudonorm_modulus(modulus)
        self.assertEqual(pm(6, 10), 20)
        self.assertEqual(fc_check(seq, pm, self.family, range(1, 7), range(0, 11)), [])
        back = pseudonorm_to_metric_modulus(pm)
        self.assertEqual(back(0), 6)
        self.assertEqual(back(10), 26)
        self.assertEqual(metric_check(seq, back, self.family, range(0, 11)), [])

    def test_failures_are_reported(self):
        """It should list every sample pair that breaks the bound"""
        pm = PseudonormModulus(ModulusFlavor.CONTINUOUS, lambda n, tau: 0.0)
        failures = fc_check(self.source, pm, self.family, [1, 2], [1, 2])
        self.assertEqual(len(failures), 4)
        self.assertEqual({f.second for f in failures}, {1.0})
        lazy = Modulus(ModulusFlavor.CONTINUOUS, Linear(0.0), checked=False)
        self.assertEqual(len(metric_check(self.source, lazy, self.family, [1, 2])), 2)
