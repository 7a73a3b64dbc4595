"""
Models for moduli of convergence

A Modulus is a nondecreasing map prescribing how far along a stream (or a
sequence) one has to look for precision 2^-tau.  Rules come in four shapes:
linear, exponential in base two, tabulated, and generated by simulating a
network.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, Iterable, Optional, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator

from lgpac import config
from .base import DataValidationError
from .formula import format_number

logger = logging.getLogger("flask.app")

CONTINUOUS_SAMPLES = tuple(i / 2 for i in range(0, 41))
DISCRETE_SAMPLES = tuple(range(0, 31))


class ModulusFlavor(str, Enum):
    """Discrete moduli act on indices, continuous ones on times"""

    DISCRETE = "discrete"
    CONTINUOUS = "continuous"


######################################################################
#  R U L E S
######################################################################
@dataclass(frozen=True)
class Linear:
    """T(tau) = C * tau + offset"""

    C: float  # pylint: disable=invalid-name
    offset: float = 0.0

    def __call__(self, arg: float) -> float:
        return self.C * arg + self.offset

    def describe(self) -> str:
        text = f"linear {format_number(self.C)}"
        return f"{text} + {format_number(self.offset)}" if self.offset else text


@dataclass(frozen=True)
class Exponential:
    """T(tau) = C * 2^tau"""

    C: float  # pylint: disable=invalid-name

    def __call__(self, arg: float) -> float:
        return self.C * 2.0**arg

    def describe(self) -> str:
        return f"exp2 {format_number(self.C)}"


@dataclass(frozen=True)
class Tabulated:
    """Monotone cubic interpolation through (argument, value) pairs"""

    points: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        points = tuple((float(a), float(v)) for a, v in self.points)
        object.__setattr__(self, "points", points)
        if len(points) < 2:
            raise DataValidationError("A tabulated modulus needs at least two points")
        args = [a for a, _ in points]
        if any(b <= a for a, b in zip(args, args[1:])):
            raise DataValidationError("Tabulated modulus arguments must be strictly increasing")

    @cached_property
    def interpolant(self) -> PchipInterpolator:
        """The monotone cubic through the table"""
        args, values = zip(*self.points)
        return PchipInterpolator(np.asarray(args), np.asarray(values), extrapolate=False)

    def __call__(self, arg: float) -> float:
        low, high = self.points[0][0], self.points[-1][0]
        if not low <= arg <= high:
            raise DataValidationError(f"Argument {arg} outside the tabulated range [{low}, {high}]")
        return float(self.interpolant(arg))

    def describe(self) -> str:
        body = ", ".join(f"{format_number(a)}: {format_number(v)}" for a, v in self.points)
        return f"table [{body}]"


@dataclass(frozen=True, eq=False)
class NetworkGenerated:
    """A modulus read off a simulated network channel, then tabulated"""

    network: object
    channel: str
    horizon: float = 32.0
    samples: int = 513
    label: str = ""

    @cached_property
    def table(self) -> Tabulated:
        """Simulates the generating network once at high accuracy"""
        # pylint: disable=import-outside-toplevel
        from lgpac.models.compiler import proper_input_binding
        from lgpac.simulator import simulate, SolverConfig, TimeGrid

        logger.info("Tabulating network modulus %s up to %s", self.label or self.channel, self.horizon)
        bound = proper_input_binding(self.network, {})
        tol = config.NETWORK_MODULUS_TOL
        cfg = SolverConfig.adaptive(self.horizon, abs_tol=tol, rel_tol=tol)
        traces = simulate(bound, TimeGrid.uniform(self.horizon, self.samples), cfg)
        trace = traces[self.channel]
        return Tabulated(tuple(zip(trace.times, (float(v) for v in trace.values))))

    def __call__(self, arg: float) -> float:
        return self.table(arg)

    def describe(self) -> str:
        return self.label or f"network {self.channel}"


######################################################################
#  M O D U L U S
######################################################################
@dataclass(frozen=True)
class Modulus:
    """A discrete (N) or continuous (T) modulus of convergence"""

    flavor: ModulusFlavor
    rule: Callable[[float], float]
    checked: bool = field(default=True, compare=False)

    def __post_init__(self):
        if self.checked and not isinstance(self.rule, NetworkGenerated):
            self.check()

    @classmethod
    def continuous(cls, rule) -> "Modulus":
        """Shorthand for a continuous modulus"""
        return cls(ModulusFlavor.CONTINUOUS, rule)

    @classmethod
    def discrete(cls, rule) -> "Modulus":
        """Shorthand for a discrete modulus"""
        return cls(ModulusFlavor.DISCRETE, rule)

    @property
    def is_discrete(self) -> bool:
        """True for index-valued moduli"""
        return self.flavor == ModulusFlavor.DISCRETE

    def __call__(self, arg: float):
        if arg < 0:
            raise DataValidationError(f"Modulus argument must be nonnegative, got {arg}")
        if self.is_discrete:
            if int(arg) != arg:
                raise DataValidationError(f"Discrete modulus needs an integer argument, got {arg}")
            return int(math.ceil(round(self.rule(int(arg)), 9)))
        value = float(self.rule(arg))
        if value < 0:
            raise DataValidationError(f"Continuous modulus is negative at {arg}")
        return value

    def sample_arguments(self) -> Iterable[float]:
        """Arguments used when spot-checking monotonicity"""
        if isinstance(self.rule, Tabulated):
            args = [a for a, _ in self.rule.points if a >= 0]
            return [int(a) for a in args if int(a) == a] if self.is_discrete else args
        return DISCRETE_SAMPLES if self.is_discrete else CONTINUOUS_SAMPLES

    def check(self):
        """Raises DataValidationError when the rule decreases or goes negative on the sample"""
        values = [self(arg) for arg in self.sample_arguments()]
        if any(b < a for a, b in zip(values, values[1:])):
            raise DataValidationError(f"Modulus {self.describe()} is not nondecreasing")

    def is_nondecreasing(self) -> bool:
        """Spot check (exhaustive for tabulated rules)"""
        try:
            self.check()
        except DataValidationError:
            return False
        return True

    def describe(self) -> str:
        """DSL text of the rule"""
        prefix = "discrete " if self.is_discrete else ""
        return prefix + self.rule.describe()


######################################################################
#  P S E U D O N O R M   M O D U L U S
######################################################################
@dataclass(frozen=True)
class PseudonormModulus:
    """A modulus indexed by pseudonorm: N~(n, nu) or T~(n, tau)"""

    flavor: ModulusFlavor
    func: Callable[[int, float], float]
    description: str = ""

    def __call__(self, n: int, arg: float):
        if arg < 0:
            raise DataValidationError(f"Modulus argument must be nonnegative, got {arg}")
        value = self.func(n, arg)
        if self.flavor == ModulusFlavor.DISCRETE:
            return int(math.ceil(round(value, 9)))
        return float(value)

    def section(self, n: int) -> Modulus:
        """The ordinary modulus arg -> func(n, arg) for a fixed index"""
        return Modulus(self.flavor, _Section(self, n), checked=False)

    def sections_nondecreasing(self, indices: Iterable[int]) -> bool:
        """Spot-checks every section over the standard sample"""
        return all(self.section(n).is_nondecreasing() for n in indices)


@dataclass(frozen=True)
class _Section:
    parent: PseudonormModulus
    n: int

    def __call__(self, arg: float) -> float:
        return self.parent.func(self.n, arg)

    def describe(self) -> str:
        return f"section {self.n} of {self.parent.description or 'pseudonorm modulus'}"


def identity_modulus(flavor: ModulusFlavor = ModulusFlavor.CONTINUOUS, offset: Optional[float] = None) -> Modulus:
    """id, or id + offset"""
    return Modulus(flavor, Linear(1.0, offset or 0.0))
