"""
Limits

Effective limits of streams and sequences under a modulus of convergence,
reindexing by a modulus, and the conversions between metric moduli and
pseudonorm-indexed moduli.

A limit is certified when the samples at T(tau) and T(tau + 1) are
closer than 2^-tau.  This is consistent with T-convergence at the sampled
pair; it is not a proof of the Cauchy condition for all s, t >= T(tau).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from lgpac.models.base import DataValidationError
from lgpac.models.compiler import BoundNetwork
from lgpac.models.frechet import GridFunction, MetricConfig, PseudonormFamily, SpatialGrid, metric, pseudonorm
from lgpac.models.modulus import Modulus, ModulusFlavor, PseudonormModulus
from lgpac.simulator import SolverConfig, TimeGrid, default_solver_config, simulate

logger = logging.getLogger("flask.app")

Value = Union[float, GridFunction]


class SequenceTooShort(DataValidationError):
    """The sequence does not reach the index the modulus asks for"""


@dataclass(frozen=True)
class CertifiedLimit:
    """A limit value with its modulus bound and the measured gap between its two samples"""

    value: Value
    precision: float
    bound: float
    empirical_gap: float
    certified: bool
    sample_times: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.certified and not self.empirical_gap < self.bound:
            raise DataValidationError("A certified limit needs a sample gap below its bound")

    def serialize(self) -> dict:
        """Convert a limit into a dictionary"""
        value = self.value.serialize() if isinstance(self.value, GridFunction) else self.value
        return {
            "value": value,
            "precision": self.precision,
            "bound": self.bound,
            "empirical_gap": self.empirical_gap,
            "certified": self.certified,
            "sample_times": list(self.sample_times),
        }


def distance(a: Value, b: Value, family: Optional[PseudonormFamily], cfg: Optional[MetricConfig] = None) -> float:
    """Metric distance for grid functions, absolute difference for reals"""
    if isinstance(a, GridFunction):
        if family is None:
            raise DataValidationError("A pseudonorm family is needed to compare grid functions")
        return metric(a, b, family, cfg)
    return abs(float(a) - float(b))


def norm(a: Value, b: Value, n: int, family: Optional[PseudonormFamily]) -> float:
    """||a - b||_n for grid functions, absolute difference for reals"""
    if isinstance(a, GridFunction):
        return pseudonorm(a - b, n, family)
    return abs(float(a) - float(b))


######################################################################
#  S T R E A M   S O U R C E S
######################################################################
class StreamSource:
    """A stream that can be sampled at arbitrary times"""

    def __init__(self, sampler: Callable[[Sequence[float]], List[Value]], label: str = "stream"):
        self._sampler = sampler
        self.label = label

    def __repr__(self):
        return f"<StreamSource {self.label}>"

    @classmethod
    def from_function(cls, func: Callable[[float], Value], label: str = "function") -> "StreamSource":
        """A stream given by a function of t"""
        return cls(lambda times: [func(t) for t in times], label)

    @classmethod
    def from_simulation(cls, bound: BoundNetwork, channel: str, cfg: Optional[SolverConfig] = None) -> "SimulatedSource":
        """A stream read from a channel of a bound network"""
        return SimulatedSource(bound, channel, cfg)

    def sample(self, times: Sequence[float]) -> List[Value]:
        """Values at the given times"""
        return self._sampler(list(times))

    def at(self, t: float) -> Value:
        """Value at one time"""
        return self.sample([t])[0]

    def reindexed(self, modulus: Modulus) -> "StreamSource":
        """The stream tau -> u(T(tau))"""
        return StreamSource(lambda taus: self.sample([modulus(tau) for tau in taus]), f"{self.label} o {modulus.describe()}")


class SimulatedSource(StreamSource):
    """Simulates on demand and caches every sampled time"""

    def __init__(self, bound: BoundNetwork, channel: str, cfg: Optional[SolverConfig] = None):
        super().__init__(self._simulate, channel)
        if channel not in bound.system.channels:
            raise DataValidationError(f"unknown channel '{channel}'")
        self.bound = bound
        self.channel = channel
        self.cfg = cfg
        self.cache: Dict[float, Value] = {}
        self.runs = 0

    def _simulate(self, times: List[float]) -> List[Value]:
        missing = sorted({float(t) for t in times} - set(self.cache))
        if missing:
            tg = TimeGrid.covering(missing)
            cfg = self.cfg or default_solver_config(tg.t_end)
            traces = simulate(self.bound, tg, cfg)
            trace = traces[self.channel]
            for i, t in enumerate(trace.times):
                self.cache[float(t)] = trace.sample(i)
            self.runs += 1
        return [self.cache[float(t)] for t in times]

    def prefetch(self, times: Iterable[float]):
        """Runs one simulation covering all given times"""
        self.sample(list(times))


######################################################################
#  L I M I T S
######################################################################
def continuous_limit(source: StreamSource, modulus: Modulus, tau: float, family: Optional[PseudonormFamily] = None,
                     cfg: Optional[MetricConfig] = None) -> CertifiedLimit:
    """lim u(t) sampled at T(tau) and T(tau + 1); the value is u(T(tau + 1))"""
    if modulus.flavor != ModulusFlavor.CONTINUOUS:
        raise DataValidationError("continuous_limit needs a continuous modulus")
    if tau < 0:
        raise DataValidationError(f"tau must be nonnegative, got {tau}")
    t1, t2 = modulus(tau), modulus(tau + 1)
    first, second = source.sample([t1, t2])
    gap = distance(first, second, family, cfg)
    bound = 2.0**-tau
    certified = gap < bound
    logger.info("Limit of %s at tau=%s: samples at %s, %s gap=%.3e bound=%.3e certified=%s",
                source.label, tau, t1, t2, gap, bound, certified)
    return CertifiedLimit(second, float(tau), bound, gap, certified, (t1, t2))


def discrete_limit(seq: Union[Sequence[Value], Callable[[int], Value]], modulus: Modulus, nu: int,
                   family: Optional[PseudonormFamily] = None, cfg: Optional[MetricConfig] = None) -> CertifiedLimit:
    """lim g_n sampled at N(nu) and N(nu + 1)"""
    if modulus.flavor != ModulusFlavor.DISCRETE:
        raise DataValidationError("discrete_limit needs a discrete modulus")
    if nu < 0 or int(nu) != nu:
        raise DataValidationError(f"nu must be a nonnegative integer, got {nu}")
    n1, n2 = modulus(nu), modulus(nu + 1)
    if callable(seq):
        first, second = seq(n1), seq(n2)
    else:
        if n2 >= len(seq):
            raise SequenceTooShort(f"the sequence has {len(seq)} terms but index {n2} is needed")
        first, second = seq[n1], seq[n2]
    gap = distance(first, second, family, cfg)
    bound = 2.0**-nu
    certified = gap < bound
    logger.info("Discrete limit at nu=%s: indices %s, %s gap=%.3e certified=%s", nu, n1, n2, gap, certified)
    return CertifiedLimit(second, float(nu), bound, gap, certified, (float(n1), float(n2)))


@dataclass(frozen=True)
class ReindexedSequence(Sequence):
    """The sequence n -> g(N(n)), as long as N(n) stays inside g"""

    base: Sequence
    modulus: Modulus
    length: int = field(init=False)

    def __post_init__(self):
        length = 0
        while self.modulus(length) < len(self.base):
            length += 1
        object.__setattr__(self, "length", length)

    def __len__(self):
        return self.length

    def __getitem__(self, index):
        if isinstance(index, slice):
            return [self[i] for i in range(*index.indices(self.length))]
        if index < 0:
            index += self.length
        if not 0 <= index < self.length:
            raise IndexError(index)
        return self.base[self.modulus(index)]


def reindex_by_modulus(u, modulus: Modulus):
    """u o T for streams, g o N for sequences"""
    if isinstance(u, StreamSource):
        return u.reindexed(modulus)
    if isinstance(u, Sequence):
        return ReindexedSequence(u, modulus)
    if callable(u):
        return lambda arg: u(modulus(arg))
    raise DataValidationError(f"cannot reindex {type(u).__name__}")


def default_family(grid: SpatialGrid) -> PseudonormFamily:
    """Nested sup-norms starting at the first integer cutoff inside the domain"""
    return PseudonormFamily.nested(grid, start=max(1, math.ceil(grid.lower)))


def network_limits(bound: BoundNetwork, tau: float, family: Optional[PseudonormFamily] = None,
                   cfg: Optional[SolverConfig] = None) -> Dict[str, CertifiedLimit]:
    """Runs every limit module of a bound network at precision tau"""
    system = bound.system
    if not system.taps:
        raise DataValidationError(f"network '{system.network.name}' has no limit module")
    if family is None and system.grid is not None:
        family = default_family(system.grid)
    results = {}
    sources: Dict[str, SimulatedSource] = {}
    for tap in system.taps:
        source = sources.setdefault(tap.source, SimulatedSource(bound, tap.source, cfg))
        results[tap.module] = continuous_limit(source, tap.modulus, tau, family)
    return results


######################################################################
#  M O D U L U S   C O N V E R S I O N S
######################################################################
@dataclass(frozen=True)
class _Shifted:
    base: Modulus

    def __call__(self, n: int, arg: float) -> float:
        return self.base(n + arg)


@dataclass(frozen=True)
class _MaxOverSections:
    base: PseudonormModulus
    start: int = 1

    def __call__(self, arg: float) -> float:
        if self.base.flavor == ModulusFlavor.DISCRETE:
            top = int(arg) + 1
        else:
            top = math.floor(arg + 2)
        return max(self.base(n, arg + 1) for n in range(self.start, max(top, self.start) + 1))

    def describe(self) -> str:
        return f"max over sections of {self.base.description or 'pseudonorm modulus'}"


def metric_to_pseudonorm_modulus(m: Modulus) -> PseudonormModulus:
    """N~(n, nu) = N(n + nu), or T~(n, tau) = T(n + tau)"""
    return PseudonormModulus(m.flavor, _Shifted(m), f"shifted {m.describe()}")


def pseudonorm_to_metric_modulus(pm: PseudonormModulus, start: int = 1) -> Modulus:
    """N(nu) = max_{n <= nu+1} N~(n, nu+1), or T(tau) = max_{n <= tau+2} T~(n, tau+1)"""
    return Modulus(pm.flavor, _MaxOverSections(pm, start))


######################################################################
#  E M P I R I C A L   C H E C K S
######################################################################
@dataclass(frozen=True)
class CheckFailure:
    """A pair of sample times that violated the convergence contract"""

    index: Optional[int]
    arg: float
    first: float
    second: float
    measured: float
    bound: float


def _values_at(u, points: Sequence[float]) -> List[Value]:
    if isinstance(u, StreamSource):
        return u.sample(points)
    if callable(u):
        return [u(int(p)) for p in points]
    return [u[int(p)] for p in points]


def fc_check(u, pm: PseudonormModulus, family: Optional[PseudonormFamily], indices: Iterable[int],
             args: Iterable[float]) -> List[CheckFailure]:
    """Checks ||u(s) - u(t)||_n < 2^-arg at two sample pairs past N~(n, arg) for every lattice point"""
    failures = []
    for n in indices:
        for arg in args:
            start = pm(n, arg)
            later = (pm(n, arg + 1), 2 * start + 1)
            values = _values_at(u, [start, *later])
            for point, value in zip(later, values[1:]):
                measured = norm(values[0], value, n, family)
                if not measured < 2.0**-arg:
                    failures.append(CheckFailure(n, arg, start, point, measured, 2.0**-arg))
    return failures


def metric_check(u, modulus: Modulus, family: Optional[PseudonormFamily], args: Iterable[float],
                 cfg: Optional[MetricConfig] = None) -> List[CheckFailure]:
    """Checks d(u(s), u(t)) < 2^-arg at two sample pairs past T(arg)"""
    failures = []
    for arg in args:
        start = modulus(arg)
        later = (modulus(arg + 1), 2 * start + 1)
        values = _values_at(u, [start, *later])
        for point, value in zip(later, values[1:]):
            measured = distance(values[0], value, family, cfg)
            if not measured < 2.0**-arg:
                failures.append(CheckFailure(None, arg, start, point, measured, 2.0**-arg))
    return failures
