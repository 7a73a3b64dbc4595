"""
Models for the function space C(Omega, R) sampled on a spatial grid

A GridFunction is an element of the space, a PseudonormFamily gives the
nested sup-norms ||g||_n = max |g(x)| over grid points x <= cutoff(n), and
the metric d(f, g) = sum w_n min(||f - g||_n, 1) is built from them.
"""

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from lgpac import config
from .base import SerializableBase, DataValidationError

logger = logging.getLogger("flask.app")


class GridMismatchError(DataValidationError):
    """Raised when two grid functions do not share a grid"""


class PseudonormIndexError(DataValidationError):
    """Raised when a pseudonorm index is outside the family"""


def _encode_bound(value: float):
    return "inf" if math.isinf(value) else value


def _decode_bound(value) -> float:
    return math.inf if value in ("inf", "+inf", None) else float(value)


######################################################################
#  S P A T I A L   G R I D
######################################################################
@dataclass(frozen=True)
class SpatialGrid(SerializableBase):
    """The sampled domain Omega = [lower, upper]; upper may be infinite"""

    lower: float
    upper: float
    points: Tuple[float, ...]

    def __post_init__(self):
        points = tuple(float(p) for p in self.points)
        object.__setattr__(self, "points", points)
        if not points:
            raise DataValidationError("A spatial grid needs at least one point")
        if not all(math.isfinite(p) for p in points):
            raise DataValidationError("Grid points must be finite")
        if any(b <= a for a, b in zip(points, points[1:])):
            raise DataValidationError("Grid points must be strictly increasing")
        if points[0] < self.lower:
            raise DataValidationError(f"First grid point {points[0]} lies below the domain start {self.lower}")
        if math.isfinite(self.upper) and points[-1] > self.upper:
            raise DataValidationError(f"Last grid point {points[-1]} lies above the domain end {self.upper}")

    @classmethod
    def uniform(cls, lower: float, upper: float, step: float, domain_upper: Optional[float] = None) -> "SpatialGrid":
        """Creates an evenly spaced grid from lower to upper (inclusive)"""
        if step <= 0 or upper < lower:
            raise DataValidationError(f"Invalid uniform grid [{lower}, {upper}] step {step}")
        count = int(round((upper - lower) / step)) + 1
        points = [lower + i * step for i in range(count)]
        return cls(lower, upper if domain_upper is None else domain_upper, tuple(points))

    @property
    def size(self) -> int:
        """Number of sample points"""
        return len(self.points)

    @cached_property
    def array(self) -> np.ndarray:
        """The sample points as a read-only numpy array"""
        values = np.asarray(self.points, dtype=float)
        values.setflags(write=False)
        return values

    def serialize(self) -> dict:
        return {"lower": self.lower, "upper": _encode_bound(self.upper), "points": list(self.points)}

    @classmethod
    def deserialize(cls, data: dict) -> "SpatialGrid":
        try:
            return cls(float(data["lower"]), _decode_bound(data["upper"]), tuple(data["points"]))
        except (KeyError, TypeError, ValueError) as error:
            raise DataValidationError(f"Invalid grid: {error}") from error


######################################################################
#  G R I D   F U N C T I O N
######################################################################
@dataclass(frozen=True, eq=False)
class GridFunction(SerializableBase):
    """An element of C(Omega, R) given by its samples on a grid"""

    grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.size != self.grid.size:
            raise DataValidationError(f"Expected {self.grid.size} values, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise DataValidationError("Grid function values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __repr__(self):
        return f"<GridFunction on {self.grid.size} points [{self.grid.points[0]}..{self.grid.points[-1]}]>"

    @classmethod
    def from_callable(cls, grid: SpatialGrid, func: Callable) -> "GridFunction":
        """Samples a vectorized function of x on the grid"""
        values = np.broadcast_to(np.asarray(func(grid.array), dtype=float), (grid.size,))
        return cls(grid, values)

    @classmethod
    def constant(cls, grid: SpatialGrid, value: float) -> "GridFunction":
        """The constant function x -> value"""
        return cls(grid, np.full(grid.size, float(value)))

    def _check_grid(self, other: "GridFunction"):
        if self.grid != other.grid:
            raise GridMismatchError("Grid functions are sampled on different grids")

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check_grid(other)
        return GridFunction(self.grid, self.values - other.values)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check_grid(other)
        return GridFunction(self.grid, self.values + other.values)

    def __eq__(self, other):
        if not isinstance(other, GridFunction):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    __hash__ = None

    def at(self, x: float) -> float:
        """The sample at grid point x"""
        index = int(np.searchsorted(self.grid.array, x))
        if index >= self.grid.size or self.grid.points[index] != x:
            raise DataValidationError(f"{x} is not a grid point")
        return float(self.values[index])

    ##################################################
    # Serialization
    ##################################################
    def serialize(self) -> dict:
        return {"grid": self.grid.serialize(), "values": [float(v) for v in self.values]}

    @classmethod
    def deserialize(cls, data: dict) -> "GridFunction":
        try:
            return cls(SpatialGrid.deserialize(data["grid"]), data["values"])
        except (KeyError, TypeError) as error:
            raise DataValidationError(f"Invalid grid function: {error}") from error

    def to_csv(self) -> str:
        """Two columns: x, value"""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["x", "value"])
        for x, value in zip(self.grid.points, self.values):
            writer.writerow([repr(float(x)), repr(float(value))])
        return buffer.getvalue()

    @classmethod
    def from_csv(cls, text: str, grid: Optional[SpatialGrid] = None) -> "GridFunction":
        """Reads the x, value format; the grid is inferred when not given"""
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["x", "value"]:
            raise DataValidationError("CSV must start with the header 'x,value'")
        try:
            xs = [float(row[0]) for row in rows[1:] if row]
            values = [float(row[1]) for row in rows[1:] if row]
        except (IndexError, ValueError) as error:
            raise DataValidationError(f"Invalid CSV row: {error}") from error
        if grid is None:
            if not xs:
                raise DataValidationError("CSV has no rows")
            grid = SpatialGrid(xs[0], xs[-1], tuple(xs))
        elif tuple(xs) != grid.points:
            raise GridMismatchError("CSV sample locations do not match the grid")
        return cls(grid, values)


######################################################################
#  P S E U D O N O R M S   A N D   M E T R I C
######################################################################
@dataclass(frozen=True)
class PseudonormFamily:
    """Nested sup-norms; index start + i uses cutoffs[i]"""

    grid: SpatialGrid
    cutoffs: Tuple[float, ...]
    start: int = 1

    def __post_init__(self):
        cutoffs = tuple(float(c) for c in self.cutoffs)
        object.__setattr__(self, "cutoffs", cutoffs)
        if not cutoffs:
            raise DataValidationError("A pseudonorm family needs at least one cutoff")
        if any(b < a for a, b in zip(cutoffs, cutoffs[1:])):
            raise DataValidationError("Pseudonorm cutoffs must be nondecreasing")
        if cutoffs[0] < self.grid.lower:
            raise DataValidationError("Pseudonorm cutoffs must not lie below the domain start")

    @classmethod
    def nested(cls, grid: SpatialGrid, start: int = 1, count: Optional[int] = None) -> "PseudonormFamily":
        """The family ||g||_n = sup over lower <= x <= n for n = start, start+1, ..."""
        count = config.METRIC_TERMS if count is None else count
        return cls(grid, tuple(float(n) for n in range(start, start + count)), start)

    @property
    def indices(self) -> range:
        """The pseudonorm indices the family covers"""
        return range(self.start, self.start + len(self.cutoffs))

    def cutoff(self, n: int) -> float:
        """Right endpoint of the interval for index n"""
        if n not in self.indices:
            raise PseudonormIndexError(f"Pseudonorm index {n} outside {self.indices.start}..{self.indices.stop - 1}")
        return self.cutoffs[n - self.start]

    def is_resolved(self, n: int) -> bool:
        """True when the interval for n lies inside the sampled part of the domain"""
        cutoff = self.cutoff(n)
        return cutoff <= self.grid.points[-1] or cutoff >= self.grid.upper

    @cached_property
    def counts(self) -> np.ndarray:
        """Number of grid points covered by each index"""
        return np.searchsorted(self.grid.array, np.asarray(self.cutoffs), side="right")

    def profile(self, values: np.ndarray) -> np.ndarray:
        """All pseudonorms of a value vector at once"""
        running = np.maximum.accumulate(np.abs(np.asarray(values, dtype=float)))
        counts = self.counts
        return np.where(counts > 0, running[np.maximum(counts - 1, 0)], 0.0)


def geometric_weight(n: int) -> float:
    """w_n = 2^-n"""
    return 2.0**-n


def min_clamp(value: float) -> float:
    """gamma(t) = min(t, 1)"""
    return min(value, 1.0)


@dataclass(frozen=True)
class MetricConfig:
    """Weights and clamp of the metric built from pseudonorms"""

    weight: Callable[[int], float] = geometric_weight
    clamp: Callable[[float], float] = min_clamp
    weight_sum: Optional[float] = None
    terms: int = field(default_factory=lambda: config.METRIC_TERMS)

    def __post_init__(self):
        if self.weight is not geometric_weight and self.weight_sum is None:
            raise DataValidationError("Custom weights must declare their finite sum")
        if self.weight_sum is not None and not (0 < self.weight_sum < math.inf):
            raise DataValidationError("The declared weight sum must be positive and finite")
        if self.terms < 1:
            raise DataValidationError("The metric needs at least one term")
        if self.clamp is not min_clamp:
            self._check_clamp()

    def _check_clamp(self):
        samples = [0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 10.0]
        images = [self.clamp(s) for s in samples]
        if images[0] != 0 or any(not 0 < v <= 1 for v in images[1:]):
            raise DataValidationError("Clamp must be positive definite with values in [0, 1]")
        if any(b < a for a, b in zip(images, images[1:])):
            raise DataValidationError("Clamp must be nondecreasing")
        for a in samples:
            for b in samples:
                if self.clamp(a + b) > self.clamp(a) + self.clamp(b) + 1e-12:
                    raise DataValidationError("Clamp must be subadditive")

    def total_weight(self, start: int = 1) -> float:
        """Sum of all weights from start on"""
        if self.weight_sum is not None:
            return self.weight_sum
        return 2.0 ** (1 - start)

    def weights(self, indices: Sequence[int]) -> np.ndarray:
        """Weights for the given indices"""
        return np.array([self.weight(n) for n in indices], dtype=float)


def _check_family(family: PseudonormFamily, *functions: GridFunction):
    for func in functions:
        if func.grid != family.grid:
            raise GridMismatchError("Grid function and pseudonorm family use different grids")


def pseudonorm(f: GridFunction, n: int, family: PseudonormFamily) -> float:
    """max |f(x)| over grid points x <= cutoff(n)"""
    _check_family(family, f)
    cutoff = family.cutoff(n)
    count = int(np.searchsorted(f.grid.array, cutoff, side="right"))
    if count == 0:
        return 0.0
    return float(np.max(np.abs(f.values[:count])))


def metric(f: GridFunction, g: GridFunction, family: PseudonormFamily, cfg: Optional[MetricConfig] = None) -> float:
    """d(f, g) truncated after cfg.terms indices"""
    cfg = cfg or MetricConfig()
    _check_family(family, f, g)
    norms = family.profile(f.values - g.values)[: cfg.terms]
    indices = family.indices[: len(norms)]
    if cfg.clamp is min_clamp:
        clamped = np.minimum(norms, 1.0)
    else:
        clamped = np.array([cfg.clamp(float(v)) for v in norms])
    return float(np.sum(cfg.weights(indices) * clamped))


def metric_bound_from_pseudonorm_bounds(bounds: Callable[[int], float], family: PseudonormFamily,
                                        cfg: Optional[MetricConfig] = None) -> float:
    """Upper bound on d given per-index bounds on ||f - g||_n, including the truncated tail"""
    cfg = cfg or MetricConfig()
    indices = family.indices[: cfg.terms]
    total = sum(cfg.weight(n) * min(1.0, bounds(n)) for n in indices)
    tail = cfg.total_weight(family.start) - float(np.sum(cfg.weights(indices)))
    return total + max(tail, 0.0)


def _check_epsilon(epsilon: float):
    if not 0 < epsilon < 1:
        raise DataValidationError(f"epsilon must lie in (0, 1), got {epsilon}")


def metric_to_pseudonorm_bound(epsilon: float, M: int) -> float:  # pylint: disable=invalid-name
    """delta such that d(f, g) < delta forces ||f - g||_n < epsilon for n <= M"""
    _check_epsilon(epsilon)
    if M < 0:
        raise DataValidationError(f"M must be nonnegative, got {M}")
    return epsilon * 2.0**-M


def pseudonorm_to_metric_bound(epsilon: float) -> Tuple[float, int]:
    """(delta, M) such that ||f - g||_n < delta for n <= M forces d(f, g) < epsilon"""
    _check_epsilon(epsilon)
    half = epsilon / 2
    M = max(0, math.ceil(-math.log2(half)))  # pylint: disable=invalid-name
    while 2.0**-M > half:
        M += 1  # pylint: disable=invalid-name
    while M > 0 and 2.0 ** -(M - 1) <= half:
        M -= 1  # pylint: disable=invalid-name
    return half, M
