"""
Simulator

Integrates a bound network over a time horizon and samples every channel.
Two methods are available: fixed-step classical RK4, and the adaptive
embedded Runge-Kutta 4(5) pair of scipy.integrate.solve_ivp.
"""

import csv
import io
import json
import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Dict, Iterable, Optional, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator

from lgpac import config
from lgpac.models.base import DataValidationError
from lgpac.models.compiler import BoundNetwork
from lgpac.models.frechet import GridFunction, SpatialGrid
from lgpac.models.network import ChannelKind, Space

logger = logging.getLogger("flask.app")


class SimulationError(Exception):
    """Base class for failures while integrating; frontier is the last valid time"""

    def __init__(self, message: str, frontier: float = 0.0):
        super().__init__(message)
        self.frontier = frontier


class StepSizeUnderflow(SimulationError):
    """The step size collapsed, typically near a blow-up"""


class NonFiniteState(SimulationError):
    """The state overflowed or became NaN"""


class TraceLookupError(DataValidationError):
    """Unknown channel or time outside the simulated horizon"""


######################################################################
#  T I M E   G R I D   A N D   S O L V E R   C O N F I G
######################################################################
@dataclass(frozen=True)
class TimeGrid:
    """Output sample times in [0, t_end]"""

    t_end: float
    times: Tuple[float, ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        object.__setattr__(self, "times", times)
        if self.t_end < 0 or not math.isfinite(self.t_end):
            raise DataValidationError(f"t_end must be a finite nonnegative number, got {self.t_end}")
        if not times:
            raise DataValidationError("A time grid needs at least one sample")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise DataValidationError("Sample times must be strictly increasing")
        if times[0] < 0 or times[-1] > self.t_end:
            raise DataValidationError(f"Sample times must lie in [0, {self.t_end}]")

    @classmethod
    def uniform(cls, t_end: float, samples: int = 101) -> "TimeGrid":
        """Evenly spaced samples including both ends"""
        if t_end == 0:
            return cls(0.0, (0.0,))
        if samples < 2:
            raise DataValidationError("A uniform time grid needs at least two samples")
        return cls(float(t_end), tuple(float(t) for t in np.linspace(0.0, t_end, samples)))

    @classmethod
    def covering(cls, times: Iterable[float]) -> "TimeGrid":
        """Exactly the given times (plus 0), ending at the last one"""
        merged = sorted({0.0, *(float(t) for t in times)})
        return cls(merged[-1], tuple(merged))

    def with_times(self, extra: Iterable[float]) -> "TimeGrid":
        """The grid with additional sample times"""
        merged = sorted(set(self.times) | {float(t) for t in extra})
        return TimeGrid(max(self.t_end, merged[-1]), tuple(merged))


class SolverMethod(str, Enum):
    """Integration schemes"""

    RK4 = "rk4"
    RK45 = "rk45"


@dataclass(frozen=True)
class SolverConfig:
    """Method, tolerances and step bounds"""

    method: SolverMethod = SolverMethod.RK45
    abs_tol: float = config.SOLVER_ABS_TOL
    rel_tol: float = config.SOLVER_REL_TOL
    h_init: float = 1e-3
    h_max: float = 1.0

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise DataValidationError("Solver tolerances must be positive")
        if not 0 < self.h_init <= self.h_max:
            raise DataValidationError(f"Need 0 < h_init <= h_max, got {self.h_init} and {self.h_max}")

    @classmethod
    def adaptive(cls, t_end: float, abs_tol: Optional[float] = None, rel_tol: Optional[float] = None) -> "SolverConfig":
        """RK45 with h_max = t_end / 100; tolerances default from LGPAC_SOLVER_TOL"""
        default_abs, default_rel = config.solver_tolerance()
        h_max = t_end / 100 if t_end > 0 else 1.0
        return cls(SolverMethod.RK45, abs_tol or default_abs, rel_tol or default_rel, min(1e-3, h_max), h_max)

    @classmethod
    def fixed(cls, h: float) -> "SolverConfig":
        """Classical RK4 with steps of at most h"""
        return cls(SolverMethod.RK4, h_init=h, h_max=h)


def default_solver_config(t_end: float) -> SolverConfig:
    """The adaptive defaults for a horizon"""
    return SolverConfig.adaptive(t_end)


######################################################################
#  S T R E A M   T R A C E
######################################################################
@dataclass(frozen=True, eq=False)
class StreamTrace:
    """Samples of one channel; X channels carry one row per sample time"""

    channel: str
    kind: ChannelKind
    times: np.ndarray
    values: np.ndarray
    grid: Optional[SpatialGrid] = None
    derivatives: Optional[np.ndarray] = None

    def __post_init__(self):
        if len(self.values) != len(self.times):
            raise DataValidationError(f"Trace {self.channel} has {len(self.values)} samples for {len(self.times)} times")

    def __repr__(self):
        return f"<StreamTrace {self.channel} {self.kind.value} samples={len(self.times)}>"

    @property
    def is_function_valued(self) -> bool:
        """True for X channels"""
        return self.kind.space == Space.X

    def wrap(self, row) -> Union[float, GridFunction]:
        """A stored row as a real or a grid function"""
        if self.is_function_valued:
            return GridFunction(self.grid, row)
        return float(row)

    def sample(self, index: int) -> Union[float, GridFunction]:
        """The value at the index-th sample time"""
        return self.wrap(self.values[index])

    @cached_property
    def interpolant(self) -> PchipInterpolator:
        """Monotone cubic through the samples"""
        return PchipInterpolator(self.times, self.values, axis=0)

    @cached_property
    def derivative_interpolant(self) -> PchipInterpolator:
        """Monotone cubic through the derivative samples"""
        return PchipInterpolator(self.times, self.derivatives, axis=0)


Traces = Dict[str, StreamTrace]


######################################################################
#  I N T E G R A T I O N
######################################################################
def _rk4(bound: BoundNetwork, y0: np.ndarray, times: Tuple[float, ...], h: float) -> np.ndarray:
    states = np.empty((len(times), y0.size))
    t, y = 0.0, y0
    for i, target in enumerate(times):
        interval = target - t
        if interval > 0:
            steps = max(1, math.ceil(interval / h - 1e-9))
            dt = interval / steps
            for step in range(steps):
                ts = t + step * dt
                k1 = bound.rhs(ts, y)
                k2 = bound.rhs(ts + dt / 2, y + dt / 2 * k1)
                k3 = bound.rhs(ts + dt / 2, y + dt / 2 * k2)
                k4 = bound.rhs(ts + dt, y + dt * k3)
                candidate = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
                if not np.all(np.isfinite(candidate)):
                    raise NonFiniteState(f"state became non-finite after t={ts}", frontier=ts)
                y = candidate
            t = target
        states[i] = y
    return states


def _rk45(bound: BoundNetwork, y0: np.ndarray, tg: TimeGrid, cfg: SolverConfig) -> np.ndarray:
    frontier = [0.0]

    def rhs(t, y):
        if not np.all(np.isfinite(y)):
            raise NonFiniteState(f"state became non-finite near t={t}", frontier=frontier[0])
        dy = bound.rhs(t, y)
        if not np.all(np.isfinite(dy)):
            raise NonFiniteState(f"derivative became non-finite at t={t}", frontier=frontier[0])
        frontier[0] = max(frontier[0], t)
        return dy

    with np.errstate(over="ignore", invalid="ignore"):
        solution = solve_ivp(
            rhs,
            (0.0, tg.t_end),
            y0,
            method="RK45",
            t_eval=np.asarray(tg.times),
            rtol=cfg.rel_tol,
            atol=cfg.abs_tol,
            first_step=min(cfg.h_init, tg.t_end),
            max_step=cfg.h_max,
        )
    if solution.status == -1:
        raise StepSizeUnderflow(f"integration stopped: {solution.message}", frontier=frontier[0])
    states = solution.y.T
    if states.shape[0] != len(tg.times) or not np.all(np.isfinite(states)):
        raise NonFiniteState("integration produced non-finite samples", frontier=frontier[0])
    return states


def simulate(bound: BoundNetwork, tg: TimeGrid, cfg: Optional[SolverConfig] = None) -> Traces:
    """Samples every channel of a bound network at the grid's times"""
    cfg = cfg or default_solver_config(tg.t_end)
    system = bound.system
    logger.info("Simulating %s to t=%s with %s (%d states)", system.network.name, tg.t_end, cfg.method.value, system.size)
    y0 = bound.initial_state()
    if not np.all(np.isfinite(y0)):
        raise NonFiniteState("initial state is not finite", frontier=0.0)
    if system.size == 0 or tg.t_end == 0:
        states = np.tile(y0, (len(tg.times), 1))
    elif cfg.method == SolverMethod.RK4:
        with np.errstate(over="ignore", invalid="ignore"):
            states = _rk4(bound, y0, tg.times, cfg.h_init)
    else:
        states = _rk45(bound, y0, tg, cfg)
    return _sample_channels(bound, tg, states)


def _sample_channels(bound: BoundNetwork, tg: TimeGrid, states: np.ndarray) -> Traces:
    system = bound.system
    names = list(system.channels)
    roots = tuple(system.channels[n] for n in names) + tuple(system.derivatives.values())
    width = system.width
    values = {n: [] for n in names}
    derivs = {n: [] for n in system.derivatives}
    for t, y in zip(tg.times, states):
        evaluated = bound.evaluate(t, y, roots)
        for name in names:
            values[name].append(_shape(evaluated[system.channels[name]], system.kinds[name], width))
        for name, node_id in system.derivatives.items():
            derivs[name].append(_shape(evaluated[node_id], system.kinds[name], width))
    times = np.asarray(tg.times)
    traces = {}
    for name in names:
        kind = system.kinds[name]
        trace_values = np.asarray(values[name], dtype=float)
        if not np.all(np.isfinite(trace_values)):
            frontier = _last_finite_time(times, trace_values)
            raise NonFiniteState(f"channel {name} is not finite", frontier=frontier)
        derivative = np.asarray(derivs[name], dtype=float) if name in derivs else None
        grid = system.grid if kind.space == Space.X else None
        traces[name] = StreamTrace(name, kind, times, trace_values, grid, derivative)
    return traces


def _shape(value, kind: ChannelKind, width: int) -> np.ndarray:
    if kind.space == Space.X:
        return np.broadcast_to(np.asarray(value, dtype=float), (width,))
    return float(np.asarray(value, dtype=float).reshape(-1)[0])


def _last_finite_time(times: np.ndarray, values: np.ndarray) -> float:
    finite = np.all(np.isfinite(values.reshape(len(times), -1)), axis=1)
    bad = np.flatnonzero(~finite)
    return float(times[bad[0] - 1]) if bad.size and bad[0] > 0 else 0.0


######################################################################
#  L O O K U P
######################################################################
def evaluate_channel(traces: Traces, channel: str, t: float, derivative: bool = False) -> Union[float, GridFunction]:
    """Value (or derivative) of a channel at time t by monotone cubic interpolation"""
    if channel not in traces:
        raise TraceLookupError(f"unknown channel '{channel}'")
    trace = traces[channel]
    if derivative and trace.derivatives is None:
        raise TraceLookupError(f"channel '{channel}' has no derivative samples")
    start, end = float(trace.times[0]), float(trace.times[-1])
    if not start <= t <= end:
        raise TraceLookupError(f"t={t} is outside the simulated range [{start}, {end}]")
    samples = trace.derivatives if derivative else trace.values
    index = int(np.searchsorted(trace.times, t))
    if index < len(trace.times) and trace.times[index] == t:
        return trace.wrap(samples[index])
    interpolant = trace.derivative_interpolant if derivative else trace.interpolant
    return trace.wrap(interpolant(t))


######################################################################
#  E X P O R T   A N D   I M P O R T
######################################################################
CSV_HEADER = ["t", "x", "channel", "value"]


def traces_to_csv(traces: Traces, channels: Optional[Iterable[str]] = None) -> str:
    """Long format t,x,channel,value; real channels leave x empty"""
    names = list(channels) if channels is not None else list(traces)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    if not names:
        return buffer.getvalue()
    times = traces[names[0]].times
    for i, t in enumerate(times):
        for name in names:
            trace = traces[name]
            if trace.is_function_valued:
                for x, value in zip(trace.grid.points, trace.values[i]):
                    writer.writerow([repr(float(t)), repr(float(x)), name, repr(float(value))])
            else:
                writer.writerow([repr(float(t)), "", name, repr(float(trace.values[i]))])
    return buffer.getvalue()


def traces_from_csv(text: str) -> Traces:
    """Reads the long CSV format back into traces"""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [c.strip() for c in header] != CSV_HEADER:
        raise DataValidationError("CSV must start with the header 't,x,channel,value'")
    rows: Dict[str, Dict[float, Dict[Optional[float], float]]] = {}
    try:
        for row in reader:
            if not row:
                continue
            t, x, name, value = row
            rows.setdefault(name, {}).setdefault(float(t), {})[float(x) if x else None] = float(value)
    except ValueError as error:
        raise DataValidationError(f"Invalid CSV row: {error}") from error
    traces = {}
    for name, by_time in rows.items():
        times = np.asarray(sorted(by_time))
        xs = sorted({x for sample in by_time.values() for x in sample})
        if xs == [None]:
            values = np.asarray([by_time[t][None] for t in times])
            traces[name] = StreamTrace(name, ChannelKind.R_STREAM, times, values)
        else:
            grid = SpatialGrid(xs[0], xs[-1], tuple(xs))
            try:
                values = np.asarray([[by_time[t][x] for x in xs] for t in times])
            except KeyError as error:
                raise DataValidationError(f"Channel {name} is missing samples") from error
            traces[name] = StreamTrace(name, ChannelKind.X_STREAM, times, values, grid)
    return traces


def traces_to_json(traces: Traces) -> str:
    """JSON export including derivative samples"""
    grids = {t.grid for t in traces.values() if t.grid is not None}
    first = next(iter(traces.values()), None)
    document = {
        "times": [float(t) for t in first.times] if first is not None else [],
        "grid": next(iter(grids)).serialize() if grids else None,
        "channels": {
            name: {
                "kind": trace.kind.value,
                "values": trace.values.tolist(),
                "derivatives": trace.derivatives.tolist() if trace.derivatives is not None else None,
            }
            for name, trace in traces.items()
        },
    }
    return json.dumps(document)


def traces_from_json(text: str) -> Traces:
    """Reads traces written by traces_to_json"""
    try:
        document = json.loads(text)
        times = np.asarray(document["times"], dtype=float)
        grid = SpatialGrid.deserialize(document["grid"]) if document.get("grid") else None
        traces = {}
        for name, entry in document["channels"].items():
            kind = ChannelKind(entry["kind"])
            derivatives = entry.get("derivatives")
            traces[name] = StreamTrace(
                name,
                kind,
                times,
                np.asarray(entry["values"], dtype=float),
                grid if kind.space == Space.X else None,
                np.asarray(derivatives, dtype=float) if derivatives is not None else None,
            )
    except (KeyError, TypeError, ValueError) as error:
        raise DataValidationError(f"Invalid trace JSON: {error}") from error
    return traces
