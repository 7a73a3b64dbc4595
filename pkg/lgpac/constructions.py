"""
Constructions

Networks for the inverter, speedup and slowdown, the Gamma pipeline and the
zeta pipeline, each registered in a catalog together with its recommended
grid, modulus and a reference oracle.

Gamma is the sum of two streams whose limits split Euler's integral at 1:

    gamma1'' = -(x + x t + t) / (1 + t)^2 * gamma1'
    gamma2'' = (x - t - 2) / (1 + t) * gamma2'

both starting from gamma'(0) = 1/e and gamma(0) = 0.

Zeta uses the Abel-Plana representation

    zeta(x) = 2^(x-1)/(x-1) - 2^x int_0^oo sin(x atan t) (1+t^2)^(-x/2) / (e^(pi t) + 1) dt

built in six steps: 1/(1+t^2) by an inverter, atan by integration, a
sine/cosine pair driven by x atan t, (1+t^2)^(-x/2) by a first-order
integrator, 1/(e^(pi t) + 1) from an exponential and an inverter, and the
product of the three.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import integrate, optimize

from lgpac import config
from lgpac.models.base import DataValidationError
from lgpac.models.formula import evaluate, format_number, parse_formula
from lgpac.models.frechet import MetricConfig, PseudonormFamily, SpatialGrid, metric_bound_from_pseudonorm_bounds
from lgpac.models.modulus import Exponential, Linear, Modulus, NetworkGenerated
from lgpac.models.network import ChannelKind, Network, NetworkBuilder, Space

logger = logging.getLogger("flask.app")

X = Space.X


class UnknownConstruction(DataValidationError):
    """No construction with that name"""


######################################################################
#  S U B N E T W O R K S
######################################################################
def _inverter(nb: NetworkBuilder, name: str, k: str, b: str, space: Space = Space.R) -> str:
    """a' = -a^2 b', a(0) = k; returns the name of a"""
    nb.multiplier(f"{name}_sq", space, in1=name, in2=name)
    nb.multiplier(f"{name}_neg", space, in1="minus_one", in2=f"{name}_sq")
    return nb.integrator(name, space, c=k, u=f"{name}_neg", v=b)


def _common(nb: NetworkBuilder, space: Space):
    nb.constant("one", 1.0)
    nb.constant("minus_one", -1.0)
    nb.time("t", space)
    if space == X:
        nb.constant("x", "x", X)


def _gamma_u1(nb: NetworkBuilder) -> str:
    _inverter(nb, "sdown1", "one", "t", X)
    nb.multiplier("xt", X, in1="x", in2="t")
    nb.adder("x_xt", X, in1="x", in2="xt")
    nb.adder("x_xt_t", X, in1="x_xt", in2="t")
    nb.multiplier("neg_poly", X, in1="minus_one", in2="x_xt_t")
    return nb.multiplier("u1", X, in1="neg_poly", in2="sdown1_sq")


def _gamma_u2(nb: NetworkBuilder) -> str:
    _inverter(nb, "sdown2", "one", "t", X)
    nb.constant("minus_two", -2.0)
    nb.multiplier("neg_t", X, in1="minus_one", in2="t")
    nb.adder("x_m2", X, in1="x", in2="minus_two")
    nb.adder("x_m2_mt", X, in1="x_m2", in2="neg_t")
    return nb.multiplier("u2", X, in1="x_m2_mt", in2="sdown2")


def _second_order(nb: NetworkBuilder, name: str, u: str) -> str:
    """w'' = u w', w'(0) = 1/e, w(0) = 0"""
    if "inv_e" not in {m.name for m in nb.modules}:
        nb.constant("inv_e", "exp(-1)")
        nb.constant("zero", 0.0)
    nb.multiplier(f"{name}_acc", X, in1=u, in2=f"{name}_rate")
    nb.integrator(f"{name}_rate", X, c="inv_e", u=f"{name}_acc", v="t")
    return nb.integrator(name, X, c="zero", u=f"{name}_rate", v="t")


def _zeta_steps(nb: NetworkBuilder, last: int) -> str:
    """Adds steps 1..last of the zeta pipeline and returns the newest channel"""
    nb.multiplier("tt", X, in1="t", in2="t")
    newest = _inverter(nb, "r", "one", "tt", X)
    if last >= 2:
        nb.constant("zero", 0.0)
        newest = nb.integrator("arctan", X, c="zero", u="r", v="t")
    if last >= 3:
        nb.multiplier("theta", X, in1="x", in2="arctan")
        nb.integrator("sin", X, c="zero", u="cos", v="theta")
        nb.multiplier("neg_sin", X, in1="minus_one", in2="sin")
        nb.integrator("cos", X, c="one", u="neg_sin", v="theta")
        newest = "sin"
    if last >= 4:
        nb.constant("neg_x", "-x", X)
        nb.multiplier("rt", X, in1="r", in2="t")
        nb.multiplier("neg_x_rt", X, in1="neg_x", in2="rt")
        nb.multiplier("decay_rate", X, in1="neg_x_rt", in2="decay")
        newest = nb.integrator("decay", X, c="one", u="decay_rate", v="t")
    if last >= 5:
        nb.constant("neg_pi", "-pi")
        nb.constant("half", 0.5)
        nb.multiplier("expo_rate", X, in1="neg_pi", in2="expo")
        nb.integrator("expo", X, c="one", u="expo_rate", v="t")
        _inverter(nb, "fermi_inv", "half", "expo", X)
        newest = nb.multiplier("fermi", X, in1="expo", in2="fermi_inv")
    if last >= 6:
        nb.multiplier("sin_decay", X, in1="sin", in2="decay")
        newest = nb.multiplier("zeta2", X, in1="sin_decay", in2="fermi")
    return newest


def _zeta1(nb: NetworkBuilder) -> str:
    _zeta_steps(nb, 6)
    nb.constant("zeta_start", "2^(x-1)/(x-1)", X)
    nb.constant("neg_two_x", "-(2^x)", X)
    nb.multiplier("zeta1_rate", X, in1="neg_two_x", in2="zeta2")
    return nb.integrator("zeta1", X, c="zeta_start", u="zeta1_rate", v="t")


######################################################################
#  B U I L D E R S
######################################################################
def build_inverter() -> Network:
    """F(k, b)(t) = k / (1 + k (b(t) - b(0))) with proper inputs k and b"""
    nb = NetworkBuilder("inverter")
    nb.input("k", ChannelKind.R_SCALAR)
    nb.input("b", ChannelKind.R_STREAM)
    nb.constant("minus_one", -1.0)
    _inverter(nb, "a", "k", "b")
    nb.output("a")
    return nb.build()


def build_speedup() -> Network:
    """t / (1 - t) on [0, 1)"""
    nb = NetworkBuilder("speedup")
    _common(nb, Space.R)
    nb.multiplier("neg_t", in1="minus_one", in2="t")
    _inverter(nb, "sup", "one", "neg_t")
    nb.multiplier("speedup", in1="t", in2="sup")
    nb.output("speedup")
    return nb.build()


def build_slowdown() -> Network:
    """t / (1 + t) on [0, oo)"""
    nb = NetworkBuilder("slowdown")
    _common(nb, Space.R)
    _inverter(nb, "sdown", "one", "t")
    nb.multiplier("slowdown", in1="t", in2="sdown")
    nb.output("slowdown")
    return nb.build()


def build_gamma_u1() -> Network:
    nb = NetworkBuilder("gamma_u1")
    _common(nb, X)
    nb.output(_gamma_u1(nb))
    return nb.build()


def build_gamma_u2() -> Network:
    nb = NetworkBuilder("gamma_u2")
    _common(nb, X)
    nb.output(_gamma_u2(nb))
    return nb.build()


def build_gamma1() -> Network:
    nb = NetworkBuilder("gamma1")
    _common(nb, X)
    nb.output(_second_order(nb, "gamma1", _gamma_u1(nb)))
    return nb.build()


def build_gamma2() -> Network:
    nb = NetworkBuilder("gamma2")
    _common(nb, X)
    nb.output(_second_order(nb, "gamma2", _gamma_u2(nb)))
    return nb.build()


def build_gamma(grid_k: float = config.GAMMA_GRID[1]) -> Tuple[Network, Modulus]:
    """Gamma on [1, grid_k] as the limit of gamma1 + gamma2 under T(tau) = 3 * 2^tau"""
    if grid_k < 1:
        raise DataValidationError(f"the Gamma grid needs grid_k >= 1, got {grid_k}")
    modulus = Modulus.continuous(Exponential(config.GAMMA_MODULUS_C))
    nb = NetworkBuilder("gamma")
    _common(nb, X)
    g1 = _second_order(nb, "gamma1", _gamma_u1(nb))
    g2 = _second_order(nb, "gamma2", _gamma_u2(nb))
    nb.adder("gamma", X, in1=g1, in2=g2)
    nb.limit("Gamma", modulus, X, **{"in": "gamma"})
    nb.output("gamma")
    nb.output("Gamma")
    return nb.build(), modulus


def build_zeta_step(step: int) -> Network:
    """The zeta pipeline up to one of its six steps"""
    if step not in range(1, 7):
        raise DataValidationError(f"zeta steps run from 1 to 6, got {step}")
    nb = NetworkBuilder(f"zeta_step{step}")
    _common(nb, X)
    nb.output(_zeta_steps(nb, step))
    return nb.build()


def build_zeta1() -> Network:
    nb = NetworkBuilder("zeta1")
    _common(nb, X)
    nb.output(_zeta1(nb))
    return nb.build()


def build_zeta(grid_k: float = config.ZETA_GRID[1]) -> Tuple[Network, Modulus]:
    """zeta on [2, grid_k] as the id-convergent limit of zeta1"""
    if grid_k < 2:
        raise DataValidationError(f"the zeta grid needs grid_k >= 2, got {grid_k}")
    modulus = Modulus.continuous(Linear(config.ZETA_MODULUS_C))
    nb = NetworkBuilder("zeta")
    _common(nb, X)
    _zeta1(nb)
    nb.limit("zeta", modulus, X, **{"in": "zeta1"})
    nb.output("zeta1")
    nb.output("zeta")
    return nb.build(), modulus


######################################################################
#  M O D U L U S   G E N E R A T O R S
######################################################################
def build_exp2_modulus(C: float) -> Network:  # pylint: disable=invalid-name
    """y' = ln 2 * y, y(0) = C"""
    nb = NetworkBuilder("exp2_modulus")
    nb.time("t")
    nb.constant("C", float(C))
    nb.constant("ln2", "log(2)")
    nb.multiplier("rate", in1="ln2", in2="T")
    nb.integrator("T", c="C", u="rate", v="t")
    nb.output("T")
    return nb.build()


def build_linear_modulus(C: float) -> Network:  # pylint: disable=invalid-name
    """y' = C, y(0) = 0"""
    nb = NetworkBuilder("linear_modulus")
    nb.time("t")
    nb.constant("C", float(C))
    nb.constant("zero", 0.0)
    nb.integrator("T", c="zero", u="C", v="t")
    nb.output("T")
    return nb.build()


def network_modulus(shape: str, C: float, horizon: float = 32.0) -> Modulus:  # pylint: disable=invalid-name
    """A continuous modulus tabulated from a generator network"""
    builders = {"exp2": build_exp2_modulus, "linear": build_linear_modulus}
    if shape not in builders:
        raise DataValidationError(f"unknown modulus generator '{shape}'")
    return Modulus.continuous(NetworkGenerated(builders[shape](C), "T", horizon, label=f"network {shape} {format_number(C)}"))


######################################################################
#  O R A C L E S
######################################################################
def gamma_oracle(x: float) -> float:
    """Euler's integral by adaptive quadrature, split at 1"""
    if x < 1:
        raise DataValidationError(f"the Gamma oracle covers x >= 1, got {x}")
    head, _ = integrate.quad(lambda s: s ** (x - 1) * math.exp(-s), 0.0, 1.0, epsabs=1e-13, epsrel=1e-13)
    tail, _ = integrate.quad(lambda s: s ** (x - 1) * math.exp(-s), 1.0, np.inf, epsabs=1e-13, epsrel=1e-13)
    return head + tail


def zeta_oracle(x: float, terms: int = 10**6) -> float:
    """Partial sum plus the integral tail from terms + 1/2"""
    if x <= 1:
        raise DataValidationError(f"the zeta oracle covers x > 1, got {x}")
    n = np.arange(1, terms + 1, dtype=float)
    partial = float(np.sum(n[::-1] ** -x))
    return partial + (terms + 0.5) ** (1 - x) / (x - 1)


def _quad_stream(integrand: Callable[[float, float], float], start: Callable[[float], float], scale=lambda x: 1.0):
    def oracle(t, x):
        values = []
        for xi in np.atleast_1d(x):
            area, _ = integrate.quad(lambda s: integrand(s, xi), 0.0, t, epsabs=1e-12, epsrel=1e-12, limit=200)
            values.append(start(xi) + scale(xi) * area)
        return np.asarray(values) if np.ndim(x) else values[0]

    return oracle


def _gamma1_rate(t, x):
    return (1 + t) ** (-x - 1) * np.exp(-1 / (1 + t))


def _gamma2_rate(t, x):
    return (1 + t) ** (x - 1) * np.exp(-1 - t)


def _zeta2(t, x):
    return np.sin(x * np.arctan(t)) * (1 + t * t) ** (-x / 2) / (np.exp(np.pi * t) + 1)


CLOSED_FORMS: Dict[str, str] = {
    "inverter": "1/(1+t)",
    "speedup": "t/(1-t)",
    "slowdown": "t/(1+t)",
    "gamma_u1": "-(x+x*t+t)/(1+t)^2",
    "gamma_u2": "(x-t-2)/(1+t)",
    "zeta_step1": "1/(1+t^2)",
    "zeta_step2": "atan(t)",
    "zeta_step3": "sin(x*atan(t))",
    "zeta_step4": "(1+t^2)^(-x/2)",
    "zeta_step5": "1/(exp(pi*t)+1)",
    "zeta_step6": "sin(x*atan(t))*(1+t^2)^(-x/2)/(exp(pi*t)+1)",
}


def closed_form_oracle(text: str) -> Callable:
    """(t, x) -> value of a closed-form formula"""
    node = parse_formula(text)
    return lambda t, x=None: evaluate(node, {"t": t, "x": x} if x is not None else {"t": t})


STREAM_ORACLES: Dict[str, Callable] = {
    **{name: closed_form_oracle(text) for name, text in CLOSED_FORMS.items()},
    "gamma1": _quad_stream(_gamma1_rate, lambda x: 0.0),
    "gamma2": _quad_stream(_gamma2_rate, lambda x: 0.0),
    "zeta1": _quad_stream(_zeta2, lambda x: 2 ** (x - 1) / (x - 1), lambda x: -(2**x)),
}


######################################################################
#  E R R O R   B U D G E T
######################################################################
def gamma1_tail_bound(T: float) -> float:  # pylint: disable=invalid-name
    """|gamma1(t1) - gamma1(t2)| <= 1/T for t1, t2 >= T"""
    return math.inf if T <= 0 else 1.0 / T


def gamma2_tail_bound(k: int, T: float) -> float:  # pylint: disable=invalid-name
    """(k+1)! (T+1)^k e^-(T+1) on [1, k+1]"""
    log_bound = math.lgamma(k + 2) + k * math.log(T + 1) - (T + 1)
    return math.exp(log_bound) if log_bound < 700 else math.inf


# 1 / (e^(pi t) + 1) <= e^(-pi t), so the tail integral is at most 2^k e^(-pi T) / pi
ZETA_TAIL_AMPLITUDE = 1 / math.pi


def zeta_tail_bound(k: int, T: float) -> float:  # pylint: disable=invalid-name
    """2^k / pi * e^(-pi T) on [2, k]"""
    log_bound = k * math.log(2) + math.log(ZETA_TAIL_AMPLITUDE) - math.pi * T
    return math.exp(log_bound) if log_bound < 700 else math.inf


@dataclass(frozen=True)
class ErrorBudget:
    """Analytic tail bounds of a construction at T = modulus(tau)"""

    construction: str
    tau: float
    T: float  # pylint: disable=invalid-name
    parts: Dict[str, Dict[int, float]] = field(default_factory=dict)
    metric_bound: float = 0.0
    analytic_metric_bound: float = 0.0

    def bound(self, n: int) -> float:
        """Sum of the part bounds for pseudonorm index n"""
        return sum(part[n] for part in self.parts.values())

    def serialize(self) -> dict:
        """Convert a budget into a dictionary"""
        return {
            "construction": self.construction,
            "tau": self.tau,
            "T": self.T,
            "parts": {name: {str(n): b for n, b in part.items()} for name, part in self.parts.items()},
            "metric_bound": self.metric_bound,
            "analytic_metric_bound": self.analytic_metric_bound,
        }


def certified_error_budget(construction: str, tau: float, cfg: Optional[MetricConfig] = None) -> ErrorBudget:
    """Tail bounds per pseudonorm index at T = modulus(tau), and the metric bound they imply"""
    if tau < 0:
        raise DataValidationError(f"tau must be nonnegative, got {tau}")
    cfg = cfg or MetricConfig()
    if construction == "gamma":
        T = Modulus.continuous(Exponential(config.GAMMA_MODULUS_C))(tau)  # pylint: disable=invalid-name
        start = 1
        bounds = {
            "gamma1": lambda n: gamma1_tail_bound(T),
            "gamma2": lambda n: gamma2_tail_bound(n - 1, T),
        }
    elif construction == "zeta":
        T = Modulus.continuous(Linear(config.ZETA_MODULUS_C))(tau)  # pylint: disable=invalid-name
        start = 2
        bounds = {"zeta1": lambda n: zeta_tail_bound(n, T)}
    else:
        raise UnknownConstruction(f"no error budget for '{construction}'")
    lower, _, _ = config.GAMMA_GRID if construction == "gamma" else config.ZETA_GRID
    family = PseudonormFamily.nested(SpatialGrid(lower, math.inf, (lower,)), start=start, count=cfg.terms)
    parts = {name: {n: func(n) for n in family.indices} for name, func in bounds.items()}
    total = metric_bound_from_pseudonorm_bounds(lambda n: sum(p[n] for p in parts.values()), family, cfg)
    logger.info("Error budget for %s at tau=%s: T=%s metric bound %.3e", construction, tau, T, total)
    return ErrorBudget(construction, float(tau), T, parts, 2.0**-tau, total)


def zeta_modulus_threshold(amplitude: float = ZETA_TAIL_AMPLITUDE) -> float:
    """Smallest C with -pi C tau + log(tau + 1) + log(A) <= -log(2) (tau + 1) for every tau >= 0

    The worst tau gives b - ln b = 1 - ln(2A) with b = pi C - ln 2 in (0, 1).
    The default A is the amplitude of zeta_tail_bound; A = 1/(e pi) gives
    the smaller constant of the e^(-pi t - 1) integrand.
    """
    target = 1 - math.log(2 * amplitude)
    if target <= 1:
        raise DataValidationError(f"amplitude {amplitude} is too large for a finite threshold")
    b = optimize.brentq(lambda v: v - math.log(v) - target, 1e-300, 1.0, xtol=1e-15)
    return (b + math.log(2)) / math.pi


######################################################################
#  C A T A L O G
######################################################################
@dataclass(frozen=True)
class Construction:
    """A catalog entry: the network and what is needed to run and check it"""

    name: str
    network: Network
    grid: Optional[SpatialGrid]
    modulus: Optional[Modulus]
    channel: str
    oracle: Callable
    bindings: Dict[str, object] = field(default_factory=dict)
    t_end: float = 10.0
    tau: Optional[float] = None
    expected: str = ""

    @property
    def is_limit(self) -> bool:
        """True when the oracle is the limit x -> value rather than a stream (t, x) -> value"""
        return self.modulus is not None


def gamma_grid(grid_k: float = config.GAMMA_GRID[1]) -> SpatialGrid:
    lower, _, step = config.GAMMA_GRID
    return SpatialGrid.uniform(lower, grid_k, step)


def zeta_grid(grid_k: float = config.ZETA_GRID[1]) -> SpatialGrid:
    lower, _, step = config.ZETA_GRID
    return SpatialGrid.uniform(lower, grid_k, step)


def _inverter_entry() -> Construction:
    # pylint: disable=import-outside-toplevel
    from lgpac.models.compiler import StreamBinding

    return Construction("inverter", build_inverter(), None, None, "a", STREAM_ORACLES["inverter"],
                        {"k": 1.0, "b": StreamBinding("t", "1")}, 10.0, expected=CLOSED_FORMS["inverter"])


def _limit_entry(name: str, channel: str, builder: Callable, grid: Callable[[], SpatialGrid], oracle: Callable,
                 tau: float) -> Callable[[], Construction]:
    def entry() -> Construction:
        network, modulus = builder()
        return Construction(name, network, grid(), modulus, channel, oracle,
                            t_end=modulus(tau + 1), tau=tau)

    return entry


def _stream_entry(name: str, builder: Callable[[], Network], grid: Optional[Callable[[], SpatialGrid]],
                  t_end: float) -> Callable[[], Construction]:
    def entry() -> Construction:
        network = builder()
        return Construction(name, network, grid() if grid else None, None, network.outputs[0].label,
                            STREAM_ORACLES[name], t_end=t_end, expected=CLOSED_FORMS.get(name, ""))

    return entry


CATALOG: Dict[str, Callable[[], Construction]] = {
    "inverter": _inverter_entry,
    "speedup": _stream_entry("speedup", build_speedup, None, 0.75),
    "slowdown": _stream_entry("slowdown", build_slowdown, None, 10.0),
    "gamma_u1": _stream_entry("gamma_u1", build_gamma_u1, gamma_grid, 10.0),
    "gamma1": _stream_entry("gamma1", build_gamma1, gamma_grid, 10.0),
    "gamma_u2": _stream_entry("gamma_u2", build_gamma_u2, gamma_grid, 10.0),
    "gamma2": _stream_entry("gamma2", build_gamma2, gamma_grid, 10.0),
    "gamma": _limit_entry("gamma", "Gamma", build_gamma, gamma_grid, gamma_oracle, 8),
    **{f"zeta_step{s}": _stream_entry(f"zeta_step{s}", lambda s=s: build_zeta_step(s), zeta_grid, 5.0)
       for s in range(1, 7)},
    "zeta1": _stream_entry("zeta1", build_zeta1, zeta_grid, 5.0),
    "zeta": _limit_entry("zeta", "zeta", build_zeta, zeta_grid, zeta_oracle, 16),
}


def catalog_names() -> List[str]:
    """Names of every construction"""
    return list(CATALOG)


def construction(name: str) -> Construction:
    """Builds a catalog entry by name"""
    if name not in CATALOG:
        raise UnknownConstruction(f"no construction named '{name}'")
    logger.debug("Building construction %s", name)
    return CATALOG[name]()
