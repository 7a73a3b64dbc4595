"""
Workflows

The steps shared by the command line and the REST API: load a .lgpac
source into a bound network, simulate it, run its limit modules and
compare the results with oracles.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from lgpac.dsl import DslDocument, ParseResult, parse, parse_document, to_bindings, to_network
from lgpac.dsl.document import DEFAULT_SAMPLES
from lgpac.limits import CertifiedLimit, network_limits
from lgpac.models.base import DataValidationError
from lgpac.models.compiler import BoundNetwork, compile_network, proper_input_binding
from lgpac.models.formula import evaluate
from lgpac.models.frechet import GridFunction
from lgpac.models.network import Network, ValidationReport, validate
from lgpac.simulator import SolverConfig, TimeGrid, Traces, simulate

logger = logging.getLogger("flask.app")

Source = Union[str, bytes]


@dataclass
class Workload:
    """A parsed document with its network compiled and inputs bound"""

    document: DslDocument
    network: Network
    bound: BoundNetwork

    @property
    def grid(self):
        return self.bound.system.grid


def check(source: Source) -> Tuple[ParseResult, Optional[ValidationReport]]:
    """Parses and validates without compiling; the report is None when parsing failed"""
    result = parse(source)
    if not result.ok:
        return result, None
    return result, validate(to_network(result.document))


def load(source: Source) -> Workload:
    """Parse, compile and bind; raises DslError, CompilationError or BindingError"""
    doc = parse_document(source)
    net = to_network(doc)
    system = compile_network(net, doc.grid)
    bound = proper_input_binding(system, to_bindings(doc, net))
    return Workload(doc, net, bound)


def output_channels(work: Workload) -> List[str]:
    """Channels behind the proper outputs that have traces; every channel when there are none"""
    channels = work.bound.system.channels
    sources = [o.source for o in work.network.outputs if o.source in channels]
    return list(dict.fromkeys(sources)) or list(channels)


def run_simulation(work: Workload, t_end: Optional[float] = None, samples: Optional[int] = None,
                   cfg: Optional[SolverConfig] = None) -> Traces:
    """Simulates to t_end, or to the document's simulate directive"""
    directive = work.document.simulate
    if t_end is None:
        if directive is None:
            raise DataValidationError("no simulation horizon: give t_end or add a 'simulate' statement")
        t_end = directive.t_end
    if samples is None:
        samples = directive.samples if directive is not None else DEFAULT_SAMPLES
    return simulate(work.bound, TimeGrid.uniform(t_end, samples), cfg)


def run_limits(work: Workload, tau: Optional[float] = None, cfg: Optional[SolverConfig] = None) -> Dict[str, CertifiedLimit]:
    """Certified limits of every limit module at tau, or at the document's precision"""
    tau = work.document.precision if tau is None else tau
    if tau is None:
        raise DataValidationError("no precision: give tau or add a 'precision' statement")
    return network_limits(work.bound, tau, cfg=cfg)


######################################################################
#  O R A C L E   C O M P A R I S O N S
######################################################################
def closed_form_errors(work: Workload, traces: Traces) -> Dict[str, float]:
    """Max abs error of each 'expect' channel against its closed form, over every sample"""
    if not work.document.expectations:
        raise DataValidationError("the document has no 'expect' statement")
    errors = {}
    for stmt in work.document.expectations:
        trace = traces.get(stmt.channel)
        if trace is None:
            raise DataValidationError(f"channel '{stmt.channel}' was not simulated")
        env = {"x": trace.grid.array} if trace.is_function_valued else {}
        worst = 0.0
        for t, row in zip(trace.times, trace.values):
            expected = evaluate(stmt.formula, {**env, "t": float(t)})
            worst = max(worst, float(np.max(np.abs(row - expected))))
        errors[stmt.channel] = worst
        logger.info("Channel %s differs from %s by at most %.3g", stmt.channel, stmt.formula, worst)
    return errors


def limit_errors(limits: Dict[str, CertifiedLimit], oracle: Callable[[float], float]) -> Dict[str, float]:
    """Max abs error of each limit value against a scalar oracle of x"""
    errors = {}
    for module, limit in limits.items():
        if not isinstance(limit.value, GridFunction):
            raise DataValidationError(f"limit '{module}' is a real number; oracles are functions of x")
        points = limit.value.grid.points
        errors[module] = max(abs(float(v) - oracle(x)) for x, v in zip(points, limit.value.values))
    return errors


def limit_table(limits: Dict[str, CertifiedLimit]) -> List[dict]:
    """One row per limit module and grid point"""
    rows = []
    for module, limit in limits.items():
        if isinstance(limit.value, GridFunction):
            pairs = zip(limit.value.grid.points, limit.value.values)
        else:
            pairs = [(None, limit.value)]
        for x, value in pairs:
            rows.append({"module": module, "x": x, "value": float(value), "bound": limit.bound,
                         "gap": limit.empirical_gap, "certified": limit.certified})
    return rows
