import asyncio
import csv
import functools
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import scipy.optimize

from mbvqe.graphstate import ansatz_state, decorate_all
from mbvqe.mbqc import CustomState, compile_layers, standardize
from mbvqe.models import (
    MAX_DENSE_QUBITS,
    Hamiltonian,
    Scenario,
    SchwingerParams,
    ToricLattice,
    exact_ground,
    ground_space_fidelity,
    logical_state,
    order_parameter,
    perturbation,
    scenario_weights,
    schwinger_hamiltonian,
    toric_hamiltonian,
)
from mbvqe.sim import (
    BranchPolicy,
    StateVector,
    expectation,
    simulate_circuit,
    simulate_pattern,
)
from mbvqe.util import class_from_dotted_string

CSV_SCHEMA = "mbvqe-csv v1"
RESTART_THRESHOLD = 1e-3


class OptimizationError(Exception):
    def __init__(self, error_code, message):
        super().__init__(message)
        self.error_code = error_code
        self.message = message


class OptimizerConfig:
    _methods = {
        "nelder_mead": "mbvqe.vqe.NelderMeadOptimizer",
        "spsa": "mbvqe.vqe.SpsaOptimizer",
    }
    _default_map = {
        "implementation": "mbvqe.vqe.NelderMeadOptimizer",
        "max_iterations": 4000,
        "tolerance": 1e-10,
        "restarts": 3,
        "initial": None,
        "initial_step": 0.5,
        "snapshot_every": 100,
    }

    def __init__(self, seed: int = 0, **options):
        unknown = set(options) - set(self._default_map)
        if unknown:
            raise OptimizationError(
                "config", "Unknown optimizer options {}".format(sorted(unknown))
            )
        values = dict(self._default_map, **options)
        self.implementation = self._methods.get(
            values["implementation"], values["implementation"]
        )
        self.max_iterations = int(values["max_iterations"])
        self.tolerance = float(values["tolerance"])
        self.restarts = int(values["restarts"])
        self.initial = values["initial"]
        self.initial_step = float(values["initial_step"])
        self.snapshot_every = int(values["snapshot_every"])
        self.seed = int(seed)
        if self.max_iterations <= 0:
            raise OptimizationError("config", "The iteration budget must be positive")
        if not self.tolerance > 0:
            raise OptimizationError("config", "The tolerance must be positive")
        if self.restarts < 0:
            raise OptimizationError("config", "Restarts must not be negative")

    @property
    def method(self) -> str:
        for name, path in self._methods.items():
            if path == self.implementation:
                return name
        return self.implementation

    def replace(self, **changes) -> "OptimizerConfig":
        values = self.serialize()
        values.update(changes)
        return OptimizerConfig(**values)

    def initial_parameters(self, size: int) -> np.ndarray:
        if self.initial is None:
            return np.zeros(size)
        initial = np.asarray(self.initial, dtype=float).reshape(-1)
        if len(initial) != size:
            raise OptimizationError(
                "argument",
                "Initial parameters have length {}, expected {}".format(
                    len(initial), size
                ),
            )
        return initial.copy()

    def optimizer(self) -> "OptimizerBase":
        try:
            optimizer_class = class_from_dotted_string(
                self.implementation, OptimizerBase
            )
        except ImportError as e:
            raise OptimizationError("config", str(e))
        return optimizer_class(self)

    def serialize(self):
        return {
            "implementation": self.implementation,
            "max_iterations": self.max_iterations,
            "tolerance": self.tolerance,
            "restarts": self.restarts,
            "initial": (
                None if self.initial is None else [float(v) for v in self.initial]
            ),
            "initial_step": self.initial_step,
            "snapshot_every": self.snapshot_every,
            "seed": self.seed,
        }


class RunTrace:
    """Every cost evaluation of one optimization, with the running best."""

    def __init__(self, snapshot_every: int = 100):
        self.snapshot_every = snapshot_every
        self.rows = []
        self.snapshots: Dict[int, List[float]] = {}
        self.best_energy = math.inf
        self.best_theta: Optional[np.ndarray] = None
        self.restart_seeds: List[int] = []
        self.metrics: Dict[str, float] = {}

    def record(self, theta: np.ndarray, energy: float):
        evaluation = len(self.rows)
        if energy < self.best_energy:
            self.best_energy = energy
            self.best_theta = np.array(theta, dtype=float)
        self.rows.append((evaluation, energy, self.best_energy))
        if evaluation % self.snapshot_every == 0:
            self.snapshots[evaluation] = [float(v) for v in theta]

    @property
    def best_energies(self) -> List[float]:
        return [row[2] for row in self.rows]

    @property
    def evaluations(self):
        return len(self.rows)

    def serialize(self):
        return {
            "evaluations": self.evaluations,
            "best_energy": self.best_energy,
            "best_theta": [float(v) for v in self.best_theta],
            "restart_seeds": self.restart_seeds,
            "metrics": self.metrics,
        }

    def __repr__(self):
        return "<RunTrace evaluations={} best={}>".format(
            self.evaluations, self.best_energy
        )


class OptimizerBase:
    """Drives a cost function; results are read off the RunTrace it feeds."""

    def __init__(self, config: OptimizerConfig):
        self.config = config

    def run(
        self,
        cost: Callable[[np.ndarray], float],
        x0: np.ndarray,
        rng: np.random.Generator,
    ):
        raise NotImplementedError()


class NelderMeadOptimizer(OptimizerBase):
    def run(self, cost, x0, rng):
        # scipy's default simplex is far too small around zero
        simplex = np.vstack([x0, x0 + self.config.initial_step * np.eye(len(x0))])
        scipy.optimize.minimize(
            cost,
            x0,
            method="Nelder-Mead",
            options={
                "maxfev": self.config.max_iterations,
                "maxiter": self.config.max_iterations,
                "xatol": 1e-10,
                "fatol": self.config.tolerance,
                "adaptive": True,
                "initial_simplex": simplex,
            },
        )


class SpsaOptimizer(OptimizerBase):
    """Simultaneous perturbation stochastic approximation with Spall's gains."""

    a0 = 0.2
    c0 = 0.1
    big_a = 10
    alpha = 0.602
    gamma = 0.101

    def run(self, cost, x0, rng):
        theta = np.array(x0, dtype=float)
        for k in range(max(1, self.config.max_iterations // 3)):
            a = self.a0 / (self.big_a + k + 1) ** self.alpha
            c = self.c0 / (k + 1) ** self.gamma
            delta = 2 * rng.integers(0, 2, size=len(theta)) - 1
            difference = cost(theta + c * delta) - cost(theta - c * delta)
            gradient = difference * delta / (2 * c)
            step = a * gradient
            theta = theta - step
            cost(theta)
            if np.max(np.abs(step)) < self.config.tolerance:
                break


def relative_difference(energy: float, reference: float) -> float:
    if abs(reference) < 1e-12:
        return abs(energy - reference)
    return abs(energy - reference) / abs(reference)


def minimize(
    cost: Callable[[np.ndarray], float],
    config: OptimizerConfig,
    num_parameters: int,
    reference: Optional[float] = None,
    initial: Optional[np.ndarray] = None,
) -> RunTrace:
    """Optimize ``cost`` from the configured start, restarting near the best point
    while the relative error against ``reference`` exceeds 1e-3."""
    trace = RunTrace(config.snapshot_every)

    def evaluate(theta):
        value = float(cost(theta))
        if not math.isfinite(value):
            raise OptimizationError(
                "nonfinite", "Cost is {} at θ={}".format(value, list(theta))
            )
        trace.record(theta, value)
        return value

    optimizer = config.optimizer()
    if initial is None:
        x0 = config.initial_parameters(num_parameters)
    else:
        x0 = np.array(initial, dtype=float)
    if num_parameters == 0:
        evaluate(x0)
        return trace
    optimizer.run(evaluate, x0, np.random.default_rng(config.seed * 1000))
    for attempt in range(1, config.restarts + 1):
        if reference is None:
            break
        if relative_difference(trace.best_energy, reference) <= RESTART_THRESHOLD:
            break
        seed = config.seed * 1000 + attempt
        rng = np.random.default_rng(seed)
        trace.restart_seeds.append(seed)
        logging.info(
            "Restart {} (seed {}) from best energy {}".format(
                attempt, seed, trace.best_energy
            )
        )
        start = trace.best_theta + rng.normal(0, 0.1, size=num_parameters)
        optimizer.run(evaluate, start, rng)
    logging.debug(
        "Optimizer {} finished after {} evaluations at {}".format(
            config.method, trace.evaluations, trace.best_energy
        )
    )
    return trace


def output_register(state: StateVector, outputs: Sequence[int]) -> StateVector:
    """Relabel the output qubits of a pattern as register qubits 0..n-1."""
    return StateVector(range(len(outputs)), state.reorder(list(outputs)).amplitudes)


class PatternCost:
    """Energy of the corrected output of a deterministic custom state."""

    def __init__(self, state: CustomState, hamiltonian: Hamiltonian):
        self.state = state
        self.hamiltonian = hamiltonian

    @property
    def num_parameters(self):
        return self.state.num_slots

    def output_state(self, theta) -> StateVector:
        report = simulate_pattern(self.state, theta, BranchPolicy.zero())
        return output_register(report.output_state, self.state.outputs)

    def __call__(self, theta) -> float:
        return expectation(self.output_state(theta), self.hamiltonian)


class CircuitCost:
    """Same ansatz executed gate by gate."""

    def __init__(self, s: int, k: int, hamiltonian: Hamiltonian):
        self.s = s
        self.k = k
        self.hamiltonian = hamiltonian

    @property
    def num_parameters(self):
        return 2 * self.k * self.s

    def output_state(self, theta) -> StateVector:
        return simulate_circuit(self.s, self.k, theta)

    def __call__(self, theta) -> float:
        return expectation(self.output_state(theta), self.hamiltonian)


class PointResult:
    """Outcome of one grid point of a sweep."""

    def __init__(
        self, x, trace: RunTrace, reference: float, infidelity: float, **extra
    ):
        self.x = float(x)
        self.trace = trace
        self.energy = trace.best_energy
        self.reference = reference
        self.relative_error = relative_difference(self.energy, reference)
        self.infidelity = max(0.0, infidelity)
        self.extra = extra
        trace.metrics.update(
            relative_error=self.relative_error, infidelity=self.infidelity, **extra
        )

    def row(self) -> Dict[str, float]:
        return dict(
            x=self.x,
            energy=self.energy,
            reference=self.reference,
            relative_error=self.relative_error,
            infidelity=self.infidelity,
            **self.extra,
        )

    def __repr__(self):
        return "<PointResult x={} dE/E={:.3e} 1-F={:.3e}>".format(
            self.x, self.relative_error, self.infidelity
        )


async def run_grid(job: Callable, xs: Sequence[float], jobs: int) -> List[PointResult]:
    """Run independent grid points on a process pool, keeping the grid order."""
    loop = asyncio.get_event_loop()
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [
            loop.run_in_executor(pool, functools.partial(job, x, index))
            for index, x in enumerate(xs)
        ]
        return list(await asyncio.gather(*futures))


def _sweep(job: Callable, xs: Sequence[float], jobs: int) -> List[PointResult]:
    if jobs > 1:
        return asyncio.run(run_grid(job, xs, jobs))
    results = []
    warm_start = None
    for index, x in enumerate(xs):
        result = job(x, index, initial=warm_start)
        warm_start = result.trace.best_theta
        results.append(result)
    return results


class SweepResult:
    def __init__(self, points: List[PointResult], state: CustomState, **metadata):
        self.points = points
        self.state = state
        self.metadata = metadata

    @property
    def max_infidelity(self) -> float:
        return max(p.infidelity for p in self.points)

    def serialize(self):
        return {
            "metadata": self.metadata,
            "qubits": len(self.state.nodes),
            "slots": self.state.num_slots,
            "points": [dict(p.row(), trace=p.trace.serialize()) for p in self.points],
        }


def default_pair(ansatz: CustomState):
    """First pair of output vertices that the ansatz graph leaves unconnected."""
    graph = ansatz.source.graph
    outputs = sorted(ansatz.outputs)
    for index, a in enumerate(outputs):
        for b in outputs[index + 1 :]:
            if not graph.has_edge(a, b):
                return a, b
    raise OptimizationError("argument", "The ansatz graph is complete")


def _toric_point(lattice, state, scenario, pair, config, strength, index, initial=None):
    n = lattice.num_qubits
    weights = scenario_weights(
        lattice, scenario, strength, np.random.default_rng([config.seed, index]), pair
    )
    hamiltonian = toric_hamiltonian(lattice) + perturbation(lattice, weights)
    ground = exact_ground(hamiltonian)
    cost = PatternCost(state, hamiltonian)
    trace = minimize(cost, config, cost.num_parameters, ground.energy, initial)
    final = cost.output_state(trace.best_theta)
    ansatz = StateVector(range(n), logical_state(lattice, 0, 0).to_statevector())
    product = StateVector.basis(range(n), [1] * n)
    result = PointResult(
        strength,
        trace,
        ground.energy,
        1 - ground_space_fidelity(ground, final),
        ansatz_energy=expectation(ansatz, hamiltonian),
        product_energy=expectation(product, hamiltonian),
        degeneracy=ground.degeneracy,
    )
    logging.info("Toric point λ={}: {}".format(strength, result))
    return result


def run_toric(
    lattice: ToricLattice,
    scenario,
    strengths: Sequence[float],
    config: OptimizerConfig,
    pair=None,
    jobs: int = 1,
) -> SweepResult:
    """MB-VQE on the decorated |0,0>_L custom state over a sweep of λ."""
    scenario = Scenario(scenario)
    if lattice.num_qubits > MAX_DENSE_QUBITS:
        raise OptimizationError(
            "size", "{} is too large for exact references".format(lattice)
        )
    ansatz = ansatz_state(logical_state(lattice, 0, 0))
    extra_pairs = []
    if scenario == Scenario.PAIR:
        pair = tuple(pair) if pair is not None else default_pair(ansatz)
        if not ansatz.source.graph.has_edge(*pair):
            extra_pairs.append(pair)
    state, edges = decorate_all(ansatz, extra_pairs)
    job = functools.partial(
        _toric_point, lattice, state, scenario, pair or (0, 3), config
    )
    points = _sweep(job, strengths, jobs)
    return SweepResult(
        points,
        state,
        experiment="toric",
        lattice=[lattice.nx, lattice.ny],
        scenario=scenario.value,
        pair=list(pair) if pair else None,
        decorated_edges=[list(e) for e in edges],
    )


def _schwinger_point(params, state, k, config, cross_check, mu, index, initial=None):
    s = params.s
    hamiltonian = schwinger_hamiltonian(params.with_mu(mu))
    ground = exact_ground(hamiltonian)
    cost = PatternCost(state, hamiltonian)
    trace = minimize(cost, config, cost.num_parameters, ground.energy, initial)
    final = cost.output_state(trace.best_theta)
    extra = dict(
        order_parameter=order_parameter(final, s),
        reference_order_parameter=order_parameter(ground.state, s),
    )
    if cross_check:
        circuit_energy = CircuitCost(s, k, hamiltonian)(trace.best_theta)
        extra["backend_difference"] = abs(circuit_energy - trace.best_energy)
    result = PointResult(
        mu, trace, ground.energy, 1 - ground_space_fidelity(ground, final), **extra
    )
    logging.info("Schwinger point K={} μ={}: {}".format(k, mu, result))
    return result


def run_schwinger(
    params: SchwingerParams,
    k: int,
    mus: Sequence[float],
    config: OptimizerConfig,
    cross_check: bool = False,
    jobs: int = 1,
) -> SweepResult:
    """MB-VQE on the standardized K-layer custom state over a μ grid."""
    state = standardize(compile_layers(params.s, k))
    job = functools.partial(_schwinger_point, params, state, k, config, cross_check)
    points = _sweep(job, mus, jobs)
    return SweepResult(
        points, state, experiment="schwinger", layers=k, params=params.serialize()
    )


def points_to_csv(points: Sequence[PointResult], echo: Dict) -> str:
    """One row per grid point, after a versioned header and the config echo."""
    stream = io.StringIO()
    stream.write("# {}\n".format(CSV_SCHEMA))
    stream.write("# config: {}\n".format(json.dumps(echo, sort_keys=True)))
    columns = list(points[0].row()) if points else ["x"]
    writer = csv.DictWriter(stream, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for point in points:
        writer.writerow(point.row())
    return stream.getvalue()


def trace_to_csv(trace: RunTrace, echo: Dict) -> str:
    """One row per cost evaluation."""
    stream = io.StringIO()
    stream.write("# {}\n".format(CSV_SCHEMA))
    stream.write("# config: {}\n".format(json.dumps(echo, sort_keys=True)))
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["evaluation", "energy", "best_energy"])
    writer.writerows(trace.rows)
    return stream.getvalue()
