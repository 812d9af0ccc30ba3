import logging
import math
from typing import Callable, Dict, List, Tuple

import numpy as np

from mbvqe.graphstate import (
    ansatz_state,
    decorate_all,
    decorated_edge_state,
    decoration_pattern,
)
from mbvqe.mbqc import CustomState, compile_layers, resource_report, standardize
from mbvqe.models import ToricLattice, logical_state
from mbvqe.sim import (
    BranchPolicy,
    all_branches,
    fidelity,
    simulate_circuit,
    simulate_pattern,
)
from mbvqe.stabilizer import StabilizerTableau
from mbvqe.vqe import output_register

EXHAUSTIVE_BRANCH_LIMIT = 8
SAMPLED_BRANCHES = 50


def determinism_cases() -> List[Tuple[str, CustomState]]:
    path = StabilizerTableau.graph_state(3, [(0, 1), (1, 2)])
    return [
        ("decorated edge", standardize(decoration_pattern())),
        ("S=4 K=1", standardize(compile_layers(4, 1))),
        ("S=4 K=2", standardize(compile_layers(4, 2))),
        ("decorated path", decorate_all(ansatz_state(path))[0]),
    ]


def _branches(state: CustomState, theta, rng):
    if len(state.order) - len(state.heralds) <= EXHAUSTIVE_BRANCH_LIMIT:
        return [report for _, report in all_branches(state, theta)]
    seeds = rng.integers(0, 2**32, size=SAMPLED_BRANCHES)
    return [
        simulate_pattern(state, theta, BranchPolicy.random(int(seed))) for seed in seeds
    ]


def check_determinism(trials: int, rng: np.random.Generator) -> List[str]:
    """Every outcome branch of a custom state yields the same corrected output."""
    failures = []
    for label, state in determinism_cases():
        for _ in range(max(1, trials // 10)):
            theta = rng.uniform(0, 2 * math.pi, size=state.num_slots)
            reports = _branches(state, theta, rng)
            reference = reports[0].output_state
            worst = min(fidelity(reference, r.output_state) for r in reports)
            if worst < 1 - 1e-10:
                failures.append(
                    "determinism: {} branches disagree (fidelity {:.3e})".format(
                        label, worst
                    )
                )
                break
    return failures


def check_decorated_edge(trials: int, rng: np.random.Generator) -> List[str]:
    """The standardized gadget reproduces the closed-form decorated edge."""
    state = standardize(decoration_pattern())
    failures = []
    for _ in range(trials):
        angles = rng.uniform(0, 2 * math.pi, size=4)
        output = simulate_pattern(state, angles).output_state
        value = fidelity(
            decorated_edge_state(angles), output_register(output, state.outputs)
        )
        if value < 1 - 1e-10:
            failures.append(
                "eq-s1: fidelity {:.3e} at angles {}".format(value, list(angles))
            )
    return failures


def check_backend_agreement(trials: int, rng: np.random.Generator) -> List[str]:
    """Gate-by-gate and measurement-based execution of the same layers agree."""
    failures = []
    for k in (1, 2, 3):
        state = standardize(compile_layers(4, k))
        for _ in range(max(1, trials // 5)):
            theta = rng.uniform(0, 2 * math.pi, size=state.num_slots)
            circuit = simulate_circuit(4, k, theta)
            pattern = output_register(
                simulate_pattern(state, theta).output_state, state.outputs
            )
            value = fidelity(circuit, pattern)
            if value < 1 - 1e-8:
                failures.append("backend: K={} fidelity {:.3e}".format(k, value))
                break
    return failures


def check_counts(trials: int, rng: np.random.Generator) -> List[str]:
    """Qubit and measurement counts of the standard custom states."""
    failures = []
    s = 4
    for k in (1, 2, 3):
        report = resource_report(standardize(compile_layers(s, k)), layers=(s, k))
        expected = {"qubits": s * (2 * k + 1), "rotated_measurements": 2 * k * s}
        for key, value in expected.items():
            if report[key] != value:
                failures.append(
                    "counts: S={} K={} has {} {}, expected {}".format(
                        s, k, report[key], key, value
                    )
                )
    toric, _ = decorate_all(ansatz_state(logical_state(ToricLattice(2, 2), 0, 0)))
    if len(toric.nodes) != 44:
        failures.append(
            "counts: decorated 2x2 toric state has {} qubits, expected 44".format(
                len(toric.nodes)
            )
        )
    return failures


SUITES: Dict[str, Callable[[int, np.random.Generator], List[str]]] = {
    "determinism": check_determinism,
    "eq-s1": check_decorated_edge,
    "backend": check_backend_agreement,
    "counts": check_counts,
}


def run_suites(suite: str = "all", trials: int = 20, seed: int = 0) -> List[str]:
    """Run one named suite (or all of them); returns the failure messages."""
    if suite != "all" and suite not in SUITES:
        raise KeyError(suite)
    names = list(SUITES) if suite == "all" else [suite]
    failures = []
    for name in names:
        found = SUITES[name](trials, np.random.default_rng(seed))
        outcome = "{} failures".format(len(found)) if found else "passed"
        logging.info("Suite {}: {}".format(name, outcome))
        failures += found
    return failures
