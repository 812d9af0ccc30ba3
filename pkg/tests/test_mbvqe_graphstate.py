import itertools
import math

import numpy as np
import pytest

from mbvqe.graphstate import (
    DecorationAngles,
    add_virtual_edge_and_decorate,
    ansatz_state,
    decorate_all,
    decorate_edge,
    decorated_edge_state,
    decoration_pattern,
    probabilistic_decoration_state,
    to_dot,
)
from mbvqe.mbqc import PatternError
from mbvqe.models import logical_state
from mbvqe.sim import (
    BranchPolicy,
    SimulationError,
    StateVector,
    fidelity,
    simulate_pattern,
)
from mbvqe.stabilizer import StabilizerTableau
from mbvqe.vqe import output_register


def _output(state, theta):
    return output_register(simulate_pattern(state, theta).output_state, state.outputs)


def test_raw_gadget_shape():
    raw = decoration_pattern()
    assert raw.outputs == [0, 1]
    assert len(raw.nodes) == 12
    assert len(raw.rotated) == 4
    assert raw.num_slots == 4


def test_standardized_gadget_keeps_four_auxiliaries(gadget_state):
    assert len(gadget_state.nodes) == 6
    assert len(gadget_state.rotated) == 4
    assert gadget_state.eliminated == 6


def test_closed_form_special_points():
    zero = decorated_edge_state([0, 0, 0, 0])
    assert np.allclose(zero.amplitudes, np.array([1, 1, 1, -1]) / 2)
    quarter = decorated_edge_state([0, 0, 0, math.pi / 2])
    assert np.allclose(quarter.amplitudes, np.array([1, 1j, 1, -1j]) / 2)
    with pytest.raises(SimulationError):
        decorated_edge_state([0, float("inf"), 0, 0])


def test_gadget_matches_closed_form(gadget_state, rng):
    for _ in range(100):
        angles = rng.uniform(0, 2 * math.pi, size=4)
        output = _output(gadget_state, angles)
        assert fidelity(decorated_edge_state(angles), output) > 1 - 1e-10


def test_probabilistic_variant_matches_closed_form(rng):
    for _ in range(20):
        angles = rng.uniform(0, 2 * math.pi, size=4)
        oracle = probabilistic_decoration_state(angles)
        assert fidelity(decorated_edge_state(angles), oracle) > 1 - 1e-10


def test_toric_ansatz_is_the_logical_state(toric_lattice, toric_ansatz):
    assert len(toric_ansatz.outputs) == 8
    assert len(toric_ansatz.edges) == 9
    logical = logical_state(toric_lattice, 0, 0)
    expected = StateVector(range(8), logical.to_statevector())
    assert fidelity(expected, _output(toric_ansatz, [])) > 1 - 1e-10


def test_decorated_toric_state(decorated_toric, toric_ansatz):
    state, edges = decorated_toric
    assert len(edges) == 9
    assert len(state.nodes) == 44
    assert state.num_slots == 36
    assert len(state.rotated) == 36
    # zero angles leave every edge a plain CZ
    assert fidelity(_output(toric_ansatz, []), _output(state, np.zeros(36))) > 1 - 1e-10


def test_decorate_single_edge(toric_ansatz):
    edge = toric_ansatz.edges[0]
    state = decorate_edge(toric_ansatz, edge)
    assert len(state.nodes) == 12
    assert state.num_slots == 4
    assert fidelity(_output(toric_ansatz, []), _output(state, np.zeros(4))) > 1 - 1e-10
    with pytest.raises(PatternError):
        decorate_edge(state, edge)


def test_virtual_edge(toric_ansatz):
    with pytest.raises(PatternError):
        add_virtual_edge_and_decorate(toric_ansatz, toric_ansatz.edges[0])
    with pytest.raises(PatternError):
        add_virtual_edge_and_decorate(toric_ansatz, (0, 0))
    state = add_virtual_edge_and_decorate(toric_ansatz, (0, 1))
    assert len(state.nodes) == 12
    # a zero-angle virtual edge still entangles like a CZ
    plain = _output(toric_ansatz, [])
    entangled = plain.apply([0, 1], np.diag([1, 1, 1, -1]))
    assert fidelity(entangled, _output(state, np.zeros(4))) > 1 - 1e-10


def test_decoration_angles():
    angles = DecorationAngles.from_parameters([(0, 4), (1, 3)], np.arange(8.0))
    assert list(angles[(1, 3)]) == [4, 5, 6, 7]
    assert np.allclose(angles.as_parameters(), np.arange(8.0))
    assert np.all(angles.reduced().angles < 2 * math.pi)
    with pytest.raises(PatternError):
        DecorationAngles([(0, 1)], [0, 0, float("nan"), 0])


def test_dot_export(decorated_toric):
    state, _ = decorated_toric
    dot = to_dot(state, "toric")
    assert dot.startswith("graph toric {")
    assert sum(1 for line in dot.splitlines() if "label=" in line) == 44


SHARED_VERTEX_GRAPHS = {
    "path": (3, [(0, 1), (1, 2)]),
    "triangle": (3, [(0, 1), (1, 2), (0, 2)]),
    "star": (4, [(0, 1), (0, 2), (0, 3)]),
    "square": (4, [(0, 1), (1, 2), (2, 3), (0, 3)]),
}


@pytest.fixture(scope="module", params=sorted(SHARED_VERTEX_GRAPHS))
def shared_vertex_states(request):
    n, edges = SHARED_VERTEX_GRAPHS[request.param]
    ansatz = ansatz_state(StabilizerTableau.graph_state(n, edges))
    return ansatz, decorate_all(ansatz)


def test_shared_vertex_decoration_at_zero_angles(shared_vertex_states):
    ansatz, (state, edges) = shared_vertex_states
    assert state.num_slots == 4 * len(edges)
    assert state.heralds
    zeros = np.zeros(state.num_slots)
    assert fidelity(_output(ansatz, []), _output(state, zeros)) > 1 - 1e-10


def test_shared_vertex_decoration_is_branch_independent(shared_vertex_states, rng):
    _, (state, _) = shared_vertex_states
    for trial in range(5):
        theta = rng.uniform(0, 2 * math.pi, size=state.num_slots)
        expected = _output(state, theta)
        report = simulate_pattern(state, theta, BranchPolicy.random(trial))
        output = output_register(report.output_state, state.outputs)
        assert fidelity(expected, output) > 1 - 1e-10


def test_decorated_toric_is_branch_independent(decorated_toric, rng):
    state, _ = decorated_toric
    assert state.heralds
    theta = rng.uniform(0, 2 * math.pi, size=state.num_slots)
    expected = _output(state, theta)
    for seed in range(2):
        report = simulate_pattern(state, theta, BranchPolicy.random(seed))
        output = output_register(report.output_state, state.outputs)
        assert fidelity(expected, output) > 1 - 1e-10


def test_single_gadgets_need_no_heralds(gadget_state, toric_ansatz):
    assert not gadget_state.heralds
    assert not decorate_edge(toric_ansatz, toric_ansatz.edges[0]).heralds


def test_virtual_edge_between_isolated_outputs():
    ansatz = ansatz_state(StabilizerTableau.graph_state(2, []))
    state = add_virtual_edge_and_decorate(ansatz, (0, 1))
    assert not state.heralds
    cz = StateVector([0, 1], np.array([1, 1, 1, -1]))
    assert fidelity(cz, _output(state, np.zeros(4))) > 1 - 1e-10
    plus = StateVector.plus([0, 1])
    assert fidelity(plus, _output(state, np.full(4, math.pi / 2))) > 1 - 1e-10


def test_decoration_cannot_reach_every_product_state():
    target = StateVector.basis([0, 1], [0, 1])
    grid = np.linspace(0, 2 * math.pi, 16, endpoint=False)
    best = 0.0
    for angles in itertools.product(grid, repeat=4):
        try:
            best = max(best, fidelity(target, decorated_edge_state(angles)))
        except SimulationError:
            continue
    assert best < 1 - 1e-6
