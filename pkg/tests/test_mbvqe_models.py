import itertools

import numpy as np
import pytest

from mbvqe.models import (
    Hamiltonian,
    ModelError,
    SchwingerParams,
    ToricLattice,
    exact_ground,
    ground_space_fidelity,
    logical_state,
    order_parameter,
    perturbation,
    power_iteration,
    scenario_weights,
    schwinger_hamiltonian,
    toric_hamiltonian,
)
from mbvqe.sim import StateVector, expectation, fidelity
from mbvqe.stabilizer import PauliString


def _product(operators):
    result = PauliString.identity(operators[0].num_qubits)
    for op in operators:
        result = result * op
    return result


def test_lattice_operators(toric_lattice):
    assert toric_lattice.num_qubits == 8
    assert len(toric_lattice.stars) == len(toric_lattice.plaquettes) == 4
    identity = PauliString.identity(8)
    assert _product(toric_lattice.stars) == identity
    assert _product(toric_lattice.plaquettes) == identity
    stabilizers = toric_lattice.stars + toric_lattice.plaquettes
    logicals = [toric_lattice.logical_z(1), toric_lattice.logical_z(2)]
    logicals += [toric_lattice.logical_x(1), toric_lattice.logical_x(2)]
    for a, b in itertools.combinations(stabilizers, 2):
        assert a.commutes(b)
    for logical in logicals:
        assert all(logical.commutes(s) for s in stabilizers)
    assert not toric_lattice.logical_z(1).commutes(toric_lattice.logical_x(1))
    assert toric_lattice.logical_z(1).commutes(toric_lattice.logical_x(2))
    with pytest.raises(ModelError):
        ToricLattice(1, 3)


def test_toric_hamiltonian(toric_lattice):
    hamiltonian = toric_hamiltonian(toric_lattice)
    assert len(hamiltonian) == 8
    assert all(c == -1 for c, _ in hamiltonian.terms)
    assert all(hamiltonian.commutes(s) for s in toric_lattice.stars)
    ground = exact_ground(hamiltonian)
    assert ground.energy == pytest.approx(-8)
    assert ground.degeneracy == 4


def test_perturbation(toric_lattice):
    assert len(perturbation(toric_lattice, np.zeros(8))) == 0
    field = perturbation(toric_lattice, np.full(8, 0.7))
    ones = StateVector.basis(range(8), [1] * 8)
    assert expectation(ones, field) == pytest.approx(-8 * 0.7)
    with pytest.raises(ModelError):
        perturbation(toric_lattice, np.zeros(7))


def test_scenarios(toric_lattice):
    rng = np.random.default_rng(5)
    assert np.allclose(scenario_weights(toric_lattice, "uniform", 1.5), 1.5)
    gaussian = scenario_weights(toric_lattice, "gaussian", 2.0, rng)
    assert gaussian.shape == (8,) and not np.allclose(gaussian, 2.0)
    single = scenario_weights(toric_lattice, "single", 2.0, rng)
    assert single[0] == 2.0 and np.all(np.abs(single[1:] - 0.1) < 0.1)
    pair = scenario_weights(toric_lattice, "pair", 1.0, pair=(0, 1))
    assert list(np.flatnonzero(pair)) == [0, 1]
    with pytest.raises(ModelError):
        scenario_weights(toric_lattice, "gaussian", 1.0)
    with pytest.raises(ValueError):
        scenario_weights(toric_lattice, "sideways", 1.0)


def test_logical_states(toric_lattice):
    hamiltonian = toric_hamiltonian(toric_lattice)
    vectors = {}
    for r, t in itertools.product((0, 1), repeat=2):
        tableau = logical_state(toric_lattice, r, t)
        assert tableau.is_valid()
        assert tableau.expectation(toric_lattice.logical_z(1)) == (-1) ** r
        vectors[r, t] = StateVector(range(8), tableau.to_statevector())
        assert expectation(vectors[r, t], hamiltonian) == pytest.approx(-8)
    for a, b in itertools.combinations(vectors, 2):
        assert fidelity(vectors[a], vectors[b]) < 1e-10


def test_logical_state_is_unique_ground_state(toric_lattice):
    logicals = [(-1.0, toric_lattice.logical_z(1)), (-1.0, toric_lattice.logical_z(2))]
    hamiltonian = toric_hamiltonian(toric_lattice) + Hamiltonian(8, logicals)
    ground = exact_ground(hamiltonian)
    assert ground.degeneracy == 1
    logical = logical_state(toric_lattice, 0, 0)
    expected = StateVector(range(8), logical.to_statevector())
    assert fidelity(expected, ground.state) == pytest.approx(1)


def test_schwinger_two_sites():
    hamiltonian = schwinger_hamiltonian(SchwingerParams(2, j=1, w=1, mu=0))
    assert hamiltonian.weights == {"ZI": -0.5, "XX": 0.5, "YY": 0.5}


def test_schwinger_long_range_weights():
    weights = schwinger_hamiltonian(SchwingerParams(4, j=1, w=1, mu=0)).weights
    assert weights["ZZII"] == pytest.approx(1.0)
    assert weights["ZIZI"] == pytest.approx(0.5)
    assert weights["IZZI"] == pytest.approx(0.5)
    assert "ZIIZ" not in weights


def test_schwinger_params():
    params = SchwingerParams(4, mu=0.3, a=0.5, g=2.0)
    assert params.j == pytest.approx(1.0)
    assert params.w == pytest.approx(1.0)
    assert params.with_mu(-1).mu == -1 and params.with_mu(-1).a == 0.5
    with pytest.raises(ModelError):
        SchwingerParams(3)


def test_order_parameter_limits():
    state = StateVector.basis(range(4), [1, 0, 1, 0])
    assert order_parameter(state, 4) == pytest.approx(1)
    state = StateVector.basis(range(4), [0, 1, 0, 1])
    assert order_parameter(state, 4) == pytest.approx(0)
    rng = np.random.default_rng(9)
    for _ in range(10):
        state = StateVector(range(4), rng.normal(size=16) + 1j * rng.normal(size=16))
        assert -1e-12 <= order_parameter(state, 4) <= 1 + 1e-12
    with pytest.raises(ModelError):
        order_parameter(StateVector.basis(range(2), [0, 1]), 4)


def test_order_parameter_transition():
    mus = np.linspace(-3, 3, 25)
    curve = []
    for mu in mus:
        ground = exact_ground(schwinger_hamiltonian(SchwingerParams(4, mu=mu)))
        curve.append(order_parameter(ground.state, 4))
    assert curve[0] > 0.7 and curve[-1] < 0.3
    assert curve[0] > curve[12] > curve[-1]
    slopes = -np.diff(curve)
    steepest = mus[int(np.argmax(slopes))]
    assert -1.0 <= steepest <= -0.4


def test_exact_ground_small_cases():
    ground = exact_ground(Hamiltonian(1).add_word(1.0, "Z"))
    assert ground.energy == pytest.approx(-1)
    assert fidelity(ground.state, StateVector.basis([0], [1])) == pytest.approx(1)
    with pytest.raises(ModelError) as e:
        exact_ground(Hamiltonian(13))
    assert e.value.error_code == "size"


def test_power_iteration_cross_check():
    hamiltonian = schwinger_hamiltonian(SchwingerParams(4, mu=-0.7))
    expected = exact_ground(hamiltonian).energy
    assert power_iteration(hamiltonian) == pytest.approx(expected, abs=1e-6)


def test_ground_space_fidelity(toric_lattice):
    ground = exact_ground(toric_hamiltonian(toric_lattice))
    state = StateVector(range(8), logical_state(toric_lattice, 1, 0).to_statevector())
    assert ground_space_fidelity(ground, state) == pytest.approx(1)


def test_hamiltonian_serialization():
    hamiltonian = Hamiltonian(3).add_word(0.5, "XIZ").add_word(-1.0, "-YYI")
    assert hamiltonian.serialize() == [[0.5, "XIZ"], [1.0, "YYI"]]
    restored = Hamiltonian.deserialize(hamiltonian.serialize())
    assert restored.serialize() == hamiltonian.serialize()
    with pytest.raises(ModelError):
        Hamiltonian(2).add_word(1.0, "iXZ")
