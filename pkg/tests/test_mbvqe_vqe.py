
import numpy as np
import pytest

from mbvqe.mbqc import single_qubit_unitary_pattern, standardize
from mbvqe.models import (
    Hamiltonian,
    SchwingerParams,
    exact_ground,
    perturbation,
    toric_hamiltonian,
)
from mbvqe.vqe import (
    CSV_SCHEMA,
    NelderMeadOptimizer,
    OptimizationError,
    OptimizerConfig,
    PatternCost,
    SpsaOptimizer,
    minimize,
    points_to_csv,
    relative_difference,
    run_grid,
    run_schwinger,
    run_toric,
    trace_to_csv,
)


def quadratic(theta):
    return (theta[0] - 1) ** 2 + theta[1] ** 2


def scaled(x, index):
    return x * 10 + index


def test_optimizer_config_validation():
    assert OptimizerConfig(implementation="spsa").method == "spsa"
    assert isinstance(OptimizerConfig().optimizer(), NelderMeadOptimizer)
    assert isinstance(OptimizerConfig(implementation="spsa").optimizer(), SpsaOptimizer)
    for options in ({"tolerance": 0}, {"max_iterations": 0}, {"speed": 3}):
        with pytest.raises(OptimizationError):
            OptimizerConfig(**options)
    for implementation in ("mbvqe.vqe.RunTrace", "nowhere"):
        with pytest.raises(OptimizationError):
            OptimizerConfig(implementation=implementation).optimizer()
    assert OptimizerConfig(seed=3).replace(restarts=0).seed == 3


def test_minimize_quadratic():
    trace = minimize(quadratic, OptimizerConfig(restarts=0), 2)
    assert np.allclose(trace.best_theta, [1, 0], atol=1e-6)
    best = trace.best_energies
    assert all(b <= a for a, b in zip(best, best[1:]))
    assert trace.snapshots[0] == [0.0, 0.0]


def test_spsa_is_seeded():
    config = OptimizerConfig(implementation="spsa", max_iterations=600, seed=4)
    first = minimize(quadratic, config, 2)
    second = minimize(quadratic, config, 2)
    assert first.best_energy < quadratic([0, 0])
    assert [r[1] for r in first.rows] == [r[1] for r in second.rows]


def test_nonfinite_cost_aborts():
    with pytest.raises(OptimizationError) as e:
        minimize(lambda theta: float("nan"), OptimizerConfig(), 2)
    assert e.value.error_code == "nonfinite"


def test_restarts_are_logged():
    # an unreachable reference forces every restart
    config = OptimizerConfig(restarts=2, max_iterations=200, seed=1)
    trace = minimize(quadratic, config, 2, reference=-1.0)
    assert trace.restart_seeds == [1001, 1002]


def test_single_qubit_cost_reaches_bloch_minimum():
    state = standardize(single_qubit_unitary_pattern(None, 0, None))
    cost = PatternCost(state, Hamiltonian(1).add_word(1.0, "Y"))
    assert cost.num_parameters == 1
    trace = minimize(cost, OptimizerConfig(restarts=0), 1)
    assert trace.best_energy == pytest.approx(-1, abs=1e-8)


def test_relative_difference():
    assert relative_difference(-7.9, -8.0) == pytest.approx(0.0125)
    assert relative_difference(1e-3, 0.0) == pytest.approx(1e-3)


def test_schwinger_sweep_small():
    config = OptimizerConfig(max_iterations=400, restarts=0, seed=2)
    mus = [-1.0, 0.0, 1.0]
    sweep = run_schwinger(SchwingerParams(2), 1, mus, config, cross_check=True)
    assert len(sweep.points) == 3
    for point in sweep.points:
        assert point.energy >= point.reference - 1e-10
        assert 0 <= point.extra["order_parameter"] <= 1 + 1e-12
        assert point.extra["backend_difference"] < 1e-10
        assert 0 <= point.infidelity <= 1
    again = run_schwinger(SchwingerParams(2), 1, mus, config, cross_check=True)
    assert [p.energy for p in again.points] == [p.energy for p in sweep.points]
    csv_text = points_to_csv(sweep.points, {"SEED": 2})
    lines = csv_text.splitlines()
    assert lines[0] == "# {}".format(CSV_SCHEMA)
    assert lines[1].startswith("# config: ")
    assert lines[2].startswith("x,energy,reference,relative_error,infidelity")
    assert len(lines) == 6
    trace = sweep.points[0].trace
    assert trace_to_csv(trace, {}).count("\n") == 3 + trace.evaluations


@pytest.mark.asyncio
async def test_grid_runs_on_worker_pool():
    results = await run_grid(scaled, [0.5, 1.5, 2.5], 2)
    assert results == [5.0, 16.0, 27.0]


@pytest.mark.slow
@pytest.mark.parametrize("strength", [0.1, 1.0, 3.0])
def test_single_qubit_field_is_exact(decorated_toric, toric_lattice, strength):
    state, _ = decorated_toric
    weights = np.zeros(8)
    weights[0] = strength
    field = perturbation(toric_lattice, weights)
    hamiltonian = toric_hamiltonian(toric_lattice) + field
    reference = exact_ground(hamiltonian).energy
    config = OptimizerConfig(max_iterations=20000, tolerance=1e-14, seed=3)
    cost = PatternCost(state, hamiltonian)
    trace = minimize(cost, config, state.num_slots, reference)
    assert relative_difference(trace.best_energy, reference) < 1e-8


def test_pair_scenario_adds_a_virtual_edge(toric_lattice):
    config = OptimizerConfig(seed=1, max_iterations=20, restarts=1)
    sweep = run_toric(toric_lattice, "pair", [0.5], config)
    assert len(sweep.metadata["decorated_edges"]) == 10
    assert len(sweep.state.nodes) == 48
    assert sweep.state.heralds
    point = sweep.points[0]
    assert point.energy >= point.reference - 1e-10


@pytest.mark.slow
def test_uniform_sweep_beats_baselines(toric_lattice):
    strengths = list(np.linspace(0, 3, 13))
    sweep = run_toric(toric_lattice, "uniform", strengths, OptimizerConfig(seed=1))
    for point in sweep.points:
        assert point.energy <= point.extra["ansatz_energy"] + 1e-9
        assert point.energy <= point.extra["product_energy"] + 1e-9
        assert point.energy >= point.reference - 1e-10
    assert sweep.max_infidelity <= 0.1


@pytest.mark.slow
def test_strong_single_qubit_scenario(toric_lattice):
    strengths = list(np.linspace(0.25, 3, 6))
    sweep = run_toric(toric_lattice, "single", strengths, OptimizerConfig(seed=1))
    assert sweep.max_infidelity <= 2e-2


@pytest.mark.slow
def test_schwinger_depth_improves_approximation():
    mus = [-2.0, -1.0, -0.7, -0.4, 0.0, 1.0]
    config = OptimizerConfig(max_iterations=8000, seed=5)
    shallow = run_schwinger(SchwingerParams(4), 1, mus, config)
    deep = run_schwinger(SchwingerParams(4), 3, mus, config, cross_check=True)
    for point in deep.points:
        reference = point.extra["reference_order_parameter"]
        assert abs(point.extra["order_parameter"] - reference) <= 0.05
        assert point.extra["backend_difference"] < 1e-10
    assert deep.max_infidelity <= shallow.max_infidelity
    at_transition = deep.points[mus.index(-0.7)]
    assert at_transition.relative_error <= 1e-3
