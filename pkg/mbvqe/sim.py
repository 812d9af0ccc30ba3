import logging
import math
import struct
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import scipy.sparse

from mbvqe.mbqc import Measurement, MeasurementPattern, brickwork_pairs, layer_slot
from mbvqe.stabilizer import GATE_MATRICES, PauliString


class SimulationError(Exception):
    def __init__(self, error_code, message):
        super().__init__(message)
        self.error_code = error_code
        self.message = message


PLUS = np.array([1, 1], dtype=complex) / math.sqrt(2)
CX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
_DUMP_MAGIC = b"MBVQSV01"


def rotation(axis: str, theta: float) -> np.ndarray:
    """exp(i θ P / 2) for P in {X, Y, Z}."""
    return math.cos(theta / 2) * np.eye(2) + 1j * math.sin(theta / 2) * GATE_MATRICES[
        axis
    ]


class StateVector:
    """Normalized amplitudes over ``qubits``; the first qubit is most significant."""

    def __init__(self, qubits: Iterable[int], amplitudes, normalize=True):
        self.qubits = list(qubits)
        amplitudes = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if len(set(self.qubits)) != len(self.qubits):
            raise SimulationError("argument", "Duplicate qubits {}".format(self.qubits))
        if len(amplitudes) != 2 ** len(self.qubits):
            raise SimulationError(
                "argument",
                "{} amplitudes do not match {} qubits".format(
                    len(amplitudes), len(self.qubits)
                ),
            )
        norm = np.linalg.norm(amplitudes)
        if not np.isfinite(norm) or norm < 1e-150:
            raise SimulationError("degenerate", "State has zero norm")
        self.amplitudes = amplitudes / norm if normalize else amplitudes

    @property
    def num_qubits(self):
        return len(self.qubits)

    @classmethod
    def plus(cls, qubits: Iterable[int]) -> "StateVector":
        qubits = list(qubits)
        return cls(qubits, np.ones(2 ** len(qubits)))

    @classmethod
    def basis(cls, qubits: Iterable[int], bits: Sequence[int]) -> "StateVector":
        qubits = list(qubits)
        amplitudes = np.zeros(2 ** len(qubits), dtype=complex)
        amplitudes[int("".join(str(b) for b in bits) or "0", 2)] = 1
        return cls(qubits, amplitudes)

    @classmethod
    def product(cls, qubits: Iterable[int], vectors: Sequence[np.ndarray]):
        amplitudes = np.ones(1, dtype=complex)
        for vector in vectors:
            amplitudes = np.kron(amplitudes, vector)
        return cls(qubits, amplitudes)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def reorder(self, qubits: Sequence[int]) -> "StateVector":
        if sorted(qubits) != sorted(self.qubits):
            raise SimulationError(
                "argument", "Cannot reorder {} as {}".format(self.qubits, qubits)
            )
        axes = [self.qubits.index(q) for q in qubits]
        return StateVector(qubits, np.transpose(self.tensor(), axes).reshape(-1))

    def apply(self, targets: Sequence[int], matrix: np.ndarray) -> "StateVector":
        register = Register.from_state(self)
        register.apply(targets, matrix)
        return register.state(self.qubits)

    def to_bytes(self) -> bytes:
        header = _DUMP_MAGIC + struct.pack("<I", self.num_qubits)
        header += struct.pack("<{}q".format(self.num_qubits), *self.qubits)
        return header + self.amplitudes.astype("<c8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "StateVector":
        if data[: len(_DUMP_MAGIC)] != _DUMP_MAGIC:
            raise SimulationError("argument", "Not an amplitude dump")
        offset = len(_DUMP_MAGIC)
        (count,) = struct.unpack_from("<I", data, offset)
        offset += 4
        qubits = struct.unpack_from("<{}q".format(count), data, offset)
        offset += 8 * count
        amplitudes = np.frombuffer(data[offset:], dtype="<c8").astype(complex)
        return cls(qubits, amplitudes)

    def __repr__(self):
        return "<StateVector qubits={}>".format(self.qubits)


class Register:
    """Active qubits of a running simulation, stored as a rank-n tensor."""

    def __init__(self):
        self.qubits: List[int] = []
        self.tensor = np.ones((), dtype=complex)

    @classmethod
    def from_state(cls, state: StateVector) -> "Register":
        register = cls()
        register.qubits = list(state.qubits)
        register.tensor = state.tensor().copy()
        return register

    def __contains__(self, qubit):
        return qubit in self.qubits

    def __len__(self):
        return len(self.qubits)

    def add(self, qubit: int, vector: np.ndarray = PLUS):
        if qubit in self.qubits:
            raise SimulationError(
                "argument", "Qubit {} is already active".format(qubit)
            )
        self.tensor = np.multiply.outer(self.tensor, vector)
        self.qubits.append(qubit)

    def apply(self, targets: Sequence[int], matrix: np.ndarray):
        axes = [self.qubits.index(t) for t in targets]
        k = len(targets)
        gate = np.asarray(matrix, dtype=complex).reshape((2,) * (2 * k))
        result = np.tensordot(gate, self.tensor, axes=(list(range(k, 2 * k)), axes))
        self.tensor = np.moveaxis(result, list(range(k)), axes)

    def apply_cz(self, a: int, b: int):
        index = [slice(None)] * len(self.qubits)
        index[self.qubits.index(a)] = 1
        index[self.qubits.index(b)] = 1
        self.tensor[tuple(index)] *= -1

    def branch_probability(self, qubit: int, bra: np.ndarray) -> float:
        axis = self.qubits.index(qubit)
        projected = np.tensordot(bra, self.tensor, axes=([0], [axis]))
        return float(np.vdot(projected, projected).real)

    def project(self, qubit: int, bra: np.ndarray) -> float:
        """Project ``qubit`` onto ``bra``, drop it and renormalize."""
        axis = self.qubits.index(qubit)
        projected = np.tensordot(bra, self.tensor, axes=([0], [axis]))
        probability = float(np.vdot(projected, projected).real)
        if probability < 1e-300:
            raise SimulationError(
                "degenerate", "Branch of qubit {} has zero probability".format(qubit)
            )
        self.tensor = projected / math.sqrt(probability)
        del self.qubits[axis]
        return probability

    def state(self, order: Sequence[int]) -> StateVector:
        return StateVector(self.qubits, self.tensor.reshape(-1)).reorder(order)


class BranchPolicy:
    class Kind(Enum):
        ZERO = 0
        RANDOM = 1
        GIVEN = 2

    def __init__(self, kind, seed=None, outcomes: Optional[Dict[int, int]] = None):
        self.kind = kind
        self.seed = seed
        self.outcomes = outcomes or {}
        self._rng = np.random.default_rng(seed)

    @classmethod
    def zero(cls):
        return cls(BranchPolicy.Kind.ZERO)

    @classmethod
    def random(cls, seed=None):
        return cls(BranchPolicy.Kind.RANDOM, seed=seed)

    @classmethod
    def given(cls, outcomes: Dict[int, int]):
        return cls(BranchPolicy.Kind.GIVEN, outcomes=outcomes)

    def choose(self, node: int, p0: float, p1: float) -> int:
        if self.kind == BranchPolicy.Kind.GIVEN:
            if node not in self.outcomes:
                raise SimulationError(
                    "argument", "No outcome given for {}".format(node)
                )
            outcome = int(self.outcomes[node]) & 1
            if (p1 if outcome else p0) < 1e-14:
                raise SimulationError(
                    "degenerate",
                    "Branch {}={} has zero probability".format(node, outcome),
                )
            return outcome
        if self.kind == BranchPolicy.Kind.RANDOM:
            return 0 if self._rng.random() < p0 / (p0 + p1) else 1
        return 0 if p0 > 1e-14 else 1


class SimReport:
    def __init__(self, output_state, branch_probability, peak_active_qubits, outcomes):
        self.output_state = output_state
        self.branch_probability = branch_probability
        self.peak_active_qubits = peak_active_qubits
        self.outcomes = outcomes

    def __repr__(self):
        return "<SimReport p={:.3g} peak={}>".format(
            self.branch_probability, self.peak_active_qubits
        )


def measurement_bra(m: Measurement, angle: Optional[float], outcome: int):
    if m.basis == Measurement.Basis.Z:
        bra = np.zeros(2, dtype=complex)
        bra[outcome] = 1
        return bra
    return np.array([1, (-1) ** outcome * np.exp(-1j * angle)]) / math.sqrt(2)


def _check_parameters(pattern: MeasurementPattern, theta):
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if len(theta) != pattern.num_slots:
        raise SimulationError(
            "argument",
            "Expected {} parameters, got {}".format(pattern.num_slots, len(theta)),
        )
    if not np.all(np.isfinite(theta)):
        raise SimulationError("nonfinite", "Parameters must be finite")
    return theta


def _run(
    pattern: MeasurementPattern,
    theta: np.ndarray,
    choose,
    adapt: bool,
    input_state: Optional[StateVector],
    lazy: bool,
) -> SimReport:
    register = Register()
    if input_state is not None:
        register = Register.from_state(input_state.reorder(pattern.inputs))
    else:
        for node in pattern.inputs:
            register.add(node)
    pending = {tuple(sorted(e)) for e in pattern.edges}

    def entangle(node):
        for neighbor in pattern.graph.neighbors(node):
            edge = tuple(sorted((node, neighbor)))
            if edge not in pending:
                continue
            for qubit in edge:
                if qubit not in register:
                    register.add(qubit)
            register.apply_cz(*edge)
            pending.remove(edge)

    if not lazy:
        for node in pattern.nodes:
            if node not in register:
                register.add(node)
        for edge in sorted(pending):
            register.apply_cz(*edge)
        pending.clear()

    outcomes: Dict[int, int] = {}
    zeros = {node: 0 for node in pattern.nodes}
    probability = 1.0
    peak = len(register)
    for m in pattern.measurements:
        if m.node not in register:
            register.add(m.node)
        entangle(m.node)
        peak = max(peak, len(register))
        if not m.frame.is_identity:
            register.apply([m.node], m.frame.matrix)
        known = outcomes if adapt else zeros
        angle = None if m.basis == Measurement.Basis.Z else m.angle(theta, known)
        flip = m.t_domain.evaluate(known) if m.basis == Measurement.Basis.Z else 0
        bras = [measurement_bra(m, angle, s ^ flip) for s in (0, 1)]
        p0 = register.branch_probability(m.node, bras[0])
        p1 = register.branch_probability(m.node, bras[1])
        herald = pattern.heralds.get(m.node) if adapt else None
        if herald is None:
            outcome = choose(m.node, p0, p1)
        else:
            outcome = herald.substitute(m.node, 0).evaluate(outcomes)
            if (p1 if outcome else p0) < 1e-14:
                raise SimulationError(
                    "degenerate",
                    "Herald {}={} has zero probability".format(m.node, outcome),
                )
        probability *= register.project(m.node, bras[outcome])
        outcomes[m.node] = outcome

    for edge in sorted(pending):
        for qubit in edge:
            if qubit not in register:
                register.add(qubit)
        register.apply_cz(*edge)
    for output in pattern.outputs:
        if output not in register:
            register.add(output)
    peak = max(peak, len(register))

    for output in pattern.outputs:
        correction = pattern.output_corrections[output]
        if not correction.is_identity:
            register.apply([output], correction.matrix)
        x_domain, z_domain = pattern.byproducts[output]
        known = outcomes if adapt else zeros
        if x_domain.evaluate(known):
            register.apply([output], GATE_MATRICES["X"])
        if z_domain.evaluate(known):
            register.apply([output], GATE_MATRICES["Z"])
    return SimReport(register.state(pattern.outputs), probability, peak, outcomes)


def simulate_pattern(
    state: MeasurementPattern,
    theta: Sequence[float],
    policy: Optional[BranchPolicy] = None,
    input_state: Optional[StateVector] = None,
    lazy: bool = True,
) -> SimReport:
    """Deterministic output of a pattern with adaptive signs and byproducts.

    Auxiliaries are entangled just before their measurement unless ``lazy`` is
    False. Open inputs start in |+> unless ``input_state`` is given.
    Heralded auxiliaries take their accepted outcome and the report's branch
    probability includes that postselection.
    """
    theta = _check_parameters(state, theta)
    state.validate()
    policy = policy or BranchPolicy.zero()
    return _run(state, theta, policy.choose, True, input_state, lazy)


def postselect_simulate(
    state: MeasurementPattern,
    theta: Sequence[float],
    outcomes: Dict[int, int],
    input_state: Optional[StateVector] = None,
):
    """Project every auxiliary onto a fixed branch with no outcome feedback.

    Only the constant parts of sign dependencies and byproducts are applied.
    Returns the output state and the branch probability.
    """
    theta = _check_parameters(state, theta)
    missing = set(state.order) - set(outcomes)
    if missing:
        raise SimulationError(
            "argument", "No outcome for auxiliaries {}".format(sorted(missing))
        )

    def choose(node, p0, p1):
        outcome = int(outcomes[node]) & 1
        if (p1 if outcome else p0) < 1e-14:
            raise SimulationError(
                "degenerate", "Branch {}={} has zero probability".format(node, outcome)
            )
        return outcome

    report = _run(state, theta, choose, False, input_state, True)
    return report.output_state, report.branch_probability


def simulate_circuit(S: int, K: int, theta: Sequence[float]) -> StateVector:
    """K brickwork layers applied gate by gate to |+>^S."""
    if S < 2 or S % 2:
        raise SimulationError("argument", "Qubit count must be even and at least 2")
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if len(theta) != 2 * K * S:
        raise SimulationError(
            "argument", "Expected {} parameters, got {}".format(2 * K * S, len(theta))
        )
    register = Register.from_state(StateVector.plus(range(S)))
    for layer in range(K):
        for qubit in range(S):
            z_angle = theta[layer_slot(S, layer, qubit, "z")]
            x_angle = theta[layer_slot(S, layer, qubit, "x")]
            register.apply([qubit], rotation("Z", z_angle))
            register.apply([qubit], rotation("X", x_angle))
        for control, target in brickwork_pairs(S):
            register.apply([control, target], CX)
    return register.state(range(S))


def pauli_operator(pauli: PauliString) -> scipy.sparse.csr_matrix:
    """Sparse matrix of a Pauli word, qubit 0 most significant."""
    n = pauli.num_qubits
    basis = np.arange(2**n)
    x_mask = 0
    signs = np.ones(2**n)
    for qubit in range(n):
        shift = n - 1 - qubit
        if pauli.x_bits[qubit]:
            x_mask |= 1 << shift
        if pauli.z_bits[qubit]:
            signs = signs * (1 - 2 * ((basis >> shift) & 1))
    y_count = int(np.sum(pauli.x_bits & pauli.z_bits))
    coefficient = 1j ** ((pauli.phase_exponent + y_count) % 4)
    return scipy.sparse.csr_matrix(
        (coefficient * signs, (basis ^ x_mask, basis)), shape=(2**n, 2**n)
    )


def expectation(state: StateVector, H) -> float:
    """Real expectation value of a Hamiltonian (anything with ``to_sparse``).

    Hamiltonian qubit i acts on the state qubit labelled i, whatever the
    order of ``state.qubits``.
    """
    if H.num_qubits != state.num_qubits:
        raise SimulationError(
            "argument",
            "Hamiltonian on {} qubits, state on {}".format(
                H.num_qubits, state.num_qubits
            ),
        )
    labels = list(range(H.num_qubits))
    if sorted(state.qubits) != labels:
        raise SimulationError(
            "argument",
            "State qubits {} are not labelled 0..{}".format(
                state.qubits, H.num_qubits - 1
            ),
        )
    amplitudes = state.reorder(labels).amplitudes
    value = np.vdot(amplitudes, H.to_sparse() @ amplitudes)
    if abs(value.imag) > 1e-10:
        raise SimulationError(
            "argument", "Expectation has imaginary part {}".format(value.imag)
        )
    return float(value.real)


def fidelity(a: StateVector, b: StateVector) -> float:
    if sorted(a.qubits) != sorted(b.qubits):
        raise SimulationError(
            "argument", "States on {} and {} differ".format(a.qubits, b.qubits)
        )
    b = b.reorder(a.qubits)
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))


def apply_byproducts(
    state: StateVector, x_flips: Dict[int, int], z_flips: Dict[int, int]
) -> StateVector:
    register = Register.from_state(state)
    for qubit in state.qubits:
        if x_flips.get(qubit):
            register.apply([qubit], GATE_MATRICES["X"])
        if z_flips.get(qubit):
            register.apply([qubit], GATE_MATRICES["Z"])
    return register.state(state.qubits)


def all_branches(state: MeasurementPattern, theta: Sequence[float]):
    """Corrected output of every outcome branch with non-zero probability.

    Heralded auxiliaries are not enumerated; they take their accepted outcome.
    """
    results = []
    free = [node for node in state.order if node not in state.heralds]
    count = len(free)
    for index in range(2**count):
        bits = [(index >> i) & 1 for i in range(count)]
        outcomes = dict(zip(free, bits))
        try:
            report = simulate_pattern(state, theta, BranchPolicy.given(outcomes))
        except SimulationError as e:
            if e.error_code != "degenerate":
                raise
            continue
        results.append((outcomes, report))
    logging.debug("Simulated {} of {} branches".format(len(results), 2**count))
    return results
