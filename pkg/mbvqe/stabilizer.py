import itertools
import logging
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np


class TableauError(Exception):
    def __init__(self, error_code, message):
        super().__init__(message)
        self.error_code = error_code
        self.message = message


_LABEL_TO_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_TO_LABEL = {bits: label for label, bits in _LABEL_TO_BITS.items()}
_PHASE_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}

_PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _phase_exponent_of_product(x1, z1, x2, z2):
    """Sum over qubits of the exponent k in P1 P2 = i^k P3 for single-qubit Paulis."""
    x1 = np.asarray(x1, dtype=np.int64)
    z1 = np.asarray(z1, dtype=np.int64)
    x2 = np.asarray(x2, dtype=np.int64)
    z2 = np.asarray(z2, dtype=np.int64)
    y_part = x1 * z1 * (z2 - x2)
    x_part = x1 * (1 - z1) * z2 * (2 * x2 - 1)
    z_part = (1 - x1) * z1 * x2 * (1 - 2 * z2)
    return int(np.sum(y_part + x_part + z_part))


class PauliString:
    """An n-qubit Pauli word i^phase_exponent * P_0 ⊗ ... ⊗ P_{n-1}, Y explicit."""

    def __init__(self, x_bits, z_bits, phase_exponent=0):
        self.x_bits = np.array(x_bits, dtype=np.uint8) & 1
        self.z_bits = np.array(z_bits, dtype=np.uint8) & 1
        if self.x_bits.shape != self.z_bits.shape or self.x_bits.ndim != 1:
            raise TableauError("argument", "x and z bit vectors must have equal length")
        if len(self.x_bits) == 0:
            raise TableauError("argument", "a Pauli string needs at least one qubit")
        self.phase_exponent = int(phase_exponent) % 4

    @property
    def num_qubits(self):
        return len(self.x_bits)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        phase = 0
        for prefix, exponent in (("-i", 3), ("+i", 1), ("i", 1), ("-", 2), ("+", 0)):
            if label.startswith(prefix):
                phase = exponent
                label = label[len(prefix) :]
                break
        try:
            bits = [_LABEL_TO_BITS[c] for c in label.upper()]
        except KeyError:
            raise TableauError("argument", "Invalid Pauli label {}".format(label))
        x_bits, z_bits = zip(*bits)
        return cls(x_bits, z_bits, phase)

    @classmethod
    def identity(cls, num_qubits) -> "PauliString":
        return cls(np.zeros(num_qubits), np.zeros(num_qubits))

    @classmethod
    def single(cls, num_qubits, qubit, label, phase_exponent=0) -> "PauliString":
        x_bits = np.zeros(num_qubits, dtype=np.uint8)
        z_bits = np.zeros(num_qubits, dtype=np.uint8)
        x_bits[qubit], z_bits[qubit] = _LABEL_TO_BITS[label]
        return cls(x_bits, z_bits, phase_exponent)

    @classmethod
    def from_support(cls, num_qubits, support: Iterable[int], label) -> "PauliString":
        x_bits = np.zeros(num_qubits, dtype=np.uint8)
        z_bits = np.zeros(num_qubits, dtype=np.uint8)
        for qubit in support:
            x_bits[qubit], z_bits[qubit] = _LABEL_TO_BITS[label]
        return cls(x_bits, z_bits)

    @property
    def word(self) -> str:
        return "".join(
            _BITS_TO_LABEL[(int(x), int(z))] for x, z in zip(self.x_bits, self.z_bits)
        )

    @property
    def label(self) -> str:
        return _PHASE_PREFIX[self.phase_exponent] + self.word

    @property
    def is_hermitian(self):
        return self.phase_exponent % 2 == 0

    @property
    def support(self) -> List[int]:
        return [int(q) for q in np.flatnonzero(self.x_bits | self.z_bits)]

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.num_qubits != other.num_qubits:
            raise TableauError("argument", "Pauli strings act on different registers")
        phase = (
            self.phase_exponent
            + other.phase_exponent
            + _phase_exponent_of_product(
                self.x_bits, self.z_bits, other.x_bits, other.z_bits
            )
        )
        return PauliString(
            self.x_bits ^ other.x_bits, self.z_bits ^ other.z_bits, phase
        )

    def __neg__(self):
        return PauliString(self.x_bits, self.z_bits, self.phase_exponent + 2)

    def __eq__(self, other):
        if not isinstance(other, PauliString):
            return NotImplemented
        return (
            self.num_qubits == other.num_qubits
            and self.phase_exponent == other.phase_exponent
            and np.array_equal(self.x_bits, other.x_bits)
            and np.array_equal(self.z_bits, other.z_bits)
        )

    def __hash__(self):
        return hash(self.label)

    def commutes(self, other: "PauliString") -> bool:
        symplectic = np.sum(self.x_bits & other.z_bits) + np.sum(
            self.z_bits & other.x_bits
        )
        return int(symplectic) % 2 == 0

    def same_word(self, other: "PauliString") -> bool:
        return np.array_equal(self.x_bits, other.x_bits) and np.array_equal(
            self.z_bits, other.z_bits
        )

    def to_matrix(self) -> np.ndarray:
        matrix = np.array([[1.0 + 0j]])
        for c in self.word:
            matrix = np.kron(matrix, _PAULI_MATRICES[c])
        return (1j**self.phase_exponent) * matrix

    def __repr__(self):
        return "<PauliString {}>".format(self.label)


def _single_qubit_cliffords():
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    s = np.array([[1, 0], [0, 1j]], dtype=complex)
    generators = (("H", h), ("S", s))
    elements = [((), np.eye(2, dtype=complex))]
    frontier = list(elements)
    while frontier:
        next_frontier = []
        for gates, matrix in frontier:
            for name, gate in generators:
                candidate = gate @ matrix
                if not any(_equal_up_to_phase(candidate, m) for _, m in elements):
                    entry = (gates + (name,), candidate)
                    elements.append(entry)
                    next_frontier.append(entry)
        frontier = next_frontier
    return elements


def _equal_up_to_phase(a, b, atol=1e-9):
    return abs(abs(np.trace(a.conj().T @ b)) - a.shape[0]) < atol


class LocalClifford:
    """One of the 24 single-qubit Clifford elements.

    ``gates`` lists H/S gates in time order; ``matrix`` is their product.
    """

    _ELEMENTS = None

    def __init__(self, element_id: int):
        elements = LocalClifford._elements()
        if not 0 <= element_id < len(elements):
            raise TableauError("argument", "Invalid clifford id {}".format(element_id))
        self.element_id = element_id
        self.gates, self.matrix = elements[element_id]

    @classmethod
    def _elements(cls):
        if cls._ELEMENTS is None:
            cls._ELEMENTS = _single_qubit_cliffords()
        return cls._ELEMENTS

    @classmethod
    def identity(cls):
        return cls(0)

    @classmethod
    def from_matrix(cls, matrix) -> "LocalClifford":
        for element_id, (_, candidate) in enumerate(cls._elements()):
            if _equal_up_to_phase(candidate, matrix):
                return cls(element_id)
        raise TableauError("argument", "Matrix is not a single-qubit Clifford")

    @classmethod
    def from_gates(cls, gates: Iterable[str]) -> "LocalClifford":
        matrix = np.eye(2, dtype=complex)
        for gate in gates:
            matrix = GATE_MATRICES[gate] @ matrix
        return cls.from_matrix(matrix)

    @classmethod
    def all(cls) -> List["LocalClifford"]:
        return [cls(i) for i in range(len(cls._elements()))]

    @property
    def is_identity(self):
        return self.element_id == 0

    @property
    def is_diagonal(self):
        return abs(self.matrix[0, 1]) < 1e-9 and abs(self.matrix[1, 0]) < 1e-9

    def compose(self, other: "LocalClifford") -> "LocalClifford":
        """The element applying ``other`` first and then ``self``."""
        return LocalClifford.from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> "LocalClifford":
        return LocalClifford.from_matrix(self.matrix.conj().T)

    def conjugate(self, label: str) -> Tuple[int, str]:
        """Image C P C^dagger of a single-qubit Pauli as (sign, label)."""
        image = self.matrix @ _PAULI_MATRICES[label] @ self.matrix.conj().T
        for candidate in "XYZ":
            overlap = np.trace(_PAULI_MATRICES[candidate] @ image) / 2
            if abs(abs(overlap) - 1) < 1e-9:
                return int(round(overlap.real)), candidate
        raise TableauError("argument", "Clifford does not preserve the Pauli group")

    @property
    def images(self) -> Dict[str, Tuple[int, str]]:
        return {"X": self.conjugate("X"), "Z": self.conjugate("Z")}

    def __eq__(self, other):
        return isinstance(other, LocalClifford) and self.element_id == other.element_id

    def __hash__(self):
        return hash(self.element_id)

    def serialize(self):
        return "".join(self.gates)

    @classmethod
    def deserialize(cls, data):
        return cls.from_gates(list(data))

    def __repr__(self):
        return "<LocalClifford {} gates={}>".format(
            self.element_id, "".join(self.gates) or "I"
        )


GATE_MATRICES = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "SDG": np.array([[1, 0], [0, -1j]], dtype=complex),
    "X": _PAULI_MATRICES["X"],
    "Y": _PAULI_MATRICES["Y"],
    "Z": _PAULI_MATRICES["Z"],
}


class OutcomePolicy:
    class Kind(Enum):
        FIXED_PLUS = 0
        RANDOM = 1

    def __init__(self, kind, seed=None):
        self.kind = kind
        self.seed = seed
        self._rng = np.random.default_rng(seed)

    @classmethod
    def fixed_plus(cls):
        return cls(OutcomePolicy.Kind.FIXED_PLUS)

    @classmethod
    def random(cls, seed=None):
        return cls(OutcomePolicy.Kind.RANDOM, seed)

    def choose(self) -> int:
        if self.kind == OutcomePolicy.Kind.FIXED_PLUS:
            return 1
        return 1 if self._rng.integers(2) == 0 else -1


def gf2_row_reduce(rows: np.ndarray, columns: Sequence[int]):
    """Reduced row echelon form over GF(2) on the given columns.

    Returns (reduced copy, list of (row, column) pivots). Pivot rows are chosen
    by lowest index for reproducibility.
    """
    rows = rows.copy() & 1
    pivots = []
    next_row = 0
    for column in columns:
        candidates = [r for r in range(next_row, len(rows)) if rows[r, column]]
        if not candidates:
            continue
        pivot = candidates[0]
        rows[[next_row, pivot]] = rows[[pivot, next_row]]
        for r in range(len(rows)):
            if r != next_row and rows[r, column]:
                rows[r] ^= rows[next_row]
        pivots.append((next_row, column))
        next_row += 1
    return rows, pivots


def _gf2_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """A particular solution X of A X = B over GF(2); A must have full row rank."""
    m, k = a.shape
    augmented = np.concatenate([a & 1, b & 1], axis=1).astype(np.uint8)
    reduced, pivots = gf2_row_reduce(augmented, range(k))
    if len(pivots) != m:
        raise TableauError("argument", "Generators are not independent")
    solution = np.zeros((k, b.shape[1]), dtype=np.uint8)
    for row, column in pivots:
        solution[column] = reduced[row, k:]
    return solution


class StabilizerTableau:
    """Destabilizer/stabilizer tableau.

    Rows 0..n-1 hold destabilizers, rows n..2n-1 stabilizers. Phases are kept
    as exponents of i with explicit Y, so stabilizer exponents are 0 or 2.
    """

    def __init__(self, x: np.ndarray, z: np.ndarray, phases: np.ndarray):
        self._x = np.array(x, dtype=np.uint8)
        self._z = np.array(z, dtype=np.uint8)
        self._r = np.array(phases, dtype=np.int64) % 4
        if self._x.shape != self._z.shape or self._x.shape[0] != 2 * self._x.shape[1]:
            raise TableauError("argument", "Tableau needs 2n rows over n qubits")

    @property
    def num_qubits(self):
        return self._x.shape[1]

    @classmethod
    def zero_state(cls, num_qubits) -> "StabilizerTableau":
        eye = np.eye(num_qubits, dtype=np.uint8)
        zero = np.zeros_like(eye)
        x = np.concatenate([eye, zero])
        z = np.concatenate([zero, eye])
        return cls(x, z, np.zeros(2 * num_qubits))

    @classmethod
    def plus_state(cls, num_qubits) -> "StabilizerTableau":
        tableau = cls.zero_state(num_qubits)
        for qubit in range(num_qubits):
            tableau.apply("H", qubit)
        return tableau

    @classmethod
    def graph_state(
        cls,
        num_qubits,
        edges: Iterable[Tuple[int, int]],
        corrections: Optional[Dict[int, LocalClifford]] = None,
    ) -> "StabilizerTableau":
        tableau = cls.plus_state(num_qubits)
        for a, b in edges:
            tableau.apply("CZ", a, b)
        for qubit, correction in (corrections or {}).items():
            for gate in correction.gates:
                tableau.apply(gate, qubit)
        return tableau

    @classmethod
    def from_stabilizers(
        cls, stabilizers: Sequence[PauliString]
    ) -> "StabilizerTableau":
        n = len(stabilizers)
        if n == 0 or any(s.num_qubits != n for s in stabilizers):
            raise TableauError("argument", "Need n stabilizers on n qubits")
        for s in stabilizers:
            if not s.is_hermitian:
                raise TableauError(
                    "argument", "Stabilizer {} is not Hermitian".format(s)
                )
        for a, b in itertools.combinations(stabilizers, 2):
            if not a.commutes(b):
                raise TableauError(
                    "argument", "Stabilizers {} and {} anticommute".format(a, b)
                )
        stab_x = np.array([s.x_bits for s in stabilizers], dtype=np.uint8)
        stab_z = np.array([s.z_bits for s in stabilizers], dtype=np.uint8)
        # destabilizer d_i must satisfy <s_j, d_i> = delta_ij
        system = np.concatenate([stab_z, stab_x], axis=1)
        solution = _gf2_solve(system, np.eye(n, dtype=np.uint8))
        destab = [(solution[:n, i].copy(), solution[n:, i].copy()) for i in range(n)]
        for i in range(n):
            for j in range(i):
                dx_i, dz_i = destab[i]
                dx_j, dz_j = destab[j]
                if (int(np.sum(dx_i & dz_j)) + int(np.sum(dz_i & dx_j))) % 2:
                    destab[i] = (dx_i ^ stab_x[j], dz_i ^ stab_z[j])
        x = np.concatenate([np.array([d[0] for d in destab]), stab_x])
        z = np.concatenate([np.array([d[1] for d in destab]), stab_z])
        phases = np.concatenate([np.zeros(n), [s.phase_exponent for s in stabilizers]])
        return cls(x, z, phases)

    def copy(self) -> "StabilizerTableau":
        return StabilizerTableau(self._x.copy(), self._z.copy(), self._r.copy())

    def _row(self, index) -> PauliString:
        return PauliString(self._x[index], self._z[index], self._r[index])

    @property
    def stabilizers(self) -> List[PauliString]:
        n = self.num_qubits
        return [self._row(i) for i in range(n, 2 * n)]

    @property
    def destabilizers(self) -> List[PauliString]:
        return [self._row(i) for i in range(self.num_qubits)]

    def _multiply_rows(self, target, source):
        # row[target] <- row[target] * row[source]
        self._r[target] = (
            self._r[target]
            + self._r[source]
            + _phase_exponent_of_product(
                self._x[target], self._z[target], self._x[source], self._z[source]
            )
        ) % 4
        self._x[target] ^= self._x[source]
        self._z[target] ^= self._z[source]

    def _check_targets(self, targets):
        if len(set(targets)) != len(targets):
            raise TableauError("argument", "Duplicate targets {}".format(targets))
        for t in targets:
            if not 0 <= t < self.num_qubits:
                raise TableauError("argument", "Target {} out of range".format(t))

    def apply(self, gate: str, *targets: int) -> "StabilizerTableau":
        """Conjugate every generator by ``gate`` in place."""
        self._check_targets(targets)
        x, z, r = self._x, self._z, self._r
        if gate in ("CZ", "CX"):
            if len(targets) != 2:
                raise TableauError("argument", "{} needs two targets".format(gate))
        elif len(targets) != 1:
            raise TableauError("argument", "{} needs one target".format(gate))
        if gate == "H":
            (a,) = targets
            r += 2 * (x[:, a] & z[:, a])
            x[:, a], z[:, a] = z[:, a].copy(), x[:, a].copy()
        elif gate == "S":
            (a,) = targets
            r += 2 * (x[:, a] & z[:, a])
            z[:, a] ^= x[:, a]
        elif gate == "SDG":
            self.apply("Z", *targets)
            self.apply("S", *targets)
        elif gate == "X":
            (a,) = targets
            r += 2 * z[:, a]
        elif gate == "Z":
            (a,) = targets
            r += 2 * x[:, a]
        elif gate == "Y":
            (a,) = targets
            r += 2 * (x[:, a] ^ z[:, a])
        elif gate == "CX":
            c, t = targets
            r += 2 * (x[:, c] & z[:, t] & (x[:, t] ^ z[:, c] ^ 1))
            x[:, t] ^= x[:, c]
            z[:, c] ^= z[:, t]
        elif gate == "CZ":
            a, b = targets
            self.apply("H", b)
            self.apply("CX", a, b)
            self.apply("H", b)
        else:
            raise TableauError("argument", "Unknown gate {}".format(gate))
        r %= 4
        return self

    def apply_local_clifford(self, qubit, clifford: LocalClifford):
        for gate in clifford.gates:
            self.apply(gate, qubit)
        return self

    def _check_observable(self, observable: PauliString):
        if observable.num_qubits != self.num_qubits:
            raise TableauError("argument", "Observable acts on a different register")
        if not observable.is_hermitian:
            raise TableauError(
                "argument", "Observable {} has an imaginary phase".format(observable)
            )

    def _anticommuting_rows(self, observable, rows):
        symplectic = (self._x[rows] & observable.z_bits) ^ (
            self._z[rows] & observable.x_bits
        )
        return [rows[i] for i in np.flatnonzero(np.sum(symplectic, axis=1) % 2)]

    def _forced_outcome(self, observable: PauliString) -> int:
        n = self.num_qubits
        product = PauliString.identity(n)
        for i in self._anticommuting_rows(observable, list(range(n))):
            product = product * self._row(n + i)
        if not product.same_word(observable):
            raise TableauError("argument", "Tableau is not a valid stabilizer state")
        exponent = (observable.phase_exponent - product.phase_exponent) % 4
        return 1 if exponent == 0 else -1

    def expectation(self, observable: PauliString) -> int:
        """Exact expectation value of a Hermitian Pauli: +1, -1 or 0."""
        self._check_observable(observable)
        n = self.num_qubits
        if self._anticommuting_rows(observable, list(range(n, 2 * n))):
            return 0
        return self._forced_outcome(observable)

    def measure(
        self, observable: PauliString, policy: OutcomePolicy
    ) -> Tuple[int, bool]:
        """Measure a Hermitian Pauli in place; returns (outcome, deterministic)."""
        self._check_observable(observable)
        n = self.num_qubits
        anticommuting = self._anticommuting_rows(observable, list(range(n, 2 * n)))
        if not anticommuting:
            return self._forced_outcome(observable), True
        pivot = anticommuting[0]
        for row in self._anticommuting_rows(observable, list(range(2 * n))):
            if row != pivot and row != pivot - n:
                self._multiply_rows(row, pivot)
        outcome = policy.choose()
        self._x[pivot - n] = self._x[pivot]
        self._z[pivot - n] = self._z[pivot]
        self._r[pivot - n] = self._r[pivot]
        self._x[pivot] = observable.x_bits
        self._z[pivot] = observable.z_bits
        self._r[pivot] = (observable.phase_exponent + (0 if outcome == 1 else 2)) % 4
        return outcome, False

    def stabilizes(self, other: "StabilizerTableau") -> bool:
        """True iff every stabilizer of ``other`` has expectation +1 here."""
        return all(self.expectation(s) == 1 for s in other.stabilizers)

    def restrict(self, keep: Sequence[int]) -> "StabilizerTableau":
        """Stabilizer state of ``keep`` after discarding qubits in a product state."""
        n = self.num_qubits
        removed = [q for q in range(n) if q not in set(keep)]
        work = self.copy()
        rows = list(range(n, 2 * n))
        next_row = 0
        for q in removed:
            for bits in (work._x, work._z):
                candidates = [r for r in rows[next_row:] if bits[r, q]]
                if not candidates:
                    continue
                pivot = candidates[0]
                position = rows.index(pivot)
                rows[next_row], rows[position] = rows[position], rows[next_row]
                for r in rows:
                    if r != pivot and bits[r, q]:
                        work._multiply_rows(r, pivot)
                next_row += 1
        remaining = rows[next_row:]
        keep = list(keep)
        if len(remaining) != len(keep) or any(
            np.any(work._x[r, removed]) or np.any(work._z[r, removed])
            for r in remaining
        ):
            raise TableauError(
                "argument", "Discarded qubits are entangled with the kept register"
            )
        stabilizers = [
            PauliString(work._x[r, keep], work._z[r, keep], work._r[r])
            for r in remaining
        ]
        return StabilizerTableau.from_stabilizers(stabilizers)

    def is_valid(self) -> bool:
        n = self.num_qubits
        rows = [self._row(i) for i in range(2 * n)]
        for i in range(n, 2 * n):
            if not rows[i].is_hermitian:
                return False
        for i in range(2 * n):
            for j in range(i + 1, 2 * n):
                expected_anticommute = abs(i - j) == n
                if rows[i].commutes(rows[j]) == expected_anticommute:
                    return False
        matrix = np.concatenate([self._x, self._z], axis=1)
        _, pivots = gf2_row_reduce(matrix, range(2 * n))
        return len(pivots) == 2 * n

    def to_statevector(self) -> np.ndarray:
        """Dense amplitudes, qubit 0 most significant. Oracle use only."""
        n = self.num_qubits
        dimension = 2**n
        projector = np.eye(dimension, dtype=complex)
        for s in self.stabilizers:
            projector = projector @ (np.eye(dimension) + s.to_matrix()) / 2
        column = int(np.argmax(np.linalg.norm(projector, axis=0)))
        state = projector[:, column]
        return state / np.linalg.norm(state)

    def __repr__(self):
        return "<StabilizerTableau n={} stabilizers={}>".format(
            self.num_qubits, [s.label for s in self.stabilizers]
        )


def apply_clifford(
    tableau: StabilizerTableau, gate: str, targets: Sequence[int]
) -> StabilizerTableau:
    return tableau.copy().apply(gate, *targets)


def measure_pauli(
    tableau: StabilizerTableau, observable: PauliString, outcome_policy: OutcomePolicy
) -> Tuple[StabilizerTableau, int, bool]:
    result = tableau.copy()
    outcome, deterministic = result.measure(observable, outcome_policy)
    return result, outcome, deterministic


def tableau_to_graphstate(
    tableau: StabilizerTableau,
) -> Tuple[nx.Graph, Dict[int, LocalClifford]]:
    """Local-Clifford equivalent graph state of a stabilizer state.

    Returns the graph and per-vertex corrections C_v with
    state = (⊗ C_v) |graph⟩.
    """
    n = tableau.num_qubits
    work = tableau.copy()
    applied: Dict[int, List[str]] = {q: [] for q in range(n)}
    stab_rows = list(range(n, 2 * n))

    def eliminate(bits, pivot_rows):
        order = list(stab_rows)
        next_row = 0
        pivots = []
        for column in range(n):
            candidates = [r for r in order[next_row:] if bits[r, column]]
            if not candidates:
                continue
            pivot = candidates[0]
            position = order.index(pivot)
            order[next_row], order[position] = order[position], order[next_row]
            for r in order:
                if r != pivot and bits[r, column]:
                    work._multiply_rows(r, pivot)
            pivots.append((pivot, column))
            next_row += 1
        return pivots

    pivots = eliminate(work._x, stab_rows)
    pivot_columns = {column for _, column in pivots}
    for qubit in range(n):
        if qubit not in pivot_columns:
            work.apply("H", qubit)
            applied[qubit].append("H")

    pivots = eliminate(work._x, stab_rows)
    if len(pivots) != n:
        raise TableauError("argument", "Tableau is not a valid stabilizer state")
    row_of = {column: row for row, column in pivots}

    for qubit in range(n):
        row = row_of[qubit]
        if work._z[row, qubit]:
            work.apply("SDG", qubit)
            applied[qubit].append("SDG")
    for qubit in range(n):
        if work._r[row_of[qubit]] == 2:
            work.apply("Z", qubit)
            applied[qubit].append("Z")

    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    for qubit in range(n):
        row = row_of[qubit]
        for neighbor in np.flatnonzero(work._z[row]):
            if int(neighbor) != qubit:
                graph.add_edge(qubit, int(neighbor))
    inverse = {"H": "H", "SDG": "S", "S": "SDG", "Z": "Z"}
    corrections = {
        q: LocalClifford.from_gates([inverse[g] for g in reversed(applied[q])])
        for q in range(n)
    }
    logging.debug(
        "Converted {}-qubit stabilizer state to a graph with {} edges".format(
            n, graph.number_of_edges()
        )
    )
    return graph, corrections
