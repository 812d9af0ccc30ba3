import logging
import math
from enum import Enum
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse

from mbvqe.sim import StateVector, expectation, pauli_operator
from mbvqe.stabilizer import PauliString, StabilizerTableau

MAX_DENSE_QUBITS = 12


class ModelError(Exception):
    def __init__(self, error_code, message):
        super().__init__(message)
        self.error_code = error_code
        self.message = message


class Hamiltonian:
    """Real linear combination of Hermitian Pauli words on a fixed register."""

    def __init__(
        self, num_qubits: int, terms: Iterable[Tuple[float, PauliString]] = ()
    ):
        if num_qubits < 1:
            raise ModelError("argument", "A Hamiltonian needs at least one qubit")
        self.num_qubits = num_qubits
        self.terms: List[Tuple[float, PauliString]] = []
        for coefficient, pauli in terms:
            self.add(coefficient, pauli)

    def add(self, coefficient: float, pauli: PauliString) -> "Hamiltonian":
        if pauli.num_qubits != self.num_qubits:
            raise ModelError(
                "argument",
                "Term {} does not act on {} qubits".format(
                    pauli.label, self.num_qubits
                ),
            )
        if not pauli.is_hermitian:
            raise ModelError("argument", "Term {} is not Hermitian".format(pauli.label))
        if not math.isfinite(coefficient):
            raise ModelError(
                "nonfinite", "Coefficient of {} is not finite".format(pauli.label)
            )
        # fold the ±1 phase into the coefficient
        sign = -1 if pauli.phase_exponent == 2 else 1
        word = PauliString(pauli.x_bits, pauli.z_bits)
        self.terms.append((sign * float(coefficient), word))
        return self

    def add_word(self, coefficient: float, word: str) -> "Hamiltonian":
        return self.add(coefficient, PauliString.from_label(word))

    def __add__(self, other: "Hamiltonian") -> "Hamiltonian":
        if other.num_qubits != self.num_qubits:
            raise ModelError("argument", "Hamiltonians act on different registers")
        return Hamiltonian(self.num_qubits, self.terms + other.terms)

    def __len__(self):
        return len(self.terms)

    def simplified(self, atol=1e-14) -> "Hamiltonian":
        """Merge equal words and drop vanishing coefficients, in first-seen order."""
        merged: Dict[str, float] = {}
        for coefficient, pauli in self.terms:
            merged[pauli.word] = merged.get(pauli.word, 0.0) + coefficient
        return Hamiltonian(
            self.num_qubits,
            [
                (c, PauliString.from_label(word))
                for word, c in merged.items()
                if abs(c) > atol
            ],
        )

    @property
    def weights(self) -> Dict[str, float]:
        return {pauli.word: c for c, pauli in self.simplified().terms}

    @property
    def is_hermitian(self):
        return all(p.is_hermitian and isinstance(c, float) for c, p in self.terms)

    def commutes(self, pauli: PauliString) -> bool:
        """Sufficient check: every term commutes with ``pauli``."""
        return all(p.commutes(pauli) for _, p in self.terms)

    def to_sparse(self) -> scipy.sparse.csr_matrix:
        dimension = 2**self.num_qubits
        matrix = scipy.sparse.csr_matrix((dimension, dimension), dtype=complex)
        for coefficient, pauli in self.terms:
            matrix = matrix + coefficient * pauli_operator(pauli)
        return matrix

    def to_dense(self) -> np.ndarray:
        if self.num_qubits > MAX_DENSE_QUBITS:
            raise ModelError(
                "size",
                "Dense matrices are limited to {} qubits, got {}".format(
                    MAX_DENSE_QUBITS, self.num_qubits
                ),
            )
        return self.to_sparse().toarray()

    def serialize(self):
        return [[c, p.word] for c, p in self.terms]

    @classmethod
    def deserialize(cls, data):
        if not data:
            raise ModelError(
                "argument", "Cannot infer the register of an empty term list"
            )
        return cls(len(data[0][1]), [(c, PauliString.from_label(w)) for c, w in data])

    def __repr__(self):
        return "<Hamiltonian qubits={} terms={}>".format(
            self.num_qubits, len(self.terms)
        )


class ToricLattice:
    """Periodic N_x × N_y lattice with one qubit per edge.

    Qubits are numbered row-major over vertices, horizontal edge before
    vertical: qubit(r, c, H) = 2 (r N_y + c), qubit(r, c, V) = 2 (r N_y + c) + 1.
    The horizontal edge (r, c) joins vertex (r, c) to (r, c + 1); the vertical
    edge (r, c) joins (r, c) to (r + 1, c).
    """

    class Orientation(Enum):
        HORIZONTAL = "h"
        VERTICAL = "v"

    def __init__(self, nx: int, ny: int):
        if nx < 2 or ny < 2:
            raise ModelError("argument", "Toric lattices need at least 2 × 2 vertices")
        self.nx = nx
        self.ny = ny

    @property
    def num_qubits(self):
        return 2 * self.nx * self.ny

    def qubit(self, row: int, col: int, orientation) -> int:
        orientation = ToricLattice.Orientation(orientation)
        offset = 0 if orientation == ToricLattice.Orientation.HORIZONTAL else 1
        return 2 * ((row % self.nx) * self.ny + col % self.ny) + offset

    def _operator(self, support, label) -> PauliString:
        return PauliString.from_support(self.num_qubits, support, label)

    def star(self, row, col) -> PauliString:
        h, v = ToricLattice.Orientation.HORIZONTAL, ToricLattice.Orientation.VERTICAL
        return self._operator(
            [
                self.qubit(row, col, h),
                self.qubit(row, col - 1, h),
                self.qubit(row, col, v),
                self.qubit(row - 1, col, v),
            ],
            "Z",
        )

    def plaquette(self, row, col) -> PauliString:
        h, v = ToricLattice.Orientation.HORIZONTAL, ToricLattice.Orientation.VERTICAL
        return self._operator(
            [
                self.qubit(row, col, h),
                self.qubit(row + 1, col, h),
                self.qubit(row, col, v),
                self.qubit(row, col + 1, v),
            ],
            "X",
        )

    @property
    def stars(self) -> List[PauliString]:
        return [self.star(r, c) for r in range(self.nx) for c in range(self.ny)]

    @property
    def plaquettes(self) -> List[PauliString]:
        return [self.plaquette(r, c) for r in range(self.nx) for c in range(self.ny)]

    def logical_z(self, index: int) -> PauliString:
        h, v = ToricLattice.Orientation.HORIZONTAL, ToricLattice.Orientation.VERTICAL
        if index == 1:
            return self._operator([self.qubit(r, 0, h) for r in range(self.nx)], "Z")
        if index == 2:
            return self._operator([self.qubit(0, c, v) for c in range(self.ny)], "Z")
        raise ModelError(
            "argument", "Logical index must be 1 or 2, got {}".format(index)
        )

    def logical_x(self, index: int) -> PauliString:
        h, v = ToricLattice.Orientation.HORIZONTAL, ToricLattice.Orientation.VERTICAL
        if index == 1:
            return self._operator([self.qubit(0, c, h) for c in range(self.ny)], "X")
        if index == 2:
            return self._operator([self.qubit(r, 0, v) for r in range(self.nx)], "X")
        raise ModelError(
            "argument", "Logical index must be 1 or 2, got {}".format(index)
        )

    def __repr__(self):
        return "<ToricLattice {}x{}>".format(self.nx, self.ny)


def toric_hamiltonian(lattice: ToricLattice) -> Hamiltonian:
    """H0 = -Σ_s A_s - Σ_p B_p."""
    return Hamiltonian(
        lattice.num_qubits, [(-1.0, op) for op in lattice.stars + lattice.plaquettes]
    )


def perturbation(lattice: ToricLattice, weights: Sequence[float]) -> Hamiltonian:
    """Inhomogeneous field Σ λ_n Z_n; zero weights produce no term."""
    weights = np.asarray(weights, dtype=float).reshape(-1)
    if len(weights) != lattice.num_qubits:
        raise ModelError(
            "argument",
            "Expected {} weights, got {}".format(lattice.num_qubits, len(weights)),
        )
    if not np.all(np.isfinite(weights)):
        raise ModelError("nonfinite", "Perturbation weights must be finite")
    hamiltonian = Hamiltonian(lattice.num_qubits)
    for qubit, weight in enumerate(weights):
        if weight != 0:
            hamiltonian.add(weight, PauliString.single(lattice.num_qubits, qubit, "Z"))
    return hamiltonian


class Scenario(Enum):
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"
    SINGLE = "single"
    PAIR = "pair"


def scenario_weights(
    lattice: ToricLattice,
    scenario,
    strength: float,
    rng: Optional[np.random.Generator] = None,
    pair: Tuple[int, int] = (0, 3),
) -> np.ndarray:
    """Per-qubit λ for one sweep point.

    gaussian draws every λ_n from a normal law with mean λ and variance 0.1 λ;
    single puts λ on qubit 0 and draws the rest with mean 0.1 and variance 1e-4;
    pair puts λ on the two given qubits only.
    """
    scenario = Scenario(scenario)
    n = lattice.num_qubits
    if strength < 0 or not math.isfinite(strength):
        raise ModelError("argument", "Perturbation strength must be finite and >= 0")
    if scenario == Scenario.UNIFORM:
        return np.full(n, float(strength))
    if scenario == Scenario.PAIR:
        if len(set(pair)) != 2 or not all(0 <= q < n for q in pair):
            raise ModelError("argument", "Invalid qubit pair {}".format(pair))
        weights = np.zeros(n)
        weights[list(pair)] = strength
        return weights
    if rng is None:
        raise ModelError(
            "argument", "Scenario {} needs a seeded generator".format(scenario.value)
        )
    if scenario == Scenario.GAUSSIAN:
        return rng.normal(strength, math.sqrt(0.1 * strength), size=n)
    weights = rng.normal(0.1, math.sqrt(1e-4), size=n)
    weights[0] = strength
    return weights


def logical_state(lattice: ToricLattice, r: int, t: int) -> StabilizerTableau:
    """|r, t>_L: the ground state of H0 - (-1)^r Z_L1 - (-1)^t Z_L2."""
    if r not in (0, 1) or t not in (0, 1):
        raise ModelError(
            "argument", "Logical labels must be bits, got {}".format((r, t))
        )
    logical_1 = lattice.logical_z(1)
    logical_2 = lattice.logical_z(2)
    generators = (
        lattice.stars[:-1]
        + lattice.plaquettes[:-1]
        + [-logical_1 if r else logical_1, -logical_2 if t else logical_2]
    )
    return StabilizerTableau.from_stabilizers(generators)


class SchwingerParams:
    """Lattice Schwinger model after Jordan-Wigner; qubit n-1 holds site n."""

    def __init__(
        self,
        s: int,
        j: float = 1.0,
        w: float = 1.0,
        mu: float = 0.0,
        a=None,
        g=None,
    ):
        if s < 2 or s % 2:
            raise ModelError(
                "argument",
                "The fermion count must be even and at least 2, got {}".format(s),
            )
        if (a is None) != (g is None):
            raise ModelError("argument", "Lattice spacing and coupling go together")
        if a is not None:
            if a <= 0:
                raise ModelError("argument", "Lattice spacing must be positive")
            j, w = g * g * a / 2, 1 / (2 * a)
        self.s = s
        self.j = float(j)
        self.w = float(w)
        self.mu = float(mu)
        self.a = a
        self.g = g

    def with_mu(self, mu: float) -> "SchwingerParams":
        if self.a is not None:
            return SchwingerParams(self.s, mu=mu, a=self.a, g=self.g)
        return SchwingerParams(self.s, self.j, self.w, mu)

    def serialize(self):
        return {
            "s": self.s,
            "j": self.j,
            "w": self.w,
            "mu": self.mu,
            "a": self.a,
            "g": self.g,
        }

    def __repr__(self):
        return "<SchwingerParams S={} J={} w={} mu={}>".format(
            self.s, self.j, self.w, self.mu
        )


def schwinger_hamiltonian(p: SchwingerParams) -> Hamiltonian:
    """Spin form with long-range ZZ interactions; σ± hopping expanded to XX + YY.

    The staggered background term is read as -(J/2) Σ_n (n mod 2) Σ_{k<=n} Z_k,
    i.e. the parity weighs the whole inner sum.
    """
    s = p.s

    def op(sites, label):
        return PauliString.from_support(s, [k - 1 for k in sites], label)

    hamiltonian = Hamiltonian(s)
    for n in range(1, s - 1):
        for k in range(n + 1, s):
            hamiltonian.add(p.j / 2 * (s - k), op([n, k], "Z"))
    for n in range(1, s):
        if n % 2:
            for k in range(1, n + 1):
                hamiltonian.add(-p.j / 2, op([k], "Z"))
    for n in range(1, s):
        hamiltonian.add(p.w / 2, op([n, n + 1], "X"))
        hamiltonian.add(p.w / 2, op([n, n + 1], "Y"))
    for n in range(1, s + 1):
        hamiltonian.add(p.mu / 2 * (-1) ** n, op([n], "Z"))
    return hamiltonian.simplified()


def order_parameter_operator(s: int) -> Hamiltonian:
    """(1 / 2S(S-1)) Σ_{i>j} (1 + (-1)^i Z_i)(1 + (-1)^j Z_j), sites 1-indexed."""
    prefactor = 1 / (2 * s * (s - 1))
    operator = Hamiltonian(s)
    for i in range(1, s + 1):
        for j in range(1, i):
            si, sj = (-1) ** i, (-1) ** j
            operator.add(prefactor, PauliString.identity(s))
            operator.add(prefactor * si, PauliString.single(s, i - 1, "Z"))
            operator.add(prefactor * sj, PauliString.single(s, j - 1, "Z"))
            pair = PauliString.from_support(s, [i - 1, j - 1], "Z")
            operator.add(prefactor * si * sj, pair)
    return operator.simplified()


def order_parameter(state: StateVector, s: int) -> float:
    if state.num_qubits != s:
        raise ModelError(
            "argument", "State on {} qubits, expected {}".format(state.num_qubits, s)
        )
    return expectation(state, order_parameter_operator(s))


class GroundState(NamedTuple):
    energy: float
    state: StateVector
    degeneracy: int
    basis: np.ndarray  # columns span the ground space


def exact_ground(hamiltonian: Hamiltonian, atol: float = 1e-8) -> GroundState:
    """Dense diagonalization; degenerate ground spaces are reported, not resolved."""
    matrix = hamiltonian.to_dense()
    energies, vectors = scipy.linalg.eigh(matrix)
    degeneracy = int(np.sum(energies < energies[0] + atol))
    basis = vectors[:, :degeneracy]
    if degeneracy > 1:
        logging.debug(
            "Ground space of {} is {}-fold degenerate".format(hamiltonian, degeneracy)
        )
    return GroundState(
        float(energies[0]),
        StateVector(range(hamiltonian.num_qubits), basis[:, 0]),
        degeneracy,
        basis,
    )


def ground_space_fidelity(ground: GroundState, state: StateVector) -> float:
    """Weight of ``state`` inside the ground space."""
    amplitudes = state.reorder(list(range(state.num_qubits))).amplitudes
    if len(amplitudes) != ground.basis.shape[0]:
        raise ModelError("argument", "State and ground space differ in size")
    overlaps = ground.basis.conj().T @ amplitudes
    return float(min(1.0, np.sum(np.abs(overlaps) ** 2)))


def power_iteration(
    hamiltonian: Hamiltonian,
    iterations: int = 20000,
    tolerance: float = 1e-12,
    seed: int = 0,
) -> float:
    """Ground energy from power iteration on (c - H), c bounding the spectrum."""
    matrix = hamiltonian.to_sparse()
    shift = sum(abs(c) for c, _ in hamiltonian.terms) + 1.0
    rng = np.random.default_rng(seed)
    dimension = matrix.shape[0]
    vector = rng.normal(size=dimension) + 1j * rng.normal(size=dimension)
    vector /= np.linalg.norm(vector)
    energy = float(np.vdot(vector, matrix @ vector).real)
    for iteration in range(iterations):
        vector = shift * vector - matrix @ vector
        vector /= np.linalg.norm(vector)
        previous, energy = energy, float(np.vdot(vector, matrix @ vector).real)
        if abs(previous - energy) < tolerance:
            break
    logging.debug(
        "Power iteration stopped after {} steps at {}".format(iteration + 1, energy)
    )
    return energy
