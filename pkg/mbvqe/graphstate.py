import logging
import math
from typing import Dict, Iterable, List, Sequence, Tuple

import networkx as nx
import numpy as np

from mbvqe.mbqc import (
    CustomState,
    Domain,
    Measurement,
    MeasurementPattern,
    PatternError,
    conjugate_byproduct,
    standardize,
)
from mbvqe.sim import PLUS, Register, SimulationError, StateVector, rotation
from mbvqe.stabilizer import LocalClifford, StabilizerTableau, tableau_to_graphstate

__all__ = [
    "CustomState",
    "DecorationAngles",
    "ansatz_state",
    "decorate_edge",
    "decorate_all",
    "add_virtual_edge_and_decorate",
    "decoration_pattern",
    "decorated_edge_state",
    "probabilistic_decoration_state",
    "to_dot",
]

SLOTS_PER_EDGE = 4


class DecorationAngles:
    """Four angles per decorated edge, in slot order θ1..θ4."""

    def __init__(self, edges: Sequence[Tuple[int, int]], angles):
        self.edges = [tuple(e) for e in edges]
        self.angles = np.asarray(angles, dtype=float).reshape(len(self.edges), 4)
        if not np.all(np.isfinite(self.angles)):
            raise PatternError("nonfinite", "Decoration angles must be finite")

    @classmethod
    def zeros(cls, edges):
        return cls(edges, np.zeros((len(edges), 4)))

    @classmethod
    def from_parameters(cls, edges, theta):
        return cls(edges, np.asarray(theta, dtype=float)[: 4 * len(edges)])

    def as_parameters(self) -> np.ndarray:
        return self.angles.reshape(-1).copy()

    def reduced(self) -> "DecorationAngles":
        return DecorationAngles(self.edges, np.mod(self.angles, 2 * math.pi))

    def __getitem__(self, edge):
        return self.angles[self.edges.index(tuple(edge))]


def ansatz_pattern(graph: nx.Graph, corrections: Dict[int, LocalClifford] = None):
    vertices = sorted(graph.nodes)
    return MeasurementPattern(
        nodes=vertices,
        edges=list(graph.edges),
        inputs=[],
        outputs=vertices,
        measurements=[],
        output_corrections=corrections or {},
    )


def ansatz_state(tableau: StabilizerTableau) -> CustomState:
    """Undecorated custom state: the graph form of a stabilizer state."""
    graph, corrections = tableau_to_graphstate(tableau)
    return standardize(ansatz_pattern(graph, corrections))


def _attach_gadget(
    source: MeasurementPattern, m: int, n: int, first_slot: int
) -> MeasurementPattern:
    """Join m and n by two green qubits, each prepared by a rotation chain."""
    next_id = max(source.nodes) + 1
    edges = list(source.edges)
    measurements = list(source.measurements)
    byproducts = dict(source.byproducts)
    greens = {}
    # green next to m carries θ4 (z) and θ3 (x), green next to n θ2 and θ1
    for endpoint, z_slot, x_slot in (
        (m, first_slot + 3, first_slot + 2),
        (n, first_slot + 1, first_slot),
    ):
        chain = list(range(next_id, next_id + 5))
        next_id += 5
        edges += list(zip(chain, chain[1:]))
        measurements += [
            Measurement(chain[0], Measurement.Basis.X),
            Measurement(chain[1], Measurement.Basis.X, s_domain=Domain([chain[0]])),
            Measurement.from_slot(chain[2], (z_slot, -1), Domain([chain[1]])),
            Measurement.from_slot(chain[3], (x_slot, -1), Domain([chain[0], chain[2]])),
        ]
        greens[endpoint] = (
            chain[4],
            Domain([chain[1], chain[3]]),
            Domain([chain[0], chain[2]]),
        )

    green_m, x_m, z_m = greens[m]
    green_n, x_n, z_n = greens[n]
    edges += [(m, green_m), (green_m, green_n), (green_n, n)]
    flips = {green_m: z_m ^ x_n, green_n: z_n ^ x_m}
    for endpoint, green in ((m, green_m), (n, green_n)):
        correction = source.output_corrections[endpoint]
        before_x, _ = conjugate_byproduct(
            *source.byproducts[endpoint], correction.inverse()
        )
        flips[green] ^= before_x
    for green in (green_m, green_n):
        measurements.append(
            Measurement(green, Measurement.Basis.X, t_domain=flips[green])
        )
    for endpoint, x_domain in ((m, x_m), (n, x_n)):
        extra_x, extra_z = conjugate_byproduct(
            Domain(), x_domain, source.output_corrections[endpoint]
        )
        old_x, old_z = byproducts[endpoint]
        byproducts[endpoint] = (old_x ^ extra_x, old_z ^ extra_z)
    return source.copy(
        nodes=list(source.nodes) + list(range(max(source.nodes) + 1, next_id)),
        edges=edges,
        measurements=measurements,
        byproducts=byproducts,
        num_slots=first_slot + SLOTS_PER_EDGE,
    )


def decoration_pattern(edge: Tuple[int, int] = (0, 1)) -> MeasurementPattern:
    """Raw ten-auxiliary gadget on a single edge between two |+> outputs.

    The green qubits are post-selected on |+>; the rotation chains are exact.
    """
    m, n = edge
    graph = nx.Graph()
    graph.add_nodes_from(edge)
    return _attach_gadget(ansatz_pattern(graph), m, n, 0)


def _check_outputs(state: CustomState, pair):
    m, n = pair
    if m == n or m not in state.outputs or n not in state.outputs:
        raise PatternError(
            "argument", "{} is not a pair of output vertices".format(pair)
        )
    if state.source is None:
        raise PatternError("argument", "Custom state has no source pattern")


def decorate_edge(state: CustomState, edge: Tuple[int, int]) -> CustomState:
    """Replace an ansatz edge by the four-auxiliary decoration gadget."""
    _check_outputs(state, edge)
    m, n = edge
    source = state.source
    if not source.graph.has_edge(m, n):
        raise PatternError("argument", "No undecorated edge {}".format(edge))
    trimmed = source.copy(edges=[e for e in source.edges if set(e) != {m, n}])
    decorated = standardize(
        _attach_gadget(trimmed, m, n, source.num_slots), herald=True
    )
    logging.debug("Decorated edge {} with slots from {}".format(edge, source.num_slots))
    return decorated


def add_virtual_edge_and_decorate(
    state: CustomState, pair: Tuple[int, int]
) -> CustomState:
    """Entangle two non-adjacent outputs through a fresh decoration gadget."""
    _check_outputs(state, pair)
    m, n = pair
    if state.source.graph.has_edge(m, n):
        raise PatternError("argument", "Vertices {} are already adjacent".format(pair))
    gadget = _attach_gadget(state.source, m, n, state.source.num_slots)
    decorated = standardize(gadget, herald=True)
    logging.debug("Added virtual edge {}".format(pair))
    return decorated


def decorate_all(state: CustomState, extra_pairs: Iterable[Tuple[int, int]] = ()):
    """Decorate every ansatz edge (then every extra pair) in one standardization.

    Gadgets sharing a vertex leave some auxiliaries without a Pauli correction;
    those are heralded, so the output is exact on every accepted branch.
    """
    source = state.source
    edges = sorted(source.edges)
    pairs = [tuple(p) for p in extra_pairs]
    for m, n in pairs:
        _check_outputs(state, (m, n))
        if source.graph.has_edge(m, n):
            raise PatternError(
                "argument", "Vertices {} are already adjacent".format((m, n))
            )
    pattern = source.copy(edges=[])
    for m, n in edges + pairs:
        pattern = _attach_gadget(pattern, m, n, pattern.num_slots)
    decorated = standardize(pattern, herald=True)
    logging.info(
        "Decorated {} edges: {} qubits, {} slots, {} heralded".format(
            len(edges) + len(pairs),
            len(decorated.nodes),
            decorated.num_slots,
            len(decorated.heralds),
        )
    )
    return decorated, edges + pairs


def decorated_edge_state(angles: Sequence[float]) -> StateVector:
    """Closed-form output state of one decorated edge over (m, n), m first."""
    t1, t2, t3, t4 = (float(a) for a in angles)
    if not all(math.isfinite(a) for a in (t1, t2, t3, t4)):
        raise SimulationError("nonfinite", "Decoration angles must be finite")
    s1, s2, s3, s4 = (math.sin(a) for a in (t1, t2, t3, t4))
    c1, c2, c3, c4 = (math.cos(a) for a in (t1, t2, t3, t4))
    amplitudes = np.array(
        [
            1 + c4 * s1 * s2 + c1 * c3 * s2 * s4 + c2 * s3 * s4,
            math.cos(t4 / 2) ** 2
            + 0.5 * (c4 - 1)
            + s1 * s2
            + 1j * s4 * (c2 * c3 - c1 * s2 * s3),
            c2 + s3 * s4 + 1j * s2 * (c1 * c4 - c3 * s1 * s4),
            -c2 * c4 - 1j * c1 * s2 + s4 * (-1j * c3 + s1 * s2 * s3),
        ]
    )
    if np.linalg.norm(amplitudes) < 1e-12:
        raise SimulationError(
            "degenerate", "Decorated edge state vanishes at {}".format(angles)
        )
    return StateVector([0, 1], amplitudes)


def _green_state(x_angle: float, z_angle: float) -> np.ndarray:
    return rotation("X", -x_angle) @ rotation("Z", -z_angle) @ PLUS


def probabilistic_decoration_state(angles: Sequence[float]) -> StateVector:
    """Two greens prepared directly and post-selected on |+>; a test oracle."""
    t1, t2, t3, t4 = angles
    register = Register()
    for qubit, vector in (
        (0, PLUS),
        (1, _green_state(t3, t4)),
        (2, _green_state(t1, t2)),
        (3, PLUS),
    ):
        register.add(qubit, vector)
    for a, b in ((0, 1), (1, 2), (2, 3)):
        register.apply_cz(a, b)
    register.project(1, PLUS)
    register.project(2, PLUS)
    return StateVector([0, 1], register.state([0, 3]).amplitudes)


def to_dot(state: MeasurementPattern, name="custom_state") -> str:
    lines = ["graph {} {{".format(name)]
    for node in state.nodes:
        role = state.role(node)
        if role == "output":
            attributes = 'shape=circle, style=filled, fillcolor="#9ecae1"'
            label = str(node)
        else:
            m = state.measurement(node)
            attributes = 'shape=circle, style=filled, fillcolor="#fdae6b"'
            if m.slot is not None:
                label = "{}\\nθ{}".format(node, m.slot)
            else:
                label = "{}\\n{}".format(node, m.basis.value)
        lines.append('    {} [label="{}", {}];'.format(node, label, attributes))
    for a, b in state.edges:
        lines.append("    {} -- {};".format(a, b))
    order = state.order
    for earlier, later in zip(order, order[1:]):
        lines.append(
            "    {} -- {} [style=dotted, constraint=false];".format(earlier, later)
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
