import logging
import math
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from mbvqe.stabilizer import (
    gf2_row_reduce,
    LocalClifford,
    OutcomePolicy,
    PauliString,
    StabilizerTableau,
    tableau_to_graphstate,
)


class PatternError(Exception):
    def __init__(self, error_code, message):
        super().__init__(message)
        self.error_code = error_code
        self.message = message


class Domain:
    """A GF(2) sum of measurement outcomes plus a constant bit."""

    __slots__ = ("nodes", "constant")

    def __init__(self, nodes: Iterable[int] = (), constant: int = 0):
        self.nodes = frozenset(nodes)
        self.constant = int(constant) & 1

    def __xor__(self, other: Union["Domain", int]) -> "Domain":
        if isinstance(other, int):
            return Domain(self.nodes, self.constant ^ (other & 1))
        return Domain(self.nodes ^ other.nodes, self.constant ^ other.constant)

    def __bool__(self):
        return bool(self.nodes) or bool(self.constant)

    def __eq__(self, other):
        return (
            isinstance(other, Domain)
            and self.nodes == other.nodes
            and self.constant == other.constant
        )

    def __hash__(self):
        return hash((self.nodes, self.constant))

    def evaluate(self, outcomes: Dict[int, int]) -> int:
        return (self.constant + sum(outcomes[n] for n in self.nodes)) % 2

    def substitute(self, node: int, replacement: Union["Domain", int]) -> "Domain":
        if node not in self.nodes:
            return self
        return Domain(self.nodes - {node}, self.constant) ^ replacement

    def relabel(self, mapping: Dict[int, int]) -> "Domain":
        return Domain((mapping.get(n, n) for n in self.nodes), self.constant)

    def serialize(self):
        return {"nodes": sorted(self.nodes), "constant": self.constant}

    @classmethod
    def deserialize(cls, data):
        return cls(data["nodes"], data["constant"])

    def __repr__(self):
        terms = ["s{}".format(n) for n in sorted(self.nodes)]
        if self.constant or not terms:
            terms.append(str(self.constant))
        return "+".join(terms)


SlotSpec = Optional[Union[int, Tuple[int, int]]]


class Measurement:
    class Basis(Enum):
        X = "X"
        Y = "Y"
        Z = "Z"
        ROTATED = "R"

    def __init__(
        self,
        node: int,
        basis: "Measurement.Basis",
        slot: Optional[int] = None,
        sign: int = 1,
        s_domain: Optional[Domain] = None,
        t_domain: Optional[Domain] = None,
        frame: Optional[LocalClifford] = None,
    ):
        self.node = node
        self.basis = basis
        self.slot = slot
        self.sign = 1 if sign >= 0 else -1
        self.s_domain = s_domain or Domain()
        self.t_domain = t_domain or Domain()
        self.frame = frame or LocalClifford.identity()
        if basis == Measurement.Basis.ROTATED and slot is None:
            raise PatternError(
                "argument", "Rotated measurement of {} needs a slot".format(node)
            )

    @classmethod
    def from_slot(cls, node, slot: SlotSpec, s_domain=None) -> "Measurement":
        """Rotated measurement for a slot reference; None stands for a fixed X."""
        if slot is None:
            return cls(node, Measurement.Basis.X, s_domain=s_domain)
        if isinstance(slot, tuple):
            index, sign = slot
        else:
            index, sign = slot, 1
        return cls(node, Measurement.Basis.ROTATED, index, sign, s_domain)

    @property
    def is_pauli(self):
        return self.basis != Measurement.Basis.ROTATED

    @property
    def is_adaptive(self):
        return bool(self.s_domain.nodes) or bool(self.t_domain.nodes)

    def base_angle(self, theta: Sequence[float]) -> float:
        if self.basis == Measurement.Basis.X:
            return 0.0
        if self.basis == Measurement.Basis.Y:
            return math.pi / 2
        if self.basis == Measurement.Basis.ROTATED:
            return self.sign * float(theta[self.slot])
        raise PatternError("argument", "Z measurements have no angle")

    def angle(self, theta: Sequence[float], outcomes: Dict[int, int]) -> float:
        """Effective XY-plane angle (-1)^s * base + pi * t."""
        angle = self.base_angle(theta)
        if self.s_domain.evaluate(outcomes):
            angle = -angle
        if self.t_domain.evaluate(outcomes):
            angle += math.pi
        return angle

    def replace(self, **changes) -> "Measurement":
        fields = {
            "node": self.node,
            "basis": self.basis,
            "slot": self.slot,
            "sign": self.sign,
            "s_domain": self.s_domain,
            "t_domain": self.t_domain,
            "frame": self.frame,
        }
        fields.update(changes)
        return Measurement(**fields)

    def domains(self) -> Tuple[Domain, Domain]:
        return self.s_domain, self.t_domain

    def serialize(self):
        return {
            "node": self.node,
            "basis": self.basis.value,
            "slot": self.slot,
            "sign": self.sign,
            "s_domain": self.s_domain.serialize(),
            "t_domain": self.t_domain.serialize(),
            "frame": self.frame.serialize(),
        }

    @classmethod
    def deserialize(cls, data):
        return cls(
            data["node"],
            Measurement.Basis(data["basis"]),
            data.get("slot"),
            data.get("sign", 1),
            Domain.deserialize(data["s_domain"]),
            Domain.deserialize(data["t_domain"]),
            LocalClifford.deserialize(data.get("frame", "")),
        )

    def __repr__(self):
        if self.basis == Measurement.Basis.ROTATED:
            basis = "R({}θ[{}])".format("-" if self.sign < 0 else "", self.slot)
        else:
            basis = self.basis.value
        return "<Measurement {} {} s={} t={}>".format(
            self.node, basis, self.s_domain, self.t_domain
        )


class MeasurementPattern:
    """Graph, measurement plan and output corrections of a one-way computation.

    Outputs are listed in logical qubit order. After all measurements the
    output corrections are applied first, then X^x Z^z byproducts.

    ``heralds`` maps postselected nodes to a domain that must evaluate to 0;
    it always contains the node itself.
    """

    def __init__(
        self,
        nodes: Iterable[int],
        edges: Iterable[Tuple[int, int]],
        inputs: Sequence[int],
        outputs: Sequence[int],
        measurements: Sequence[Measurement],
        byproducts: Optional[Dict[int, Tuple[Domain, Domain]]] = None,
        output_corrections: Optional[Dict[int, LocalClifford]] = None,
        num_slots: Optional[int] = None,
        heralds: Optional[Dict[int, Domain]] = None,
    ):
        self.graph = nx.Graph()
        self.graph.add_nodes_from(nodes)
        self.graph.add_edges_from(edges)
        self.inputs = list(inputs)
        self.outputs = list(outputs)
        self.measurements = list(measurements)
        self.byproducts = {o: (Domain(), Domain()) for o in self.outputs}
        self.byproducts.update(byproducts or {})
        self.output_corrections = {o: LocalClifford.identity() for o in self.outputs}
        self.output_corrections.update(output_corrections or {})
        self.heralds = dict(heralds or {})
        used_slots = [m.slot for m in self.measurements if m.slot is not None]
        self.num_slots = (
            num_slots if num_slots is not None else max(used_slots, default=-1) + 1
        )
        self._by_node = {m.node: m for m in self.measurements}
        self.validate()

    @property
    def nodes(self) -> List[int]:
        return sorted(self.graph.nodes)

    @property
    def edges(self) -> List[Tuple[int, int]]:
        return sorted(tuple(sorted(e)) for e in self.graph.edges)

    @property
    def order(self) -> List[int]:
        return [m.node for m in self.measurements]

    @property
    def auxiliaries(self) -> List[int]:
        return self.order

    @property
    def rotated(self) -> List[Measurement]:
        return [m for m in self.measurements if not m.is_pauli]

    @property
    def is_clifford(self):
        return not self.rotated

    @property
    def has_frames(self):
        return any(not m.frame.is_identity for m in self.measurements) or any(
            not c.is_identity for c in self.output_corrections.values()
        )

    def measurement(self, node) -> Measurement:
        return self._by_node[node]

    def role(self, node) -> str:
        if node in self.outputs:
            return "output"
        if node in self.inputs:
            return "input"
        return "auxiliary"

    def validate(self):
        nodes = set(self.graph.nodes)
        for group, name in ((self.inputs, "inputs"), (self.outputs, "outputs")):
            if len(set(group)) != len(group) or not set(group) <= nodes:
                raise PatternError("argument", "Invalid {} {}".format(name, group))
        measured = self.order
        if len(set(measured)) != len(measured):
            raise PatternError("argument", "A node is measured twice")
        if set(measured) & set(self.outputs):
            raise PatternError("argument", "Output nodes must not be measured")
        if set(measured) | set(self.outputs) != nodes:
            raise PatternError(
                "argument",
                "Unmeasured non-output nodes {}".format(
                    sorted(nodes - set(measured) - set(self.outputs))
                ),
            )
        seen = set()
        for m in self.measurements:
            for domain in m.domains():
                if not domain.nodes <= seen:
                    raise PatternError(
                        "cycle",
                        "Measurement of {} depends on later nodes {}".format(
                            m.node, sorted(domain.nodes - seen)
                        ),
                    )
            if m.slot is not None and not 0 <= m.slot < self.num_slots:
                raise PatternError("argument", "Slot {} out of range".format(m.slot))
            seen.add(m.node)
            herald = self.heralds.get(m.node)
            if herald is not None and (
                m.node not in herald.nodes or not herald.nodes <= seen
            ):
                raise PatternError(
                    "cycle", "Herald of {} is not decided at its step".format(m.node)
                )
        unmeasured = set(self.heralds) - seen
        if unmeasured:
            raise PatternError(
                "argument", "Heralds on unmeasured nodes {}".format(sorted(unmeasured))
            )
        for output, (x_domain, z_domain) in self.byproducts.items():
            if output not in self.outputs:
                raise PatternError(
                    "argument", "Byproduct on non-output {}".format(output)
                )
            if not (x_domain.nodes | z_domain.nodes) <= seen:
                raise PatternError(
                    "argument",
                    "Byproduct of {} references unmeasured nodes".format(output),
                )

    def copy(self, **changes) -> "MeasurementPattern":
        fields = {
            "nodes": self.nodes,
            "edges": self.edges,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "measurements": self.measurements,
            "byproducts": dict(self.byproducts),
            "output_corrections": dict(self.output_corrections),
            "num_slots": self.num_slots,
            "heralds": dict(self.heralds),
        }
        fields.update(changes)
        return MeasurementPattern(**fields)

    def relabel(self, mapping: Dict[int, int]) -> "MeasurementPattern":
        def node(n):
            return mapping.get(n, n)

        return self.copy(
            nodes=[node(n) for n in self.nodes],
            edges=[(node(a), node(b)) for a, b in self.edges],
            inputs=[node(n) for n in self.inputs],
            outputs=[node(n) for n in self.outputs],
            measurements=[
                m.replace(
                    node=node(m.node),
                    s_domain=m.s_domain.relabel(mapping),
                    t_domain=m.t_domain.relabel(mapping),
                )
                for m in self.measurements
            ],
            byproducts={
                node(o): (x.relabel(mapping), z.relabel(mapping))
                for o, (x, z) in self.byproducts.items()
            },
            output_corrections={node(o): c for o, c in self.output_corrections.items()},
            heralds={node(h): d.relabel(mapping) for h, d in self.heralds.items()},
        )

    def with_output_corrections(
        self, corrections: Dict[int, LocalClifford]
    ) -> "MeasurementPattern":
        """Apply ``corrections`` after the existing ones, conjugating byproducts."""
        byproducts = dict(self.byproducts)
        combined = dict(self.output_corrections)
        for output, clifford in corrections.items():
            byproducts[output] = conjugate_byproduct(*byproducts[output], clifford)
            combined[output] = clifford.compose(combined[output])
        return self.copy(byproducts=byproducts, output_corrections=combined)

    def serialize(self):
        return {
            "vertices": self.nodes,
            "roles": {str(n): self.role(n) for n in self.nodes},
            "inputs": self.inputs,
            "outputs": self.outputs,
            "edges": [list(e) for e in self.edges],
            "slots": self.num_slots,
            "steps": [m.serialize() for m in self.measurements],
            "byproducts": {
                str(o): {"x": x.serialize(), "z": z.serialize()}
                for o, (x, z) in self.byproducts.items()
            },
            "output_corrections": {
                str(o): c.serialize() for o, c in self.output_corrections.items()
            },
            "heralds": {str(h): d.serialize() for h, d in self.heralds.items()},
        }

    @classmethod
    def _fields_from(cls, data):
        return {
            "nodes": data["vertices"],
            "edges": [tuple(e) for e in data["edges"]],
            "inputs": data.get("inputs", []),
            "outputs": data["outputs"],
            "measurements": [Measurement.deserialize(s) for s in data["steps"]],
            "byproducts": {
                int(o): (Domain.deserialize(b["x"]), Domain.deserialize(b["z"]))
                for o, b in data["byproducts"].items()
            },
            "output_corrections": {
                int(o): LocalClifford.deserialize(c)
                for o, c in data["output_corrections"].items()
            },
            "num_slots": data["slots"],
            "heralds": {
                int(h): Domain.deserialize(d)
                for h, d in data.get("heralds", {}).items()
            },
        }

    @classmethod
    def deserialize(cls, data):
        return cls(**cls._fields_from(data))

    def __repr__(self):
        return "<{} nodes={} outputs={} rotated={} slots={}>".format(
            type(self).__name__,
            len(self.nodes),
            len(self.outputs),
            len(self.rotated),
            self.num_slots,
        )


class CustomState(MeasurementPattern):
    """A standardized resource state: outputs plus rotated-basis auxiliaries.

    ``source`` keeps the raw pattern the state was standardized from and
    ``eliminated`` the number of Pauli measurements absorbed classically.
    """

    def __init__(self, *args, source=None, eliminated=0, **kwargs):
        self.source = source
        self.eliminated = eliminated
        super().__init__(*args, **kwargs)

    def validate(self):
        super().validate()
        if self.inputs:
            raise PatternError("argument", "Custom states have no open inputs")
        for m in self.measurements:
            if m.is_pauli:
                raise PatternError(
                    "argument", "Auxiliary {} is not in a rotated basis".format(m.node)
                )

    def copy(self, **changes) -> "CustomState":
        fields = {
            "nodes": self.nodes,
            "edges": self.edges,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "measurements": self.measurements,
            "byproducts": dict(self.byproducts),
            "output_corrections": dict(self.output_corrections),
            "num_slots": self.num_slots,
            "heralds": dict(self.heralds),
            "source": self.source,
            "eliminated": self.eliminated,
        }
        fields.update(changes)
        return CustomState(**fields)

    @property
    def plan(self) -> List[Measurement]:
        return self.measurements

    def serialize(self):
        data = super().serialize()
        data["eliminated"] = self.eliminated
        if self.source is not None:
            data["source"] = self.source.serialize()
        return data

    @classmethod
    def deserialize(cls, data):
        source = data.get("source")
        return cls(
            **cls._fields_from(data),
            source=MeasurementPattern.deserialize(source) if source else None,
            eliminated=data.get("eliminated", 0),
        )


def conjugate_byproduct(
    x_domain: Domain, z_domain: Domain, clifford: LocalClifford
) -> Tuple[Domain, Domain]:
    """Domains of C X^x Z^z C^dagger, up to sign."""
    new_x, new_z = Domain(), Domain()
    for domain, label in ((x_domain, "X"), (z_domain, "Z")):
        _, image = clifford.conjugate(label)
        if image in "XY":
            new_x ^= domain
        if image in "ZY":
            new_z ^= domain
    return new_x, new_z


def identity_pattern(num_qubits: int) -> MeasurementPattern:
    lines = list(range(num_qubits))
    return MeasurementPattern(lines, [], lines, lines, [])


def single_qubit_unitary_pattern(
    theta1: SlotSpec, theta2: SlotSpec, theta3: SlotSpec
) -> MeasurementPattern:
    """Five-node chain realising U_x(θ3) U_z(θ2) U_x(θ1) on node 1's state.

    Slots are indices into the parameter vector, optionally paired with a sign;
    None measures the node in X (a fixed zero angle).
    """
    measurements = [
        Measurement(1, Measurement.Basis.X),
        Measurement.from_slot(2, theta1, Domain([1])),
        Measurement.from_slot(3, theta2, Domain([2])),
        Measurement.from_slot(4, theta3, Domain([1, 3])),
    ]
    return MeasurementPattern(
        nodes=range(1, 6),
        edges=[(1, 2), (2, 3), (3, 4), (4, 5)],
        inputs=[1],
        outputs=[5],
        measurements=measurements,
        byproducts={5: (Domain([2, 4]), Domain([1, 3]))},
    )


_CX_X_MEASURED = (1, 9, 10, 11, 13, 14)


def cx_pattern() -> MeasurementPattern:
    """Fifteen-node CX with control 1 -> 7 and target 9 -> 15."""
    edges = [(i, i + 1) for i in range(1, 7)]
    edges += [(i, i + 1) for i in range(9, 15)]
    edges += [(4, 8), (8, 12)]
    measurements = [
        Measurement(
            node,
            Measurement.Basis.X if node in _CX_X_MEASURED else Measurement.Basis.Y,
        )
        for node in (1, 2, 3, 4, 5, 6, 8, 9, 10, 11, 12, 13, 14)
    ]
    byproducts = {
        7: (Domain([2, 3, 5, 6]), Domain([1, 3, 4, 5, 8, 9, 11], constant=1)),
        15: (Domain([2, 3, 8, 10, 12, 14]), Domain([9, 11, 13])),
    }
    return MeasurementPattern(
        nodes=range(1, 16),
        edges=edges,
        inputs=[1, 9],
        outputs=[7, 15],
        measurements=measurements,
        byproducts=byproducts,
    )


def star_pattern(num_targets: int, slot: SlotSpec = 0) -> MeasurementPattern:
    """One auxiliary joined to every target; applies exp(i θ/2 Z⊗...⊗Z)."""
    targets = list(range(num_targets))
    auxiliary = num_targets
    measurement = Measurement.from_slot(auxiliary, slot).replace(
        frame=LocalClifford.from_gates("H")
    )
    return MeasurementPattern(
        nodes=targets + [auxiliary],
        edges=[(auxiliary, t) for t in targets],
        inputs=targets,
        outputs=targets,
        measurements=[measurement],
        byproducts={t: (Domain(), Domain([auxiliary])) for t in targets},
    )


def shift_signals(pattern: MeasurementPattern) -> MeasurementPattern:
    """Remove every t-domain by re-expressing later dependencies.

    Pauli X and Z measurements lose their s-domains, Y measurements turn them
    into t-domains first.
    """
    measurements = list(pattern.measurements)
    byproducts = dict(pattern.byproducts)
    heralds = dict(pattern.heralds)
    for i, m in enumerate(measurements):
        s_domain, t_domain = m.s_domain, m.t_domain
        if m.basis == Measurement.Basis.Y:
            t_domain = t_domain ^ s_domain
            s_domain = Domain()
        elif m.basis in (Measurement.Basis.X, Measurement.Basis.Z):
            s_domain = Domain()
        measurements[i] = m.replace(s_domain=s_domain, t_domain=Domain())
        if not t_domain:
            continue
        replacement = Domain([m.node]) ^ t_domain
        for j in range(i + 1, len(measurements)):
            later = measurements[j]
            measurements[j] = later.replace(
                s_domain=later.s_domain.substitute(m.node, replacement),
                t_domain=later.t_domain.substitute(m.node, replacement),
            )
        byproducts = {
            o: (x.substitute(m.node, replacement), z.substitute(m.node, replacement))
            for o, (x, z) in byproducts.items()
        }
        heralds = {h: d.substitute(m.node, replacement) for h, d in heralds.items()}
    return pattern.copy(
        measurements=measurements, byproducts=byproducts, heralds=heralds
    )


def concatenate(
    a: MeasurementPattern, b: MeasurementPattern, wiring: Dict[int, int]
) -> MeasurementPattern:
    """Pattern running ``a`` and then ``b`` with a's outputs fed into b's inputs.

    ``wiring`` maps outputs of ``a`` onto every input of ``b``; unwired outputs of
    ``a`` pass through. Byproducts of ``a`` are pushed through b's entangling
    gates onto b's measurements and outputs, then signals are shifted.
    """
    if a.has_frames or b.has_frames or a.heralds or b.heralds:
        raise PatternError("argument", "Only raw patterns can be concatenated")
    if (
        len(wiring) != len(b.inputs)
        or set(wiring.values()) != set(b.inputs)
        or not set(wiring) <= set(a.outputs)
    ):
        raise PatternError(
            "argument",
            "Wiring {} does not match outputs {} and inputs {}".format(
                wiring, a.outputs, b.inputs
            ),
        )
    if len(b.inputs) != len(b.outputs):
        raise PatternError("argument", "Inputs and outputs of b differ in arity")

    mapping = {b_input: a_output for a_output, b_input in wiring.items()}
    next_id = max(a.nodes) + 1
    for node in b.nodes:
        if node not in mapping:
            mapping[node] = next_id
            next_id += 1
    b = b.relabel(mapping)
    if set(a.edges) & set(b.edges):
        raise PatternError("argument", "Patterns share an entangling edge")

    pending: Dict[int, Tuple[Domain, Domain]] = {}

    def push(node, x_domain, z_domain):
        x, z = pending.get(node, (Domain(), Domain()))
        pending[node] = (x ^ x_domain, z ^ z_domain)

    for output in wiring:
        x_domain, z_domain = a.byproducts[output]
        push(output, x_domain, z_domain)
        for neighbor in b.graph.neighbors(output):
            push(neighbor, Domain(), x_domain)

    measurements = []
    for m in b.measurements:
        if m.node not in pending:
            measurements.append(m)
            continue
        x_domain, z_domain = pending[m.node]
        if m.basis == Measurement.Basis.Z:
            measurements.append(m.replace(t_domain=m.t_domain ^ x_domain))
        else:
            measurements.append(
                m.replace(
                    s_domain=m.s_domain ^ x_domain, t_domain=m.t_domain ^ z_domain
                )
            )

    byproducts = {o: a.byproducts[o] for o in a.outputs if o not in wiring}
    for output in b.outputs:
        x_domain, z_domain = b.byproducts[output]
        extra_x, extra_z = pending.get(output, (Domain(), Domain()))
        byproducts[output] = (x_domain ^ extra_x, z_domain ^ extra_z)

    outputs = [b.outputs[b.inputs.index(o)] if o in wiring else o for o in a.outputs]
    logging.debug(
        "Concatenating {} nodes onto {}; pushed byproducts of {} outputs through "
        "{} entangling edges".format(
            len(b.nodes) - len(b.inputs),
            len(a.nodes),
            len(wiring),
            sum(b.graph.degree(output) for output in wiring),
        )
    )
    combined = MeasurementPattern(
        nodes=set(a.nodes) | set(b.nodes),
        edges=a.edges + b.edges,
        inputs=a.inputs,
        outputs=outputs,
        measurements=a.measurements + measurements,
        byproducts=byproducts,
        num_slots=max(a.num_slots, b.num_slots),
    )
    return shift_signals(combined)


def layer_slot(S: int, layer: int, qubit: int, axis: str) -> int:
    """Parameter index of the z or x rotation of ``qubit`` in ``layer``."""
    return layer * 2 * S + 2 * qubit + (0 if axis == "z" else 1)


def brickwork_pairs(S: int) -> List[Tuple[int, int]]:
    return [(i, i + 1) for i in range(0, S - 1, 2)] + [
        (i, i + 1) for i in range(1, S - 1, 2)
    ]


def compile_layers(S: int, K: int) -> MeasurementPattern:
    """K brickwork layers of z/x rotations and CX gates on |+>^S."""
    if S < 2 or S % 2:
        raise PatternError("argument", "Qubit count must be even and at least 2")
    if K < 0:
        raise PatternError("argument", "Layer count must not be negative")
    pattern = identity_pattern(S)
    for layer in range(K):
        for qubit in range(S):
            rotation = single_qubit_unitary_pattern(
                None,
                layer_slot(S, layer, qubit, "z"),
                layer_slot(S, layer, qubit, "x"),
            )
            pattern = concatenate(
                pattern, rotation, {pattern.outputs[qubit]: rotation.inputs[0]}
            )
        for control, target in brickwork_pairs(S):
            cx = cx_pattern()
            pattern = concatenate(
                pattern,
                cx,
                {
                    pattern.outputs[control]: cx.inputs[0],
                    pattern.outputs[target]: cx.inputs[1],
                },
            )
    logging.info(
        "Compiled {} layers on {} qubits into {} nodes".format(K, S, len(pattern.nodes))
    )
    return pattern.copy(num_slots=2 * K * S)


def _solve_gf2(a: np.ndarray, b: np.ndarray) -> Optional[np.ndarray]:
    """Any solution of a @ c = b over GF(2), or None."""
    rows, columns = a.shape
    augmented = np.concatenate([a & 1, (b & 1).reshape(rows, 1)], axis=1)
    reduced, pivots = gf2_row_reduce(augmented.astype(np.uint8), range(columns))
    for row in range(len(pivots), rows):
        if reduced[row, columns]:
            return None
    solution = np.zeros(columns, dtype=np.uint8)
    for row, column in pivots:
        solution[column] = reduced[row, columns]
    return solution


def _flip_operator(x, z, target, measured):
    """Stabilizer element that is Z on ``target`` and trivial on ``measured``.

    Returns its (x, z) bit vectors or None if no such element exists.
    """
    constraints = [(x, target, 0), (z, target, 1)]
    for column in measured:
        constraints += [(x, column, 0), (z, column, 0)]
    a = np.array([bits[:, column] for bits, column, _ in constraints], dtype=np.uint8)
    b = np.array([value for _, _, value in constraints], dtype=np.uint8)
    coefficients = _solve_gf2(a, b)
    if coefficients is None:
        return None
    return (coefficients @ x) % 2, (coefficients @ z) % 2


def _herald_choice(x, z, position, unassigned):
    """The auxiliary whose postselection lets the most others be corrected."""

    def unlocked(candidate):
        rest = [node for node in unassigned if node != candidate]
        count = 0
        for node in rest:
            earlier = [position[other] for other in rest if other != node]
            if _flip_operator(x, z, position[node], earlier) is not None:
                count += 1
        return -count, candidate

    return min(unassigned, key=unlocked)


def _narrow_order(order, neighbors, depends):
    """Reorder ``order`` within its dependencies to keep few qubits entangled."""
    placed, active, result = set(), set(), []
    remaining = list(order)

    def cost(node):
        fresh = neighbors[node] - active - placed
        return node not in active, len(fresh), remaining.index(node)

    while remaining:
        best = min((n for n in remaining if depends[n] <= placed), key=cost)
        active |= neighbors[best] | {best}
        placed.add(best)
        remaining.remove(best)
        result.append(best)
    return result


def standardize(pattern: MeasurementPattern, herald: bool = False) -> CustomState:
    """Execute all Pauli measurements classically and return the custom state.

    Pauli outcomes are fixed to +1 where random. The rotated auxiliaries keep
    their slots; their adaptive signs and the output byproducts are derived
    from the remaining stabilizer group so the result is deterministic.

    Where no correction exists the call fails, unless ``herald`` is set: then
    the auxiliary is postselected on its reference outcome instead and the
    result is deterministic on every accepted branch.
    """
    shifted = shift_signals(pattern)
    nodes = shifted.nodes
    index = {node: i for i, node in enumerate(nodes)}
    tableau = StabilizerTableau.graph_state(
        len(nodes), [(index[a], index[b]) for a, b in shifted.edges]
    )
    for m in shifted.measurements:
        tableau.apply_local_clifford(index[m.node], m.frame)

    policy = OutcomePolicy.fixed_plus()
    reference = {}
    for m in shifted.measurements:
        if m.is_pauli:
            observable = PauliString.single(len(nodes), index[m.node], m.basis.value)
            outcome, _ = tableau.measure(observable, policy)
            reference[m.node] = 0 if outcome == 1 else 1
    rotated = [m for m in shifted.measurements if not m.is_pauli]
    reference.update({m.node: 0 for m in rotated})

    kept = sorted([m.node for m in rotated] + shifted.outputs)
    reduced = tableau.restrict([index[node] for node in kept])
    position = {node: i for i, node in enumerate(kept)}
    x = np.array([s.x_bits for s in reduced.stabilizers], dtype=np.uint8)
    z = np.array([s.z_bits for s in reduced.stabilizers], dtype=np.uint8)

    # peel off the auxiliaries that can be measured last, layer by layer
    layers, flips, heralded = [], {}, []
    unassigned = [m.node for m in rotated]
    while unassigned:
        layer = []
        for node in unassigned:
            earlier = [position[other] for other in unassigned if other != node]
            operator = _flip_operator(x, z, position[node], earlier)
            if operator is not None:
                layer.append(node)
                flips[node] = operator
        if not layer:
            if not herald:
                raise PatternError(
                    "nondeterministic",
                    "No correction exists for auxiliaries {}".format(unassigned),
                )
            node = _herald_choice(x, z, position, unassigned)
            heralded.append(node)
            layer.append(node)
        unassigned = [node for node in unassigned if node not in layer]
        layers.append(layer)
    order = [node for layer in reversed(layers) for node in layer]

    s_domains = {node: Domain() for node in order}
    t_domains = {node: Domain() for node in order}
    corrections = {o: (Domain(), Domain()) for o in shifted.outputs}
    for i, node in enumerate(order):
        if node in heralded:
            continue
        flip_x, flip_z = flips[node]
        for later in order[i + 1 :]:
            p = position[later]
            if flip_x[p]:
                s_domains[later] ^= Domain([node])
            if flip_z[p]:
                t_domains[later] ^= Domain([node])
        for output in shifted.outputs:
            p = position[output]
            cx, cz = corrections[output]
            corrections[output] = (
                cx ^ Domain([node]) if flip_x[p] else cx,
                cz ^ Domain([node]) if flip_z[p] else cz,
            )

    graph, local_cliffords = tableau_to_graphstate(reduced)
    neighbors = {kept[a]: {kept[b] for b in graph.neighbors(a)} for a in graph.nodes}
    order = _narrow_order(
        order, neighbors, {n: s_domains[n].nodes | t_domains[n].nodes for n in order}
    )
    by_node = {m.node: m for m in rotated}
    plan = []
    for node in order:
        m = by_node[node]
        sign = m.sign * (-1 if m.s_domain.evaluate(reference) else 1)
        plan.append(
            Measurement(
                node,
                Measurement.Basis.ROTATED,
                m.slot,
                sign,
                s_domains[node],
                t_domains[node],
                local_cliffords[position[node]],
            )
        )
    derived = MeasurementPattern(
        nodes=kept,
        edges=[(kept[a], kept[b]) for a, b in graph.edges],
        inputs=[],
        outputs=shifted.outputs,
        measurements=plan,
        byproducts=corrections,
        output_corrections={o: local_cliffords[position[o]] for o in shifted.outputs},
        num_slots=shifted.num_slots,
        heralds={node: Domain([node]) for node in heralded},
    )
    derived = shift_signals(derived).with_output_corrections(shifted.output_corrections)
    byproducts = {}
    for output, (bx, bz) in derived.byproducts.items():
        source_x, source_z = shifted.byproducts[output]
        byproducts[output] = (
            bx ^ source_x.evaluate(reference),
            bz ^ source_z.evaluate(reference),
        )
    eliminated = len(shifted.measurements) - len(rotated)
    logging.info(
        "Standardized {} nodes: eliminated {} Pauli measurements, "
        "{} rotated remain, {} heralded".format(
            len(nodes), eliminated, len(rotated), len(heralded)
        )
    )
    return CustomState(
        nodes=derived.nodes,
        edges=derived.edges,
        inputs=[],
        outputs=derived.outputs,
        measurements=derived.measurements,
        byproducts=byproducts,
        output_corrections=derived.output_corrections,
        num_slots=derived.num_slots,
        heralds=derived.heralds,
        source=pattern,
        eliminated=eliminated,
    )


def resource_report(state: CustomState, layers: Optional[Tuple[int, int]] = None):
    report = {
        "qubits": len(state.nodes),
        "outputs": len(state.outputs),
        "rotated_measurements": len(state.rotated),
        "eliminated_measurements": state.eliminated,
        "heralded_measurements": len(state.heralds),
        "edges": len(state.edges),
        "slots": state.num_slots,
    }
    if layers is not None:
        S, K = layers
        report["circuit"] = {
            "qubits": S,
            "single_qubit_gates": 2 * K * S,
            "entangling_gates": K * (S - 1),
        }
    return report
