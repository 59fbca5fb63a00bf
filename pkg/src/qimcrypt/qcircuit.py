"""Gate-level circuit IR, multi-controlled-X decomposition and basis lowering.

Qubit ``q`` is bit ``q`` of a computational-basis index (little-endian), so a
register holding an integer ``v`` on qubits ``base .. base+k-1`` stores bit
``j`` of ``v`` on qubit ``base + j``.

Controls carry a polarity: ``(q, True)`` fires on ``|1>``, ``(q, False)`` on
``|0>``. Negative controls stay native in the IR and are lowered to
X-conjugation only by :func:`decompose_mcx` / :func:`transpile_to_basis`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

__all__ = [
    "Gate",
    "Circuit",
    "CircuitError",
    "BASIS_KINDS",
    "h",
    "x",
    "sx",
    "rz",
    "controlled_x",
    "decompose_mcx",
    "lower_negative_controls",
    "transpile_to_basis",
    "cancel_adjacent",
    "quantum_cost",
    "circuit_depth",
    "count_controlled",
    "dumps_netlist",
    "loads_netlist",
]

KINDS = ("H", "X", "SX", "RZ", "CX", "MCX")
BASIS_KINDS = frozenset({"X", "SX", "RZ", "CX"})


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    kind: str
    target: int
    controls: tuple[tuple[int, bool], ...] = ()
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        ctrl_qubits = [q for q, _ in self.controls]
        if self.target in ctrl_qubits or len(set(ctrl_qubits)) != len(ctrl_qubits):
            raise CircuitError(f"control/target overlap in {self}")
        expected = {"CX": 1}.get(self.kind)
        if expected is not None and len(self.controls) != expected:
            raise CircuitError("CX takes exactly one control")
        if self.kind == "MCX" and not self.controls:
            raise CircuitError("MCX needs at least one control; use X")
        if self.kind not in ("CX", "MCX") and self.controls:
            raise CircuitError(f"{self.kind} cannot be controlled")
        if (self.kind == "RZ") != (self.angle is not None):
            raise CircuitError("angle is required for RZ and only for RZ")

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.target, *(q for q, _ in self.controls))

    @property
    def num_controls(self) -> int:
        return len(self.controls)

    def remap(self, mapping: Sequence[int] | dict[int, int]) -> "Gate":
        return Gate(
            self.kind,
            mapping[self.target],
            tuple((mapping[q], pol) for q, pol in self.controls),
            self.angle,
        )


def h(q: int) -> Gate:
    return Gate("H", q)


def x(q: int) -> Gate:
    return Gate("X", q)


def sx(q: int) -> Gate:
    return Gate("SX", q)


def rz(q: int, angle: float) -> Gate:
    return Gate("RZ", q, angle=float(angle))


def controlled_x(controls: Iterable[tuple[int, bool]], target: int) -> Gate:
    """X, CX or MCX depending on how many controls there are."""
    controls = tuple((int(q), bool(p)) for q, p in controls)
    if not controls:
        return Gate("X", target)
    if len(controls) == 1:
        return Gate("CX", target, controls)
    return Gate("MCX", target, controls)


@dataclass(frozen=True)
class Circuit:
    width: int
    gates: tuple[Gate, ...] = ()
    ancillas: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "ancillas", frozenset(self.ancillas))
        for g in self.gates:
            if max(g.qubits) >= self.width or min(g.qubits) < 0:
                raise CircuitError(f"{g} out of range for width {self.width}")
        if any(a >= self.width for a in self.ancillas):
            raise CircuitError("ancilla index beyond width")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def extend(self, gates: Iterable[Gate], *, width: int | None = None,
               ancillas: Iterable[int] = ()) -> "Circuit":
        return Circuit(
            self.width if width is None else width,
            self.gates + tuple(gates),
            self.ancillas | frozenset(ancillas),
        )

    def compose(self, other: "Circuit", mapping: Sequence[int] | None = None) -> "Circuit":
        """Append ``other``; ``mapping[q]`` places its qubit ``q`` on ours."""
        if mapping is None:
            mapping = range(other.width)
            width = max(self.width, other.width)
        else:
            width = max(self.width, max(mapping) + 1)
        gates = [g.remap(mapping) for g in other.gates]
        return Circuit(width, self.gates + tuple(gates),
                       self.ancillas | {mapping[a] for a in other.ancillas})

    def inverse(self) -> "Circuit":
        inv = []
        for g in reversed(self.gates):
            if g.kind == "RZ":
                inv.append(rz(g.target, -g.angle))
            elif g.kind == "SX":
                # SX^-1 = SX^3
                inv.extend([g, g, g])
            else:
                inv.append(g)
        return Circuit(self.width, inv, self.ancillas)


def _with_new_ancillas(circuit: Circuit, count: int) -> tuple[int, list[int]]:
    start = circuit.width
    return start + count, list(range(start, start + count))


def decompose_mcx(gate: Gate, ancillas: Sequence[int] = ()) -> list[Gate]:
    """Lower one controlled-X to X, CX and two-control MCX gates.

    ``c`` controls use ``c - 1`` clean ancillas: an AND ladder of ``c - 1``
    Toffolis, one CX onto the target, and the mirrored ladder to restore the
    ancillas, ``2(c - 1)`` Toffolis in total. Negative controls are wrapped in
    X gates.
    """
    if gate.kind not in ("CX", "MCX"):
        raise CircuitError(f"decompose_mcx expects a controlled X, got {gate.kind}")
    c = gate.num_controls
    if c == 0:
        raise CircuitError("zero-control MCX; use X")
    flips = [x(q) for q, pol in gate.controls if not pol]
    ctrls = [q for q, _ in gate.controls]
    if c == 1:
        core = [Gate("CX", gate.target, ((ctrls[0], True),))]
    elif c == 2:
        core = [Gate("MCX", gate.target, ((ctrls[0], True), (ctrls[1], True)))]
    else:
        if len(ancillas) < c - 1:
            raise CircuitError(f"{c}-control MCX needs {c - 1} ancillas, got {len(ancillas)}")
        anc = list(ancillas[: c - 1])
        if set(anc) & set(gate.qubits):
            raise CircuitError("ancillas overlap the gate's qubits")
        ladder = [Gate("MCX", anc[0], ((ctrls[0], True), (ctrls[1], True)))]
        for k in range(2, c):
            ladder.append(Gate("MCX", anc[k - 1], ((anc[k - 2], True), (ctrls[k], True))))
        core = ladder + [Gate("CX", gate.target, ((anc[-1], True),))] + ladder[::-1]
    return flips + core + flips


def lower_negative_controls(circuit: Circuit) -> Circuit:
    """Rewrite every negative control as X-conjugation around a positive one."""
    out = []
    for g in circuit.gates:
        if g.kind in ("CX", "MCX") and not all(p for _, p in g.controls):
            flips = [x(q) for q, p in g.controls if not p]
            out += flips + [Gate(g.kind, g.target, tuple((q, True) for q, _ in g.controls))] + flips
        else:
            out.append(g)
    return Circuit(circuit.width, out, circuit.ancillas)


_T = math.pi / 4


def _toffoli_template(a: int, b: int, c: int) -> list[Gate]:
    # standard 6-CX construction; T = RZ(pi/4) up to global phase
    def cx(ctl, tgt):
        return Gate("CX", tgt, ((ctl, True),))

    return [
        *_h_template(c), cx(b, c), rz(c, -_T), cx(a, c), rz(c, _T), cx(b, c),
        rz(c, -_T), cx(a, c), rz(b, _T), rz(c, _T), *_h_template(c),
        cx(a, b), rz(a, _T), rz(b, -_T), cx(a, b),
    ]


def _h_template(q: int) -> list[Gate]:
    return [rz(q, math.pi / 2), sx(q), rz(q, math.pi / 2)]


def transpile_to_basis(circuit: Circuit, *, simplify: bool = False) -> Circuit:
    """Lower to {X, SX, RZ, CX}, equal to the input up to a global phase.

    MCX gates with three or more controls borrow a shared pool of clean
    ancillas appended after the existing qubits. ``simplify`` runs
    :func:`cancel_adjacent` on the result.
    """
    need = max((g.num_controls - 1 for g in circuit.gates if g.num_controls >= 3), default=0)
    width, pool = _with_new_ancillas(circuit, need)
    out: list[Gate] = []
    for g in circuit.gates:
        if g.kind in ("X", "SX", "RZ"):
            out.append(g)
        elif g.kind == "H":
            out += _h_template(g.target)
        else:
            for piece in decompose_mcx(g, pool):
                if piece.kind == "MCX":
                    (a, _), (b, _) = piece.controls
                    out += _toffoli_template(a, b, piece.target)
                else:
                    out.append(piece)
    result = Circuit(width, out, circuit.ancillas | set(pool))
    return cancel_adjacent(result) if simplify else result


def cancel_adjacent(circuit: Circuit) -> Circuit:
    """Peephole pass: drop back-to-back X/CX/MCX pairs and fuse adjacent RZ.

    Two gates are adjacent when no gate between them touches any of their
    qubits. Repeats until nothing changes.
    """
    gates = list(circuit.gates)
    changed = True
    while changed:
        changed = False
        out: list[Gate] = []
        last_on: dict[int, int] = {}  # qubit -> index in out of last gate touching it
        for g in gates:
            prev_idx = {last_on.get(q) for q in g.qubits}
            if len(prev_idx) == 1 and None not in prev_idx:
                (i,) = prev_idx
                prev = out[i]
                if set(prev.qubits) == set(g.qubits):
                    merged = _merge(prev, g)
                    if merged is not False:
                        out[i] = merged
                        if merged is None:
                            for q in g.qubits:
                                del last_on[q]
                        changed = True
                        continue
            out.append(g)
            for q in g.qubits:
                last_on[q] = len(out) - 1
        gates = [g for g in out if g is not None]
    return Circuit(circuit.width, gates, circuit.ancillas)


def _merge(a: Gate, b: Gate):
    """None if a·b is identity, a fused gate, or False if not mergeable."""
    if a.kind == b.kind and a.kind in ("X", "CX", "MCX") and a.target == b.target \
            and set(a.controls) == set(b.controls):
        return None
    if a.kind == b.kind == "RZ" and a.target == b.target:
        angle = math.remainder(a.angle + b.angle, 4 * math.pi)
        if abs(angle) < 1e-12:
            return None
        return rz(a.target, angle)
    return False


def quantum_cost(circuit: Circuit) -> int:
    """Number of gates (there is no explicit identity gate in the IR)."""
    return len(circuit.gates)


def circuit_depth(circuit: Circuit) -> int:
    """ASAP layering: a gate lands one step after the latest gate on any of its qubits."""
    level: dict[int, int] = {}
    depth = 0
    for g in circuit.gates:
        step = 1 + max((level.get(q, 0) for q in g.qubits), default=0)
        for q in g.qubits:
            level[q] = step
        depth = max(depth, step)
    return depth


def count_controlled(circuit: Circuit) -> dict[str, int]:
    """Gate tallies by control count: ``x`` (0), ``cx`` (1), ``toffoli`` (2), ``mcx`` (3+)."""
    tally = {"x": 0, "cx": 0, "toffoli": 0, "mcx": 0, "other": 0}
    for g in circuit.gates:
        if g.kind in ("X", "CX", "MCX"):
            key = ("x", "cx", "toffoli")[g.num_controls] if g.num_controls < 3 else "mcx"
            tally[key] += 1
        else:
            tally["other"] += 1
    return tally


def dumps_netlist(circuit: Circuit) -> str:
    """One gate per line: ``GATE target [q+|q- ...] [angle]``, after WIDTH/ANCILLA headers."""
    lines = [f"WIDTH {circuit.width}"]
    if circuit.ancillas:
        lines.append("ANCILLA " + " ".join(str(a) for a in sorted(circuit.ancillas)))
    for g in circuit.gates:
        parts = [g.kind, str(g.target)]
        parts += [f"{q}{'+' if p else '-'}" for q, p in g.controls]
        if g.angle is not None:
            parts.append(repr(g.angle))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def loads_netlist(text: str) -> Circuit:
    width = None
    ancillas: list[int] = []
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        try:
            if head == "WIDTH":
                width = int(rest[0])
            elif head == "ANCILLA":
                ancillas += [int(a) for a in rest]
            elif head == "RZ":
                gates.append(rz(int(rest[0]), float(rest[1])))
            else:
                controls = tuple((int(tok[:-1]), tok[-1] == "+") for tok in rest[1:])
                if any(tok[-1] not in "+-" for tok in rest[1:]):
                    raise CircuitError(f"bad control token in {line!r}")
                gates.append(Gate(head, int(rest[0]), controls))
        except (IndexError, ValueError) as exc:
            raise CircuitError(f"netlist line {lineno}: {exc}") from exc
    if width is None:
        raise CircuitError("netlist is missing its WIDTH header")
    return Circuit(width, gates, ancillas)
