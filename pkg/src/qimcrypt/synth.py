"""Control-pattern compression for coordinate-controlled X stages.

Each value bit-plane of a per-coordinate byte table is an ON-set over the
``2n`` coordinate variables. Value qubits are flipped by a cascade of
controlled-X gates, so two overlapping cubes would cancel on their shared
minterms (XOR, not OR). Covers here are therefore *disjoint*: a partition of
the ON-set into cubes.

Cubes are strings over ``{'0', '1', '-'}``, Y bits then X bits, MSB first, so
character ``j`` talks about minterm bit ``2n - 1 - j`` (= coordinate qubit
``2n - 1 - j`` in the NEQR layout).
"""
from __future__ import annotations

import sys
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import csr_array

from .qcircuit import Circuit, Gate, controlled_x, h
from .qimage import VALUE_BITS, GrayImage, data_width

__all__ = [
    "Cover",
    "EXACT_MAX_VARS",
    "minimize_cover",
    "cube_minterms",
    "cube_controls",
    "bitplane_on_sets",
    "synthesize_controlled_xor",
    "synthesize_minimized_encoder",
    "factor_shared_controls",
    "dumps_pla",
    "loads_pla",
]

EXACT_MAX_VARS = 8
# components up to this many minterms go to the in-house search, larger ones to MILP
SMALL_COMPONENT = 20
DEFAULT_BUDGET = 50_000
MILP_TIME_LIMIT = 30.0


@dataclass(frozen=True)
class Cover:
    num_vars: int
    cubes: tuple[str, ...]
    exact: bool = True

    def __len__(self) -> int:
        return len(self.cubes)

    def __iter__(self):
        return iter(self.cubes)

    def minterms(self) -> set[int]:
        out: set[int] = set()
        for c in self.cubes:
            out |= cube_minterms(c)
        return out


def _cube_str(free: int, base: int, v: int) -> str:
    return "".join(
        "-" if (free >> b) & 1 else "01"[(base >> b) & 1] for b in range(v - 1, -1, -1)
    )


def cube_minterms(cube: str) -> set[int]:
    v = len(cube)
    out = {0}
    for j, ch in enumerate(cube):
        b = 1 << (v - 1 - j)
        if ch == "1":
            out = {m | b for m in out}
        elif ch == "-":
            out |= {m | b for m in out}
        elif ch != "0":
            raise ValueError(f"bad cube literal {ch!r}")
    return out


def cube_controls(cube: str) -> tuple[tuple[int, bool], ...]:
    """Controls on coordinate qubits; dashes drop out, '0' becomes a negative control."""
    v = len(cube)
    return tuple(
        (v - 1 - j, ch == "1") for j, ch in enumerate(cube) if ch != "-"
    )[::-1]


def _implicants(on: set[int], v: int) -> list[tuple[int, int, int, int]]:
    """All cubes inside the ON-set as ``(size, free, base, minterm bitmask)``."""
    masks: dict[tuple[int, int], int] = {(0, m): 1 << m for m in on}
    by_free: dict[int, set[int]] = {0: set(on)}
    for free in range(1, 1 << v):
        low = free & -free
        sub = free ^ low
        prev = by_free.get(sub)
        if not prev:
            continue
        bases = {b for b in prev if not b & low and (b | low) in prev}
        if bases:
            by_free[free] = bases
            for b in bases:
                masks[(free, b)] = masks[(sub, b)] | masks[(sub, b | low)]
    cands = [(1 << bin(f).count("1"), f, b, m) for (f, b), m in masks.items()]
    cands.sort(key=lambda c: (-c[0], c[1], c[2]))
    return cands


def _components(on: set[int], cands):
    """Split the ON-set where no implicant straddles two pieces."""
    parent = {m: m for m in on}

    def find(m):
        while parent[m] != m:
            parent[m] = parent[parent[m]]
            m = parent[m]
        return m

    for c in cands:
        if c[0] == 1:
            continue
        mm = c[3]
        root = find((mm & -mm).bit_length() - 1)
        mm &= mm - 1
        while mm:
            low = mm & -mm
            other = find(low.bit_length() - 1)
            if other != root:
                parent[other] = root
            mm ^= low
    parts: dict[int, set[int]] = defaultdict(set)
    for m in on:
        parts[find(m)].add(m)
    out = []
    for root in sorted(parts, key=lambda r: min(parts[r])):
        part = parts[root]
        mask = 0
        for m in part:
            mask |= 1 << m
        out.append((part, [c for c in cands if c[3] & ~mask == 0]))
    return out


def _greedy(on_mask: int, cands) -> list[tuple[int, int, int, int]]:
    chosen = []
    remaining = on_mask
    for c in cands:
        if remaining == 0:
            break
        if c[3] & ~remaining == 0:
            chosen.append(c)
            remaining &= ~c[3]
    return chosen


def _exact(on: set[int], cands, budget: int | None = None) -> tuple[list, bool]:
    """Branch and bound; returns ``(cover, proven_optimal)``."""
    on_mask = 0
    for m in on:
        on_mask |= 1 << m
    best = _greedy(on_mask, cands)
    by_minterm: dict[int, list] = defaultdict(list)
    for c in cands:
        mm = c[3]
        while mm:
            low = mm & -mm
            by_minterm[low.bit_length() - 1].append(c)
            mm ^= low
    seen: dict[int, int] = {}
    path: list = []
    nodes = 0

    class _OutOfBudget(Exception):
        pass

    def options(rem: int) -> list[tuple[int, list]]:
        out = []
        mm = rem
        while mm:
            low = mm & -mm
            m = low.bit_length() - 1
            out.append((m, [c for c in by_minterm[m] if c[3] & ~rem == 0]))
            mm ^= low
        out.sort(key=lambda item: (len(item[1]), item[0]))
        return out

    def lower_bound(opts) -> int:
        # minterms no single fitting cube can share each need their own cube
        blocked = 0
        count = 0
        for m, fits in opts:
            if (blocked >> m) & 1:
                continue
            count += 1
            for c in fits:
                blocked |= c[3]
        return count

    def search(rem: int) -> None:
        nonlocal best, nodes
        nodes += 1
        if budget is not None and nodes > budget:
            raise _OutOfBudget
        if rem == 0:
            if len(path) < len(best):
                best = list(path)
            return
        depth = len(path)
        if seen.get(rem, sys.maxsize) <= depth:
            return
        seen[rem] = depth
        opts = options(rem)
        if depth + lower_bound(opts) >= len(best):
            return
        for c in opts[0][1]:
            path.append(c)
            search(rem & ~c[3])
            path.pop()
            if depth + 1 >= len(best):
                return

    try:
        search(on_mask)
    except _OutOfBudget:
        return best, False
    return best, True


def _milp(part: set[int], cands, time_limit: float) -> tuple[list, bool]:
    """Set partitioning ILP: one binary per implicant, every minterm covered once."""
    order = sorted(part)
    row = {m: i for i, m in enumerate(order)}
    rows, cols = [], []
    for j, c in enumerate(cands):
        mm = c[3]
        while mm:
            low = mm & -mm
            rows.append(row[low.bit_length() - 1])
            cols.append(j)
            mm ^= low
    a = csr_array((np.ones(len(rows)), (rows, cols)), shape=(len(order), len(cands)))
    res = milp(np.ones(len(cands)), constraints=LinearConstraint(a, 1, 1),
               integrality=np.ones(len(cands)), bounds=Bounds(0, 1),
               options={"time_limit": time_limit})
    if res.x is None:
        return _greedy(sum(1 << m for m in part), cands), False
    return [c for c, v in zip(cands, res.x) if v > 0.5], res.status == 0


def minimize_cover(on_set: Iterable[int], num_vars: int, *,
                   budget: int | None = DEFAULT_BUDGET,
                   time_limit: float = MILP_TIME_LIMIT) -> Cover:
    """Smallest set of pairwise-disjoint cubes whose union is exactly ``on_set``.

    Up to :data:`EXACT_MAX_VARS` variables the ON-set is split into pieces no
    implicant straddles; small pieces go through a depth-first branch and
    bound over every implicant (at most ``budget`` nodes), large ones through
    a set-partitioning MILP (HiGHS, ``time_limit`` seconds). Both are seeded
    with or checked against the greedy cover. ``Cover.exact`` is False when a
    limit cut the proof short. Above that size the greedy
    largest-cube-first cover is returned.
    """
    on = set(int(m) for m in on_set)
    if any(not 0 <= m < (1 << num_vars) for m in on):
        raise ValueError(f"minterm outside [0, 2**{num_vars})")
    if not on:
        return Cover(num_vars, ())
    cands = _implicants(on, num_vars)
    exact = num_vars <= EXACT_MAX_VARS
    if exact:
        chosen = []
        for part, part_cands in _components(on, cands):
            if len(part) <= SMALL_COMPONENT:
                got, proven = _exact(part, part_cands, budget)
            else:
                got, proven = _milp(part, part_cands, time_limit)
            chosen += got
            exact = exact and proven
    else:
        full = 0
        for m in on:
            full |= 1 << m
        chosen = _greedy(full, cands)
    cubes = sorted(_cube_str(f, b, num_vars) for _, f, b, _ in chosen)
    return Cover(num_vars, tuple(cubes), exact)


def bitplane_on_sets(table: Sequence[int], bits: int = VALUE_BITS) -> list[set[int]]:
    """``out[i]`` = coordinates whose entry has bit ``i`` set."""
    return [{eta for eta, v in enumerate(table) if (v >> i) & 1} for i in range(bits)]


def synthesize_controlled_xor(table: Sequence[int], n: int, *, minimize: bool = True) -> list[Gate]:
    """Gates XOR-ing ``table[eta]`` into the value register at coordinate ``eta``.

    Without minimization this is one fully-specified controlled X per set bit
    (pixel-major); with it, one gate per cube of each bit-plane's disjoint
    cover (bit-plane-major, c0 first).
    """
    if len(table) != 4 ** n:
        raise ValueError(f"table needs {4 ** n} entries, got {len(table)}")
    v = 2 * n
    gates = []
    if not minimize:
        for eta, val in enumerate(table):
            ctrls = tuple((q, bool((eta >> q) & 1)) for q in range(v))
            for i in range(VALUE_BITS):
                if (val >> i) & 1:
                    gates.append(controlled_x(ctrls, v + i))
        return gates
    for i, on in enumerate(bitplane_on_sets(table)):
        for cube in minimize_cover(on, v).cubes:
            gates.append(controlled_x(cube_controls(cube), v + i))
    return gates


def synthesize_minimized_encoder(image: GrayImage) -> Circuit:
    n = image.n
    gates = [h(q) for q in range(2 * n)]
    gates += synthesize_controlled_xor(image.pixels, n, minimize=True)
    return Circuit(data_width(n), gates)


def _runs(gates: Sequence[Gate]):
    """Split into maximal stretches of mutually commuting controlled-X gates.

    Controlled-X gates commute when no gate's target is another's control.
    Yields ``(is_run, gates)`` chunks in order.
    """
    run: list[Gate] = []
    targets: set[int] = set()
    controls: set[int] = set()
    for g in gates:
        if g.kind in ("X", "CX", "MCX"):
            ctrl = {q for q, _ in g.controls}
            if g.target not in controls and not ctrl & targets:
                run.append(g)
                targets.add(g.target)
                controls |= ctrl
                continue
            if run:
                yield True, run
            run, targets, controls = [g], {g.target}, ctrl
        else:
            if run:
                yield True, run
            run, targets, controls = [], set(), set()
            yield False, [g]
    if run:
        yield True, run


def factor_shared_controls(circuit: Circuit, threshold: int = 3) -> Circuit:
    """Compute a repeated control pattern once into an ancilla and fan out with CX.

    Within each commuting stretch, ``g >= threshold`` gates sharing one
    pattern of two or more controls become ``MCX(pattern -> anc)``, ``g`` CX
    gates from the ancilla, and the mirrored ``MCX`` restoring it. One fresh
    ancilla is appended (and reused) when anything qualifies.
    """
    if threshold < 2:
        raise ValueError("threshold must be at least 2")
    chunks = list(_runs(circuit.gates))
    anc = circuit.width
    used = False
    out: list[Gate] = []
    for is_run, gates in chunks:
        if not is_run:
            out += gates
            continue
        groups: dict[frozenset, list[int]] = defaultdict(list)
        for idx, g in enumerate(gates):
            if g.num_controls >= 2:
                groups[frozenset(g.controls)].append(idx)
        factored = {key: idxs for key, idxs in groups.items() if len(idxs) >= threshold}
        first_of = {idxs[0]: key for key, idxs in factored.items()}
        skip = {i for idxs in factored.values() for i in idxs}
        for idx, g in enumerate(gates):
            if idx in first_of:
                key = first_of[idx]
                pattern = gates[idx].controls
                compute = Gate("MCX", anc, pattern)
                out.append(compute)
                out += [Gate("CX", gates[i].target, ((anc, True),)) for i in factored[key]]
                out.append(compute)
                used = True
            elif idx not in skip:
                out.append(g)
    if not used:
        return circuit
    return Circuit(circuit.width + 1, out, circuit.ancillas | {anc})


def dumps_pla(cover: Cover) -> str:
    """Espresso-style PLA text for a single-output cover."""
    lines = [f".i {cover.num_vars}", ".o 1", f".p {len(cover.cubes)}"]
    lines += [f"{c} 1" for c in cover.cubes]
    lines.append(".e")
    return "\n".join(lines) + "\n"


def loads_pla(text: str) -> Cover:
    num_vars = None
    cubes = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith(".i "):
            num_vars = int(line.split()[1])
        elif line.startswith("."):
            continue
        else:
            cube, out = line.split()
            if out == "1":
                cubes.append(cube)
    if num_vars is None:
        raise ValueError("PLA text has no .i line")
    return Cover(num_vars, tuple(cubes))
