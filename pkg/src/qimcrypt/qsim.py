"""Statevector and density-matrix simulation, Kraus noise channels, fidelity.

A density matrix on ``w`` qubits is handled as a ``2w``-qubit vector
(row-major flattening): row qubit ``q`` is vector bit ``q + w`` and column
qubit ``q`` is vector bit ``q``. ``U rho U^dagger`` is then ``U`` on the row
bits and ``conj(U)`` on the column bits, so both paths share one set of
kernels.

Hadamards are applied unscaled and the accumulated ``2^(-k/2)`` is folded in
once at the end, which keeps H-layer + permutation circuits exact in
floating point (amplitudes come out as exact powers of two).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .qcircuit import Circuit, Gate

__all__ = [
    "StateVector",
    "DensityMatrix",
    "NoiseSpec",
    "SweepPoint",
    "CHANNELS",
    "MAX_SV_WIDTH",
    "MAX_DM_WIDTH",
    "WidthLimitError",
    "basis_state",
    "run_statevector",
    "run_density",
    "to_density",
    "sample_counts",
    "marginal_counts",
    "kraus_operators",
    "apply_noise_channel",
    "state_fidelity",
    "noise_sweep",
    "sweep_csv",
]

MAX_SV_WIDTH = 24
MAX_DM_WIDTH = 12
_INV_SQRT2 = 1 / math.sqrt(2)

CHANNELS = (
    "amplitude-damping",
    "phase-damping",
    "bit-flip",
    "phase-flip",
    "bit-phase-flip",
    "depolarizing",
)


class WidthLimitError(ValueError):
    pass


class StateVector:
    """Read-only amplitude vector over ``2**width`` basis states."""

    def __init__(self, amplitudes, width: int | None = None):
        amps = np.array(amplitudes, dtype=np.complex128)
        if width is None:
            width = int(amps.shape[0]).bit_length() - 1
        if amps.shape != (1 << width,):
            raise ValueError(f"expected {1 << width} amplitudes, got {amps.shape}")
        amps.setflags(write=False)
        self.amplitudes = amps
        self.width = width

    def __repr__(self):
        nz = int(np.count_nonzero(self.amplitudes))
        return f"StateVector(width={self.width}, nonzero={nz})"

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def nonzero(self, tol: float = 0.0) -> dict[int, complex]:
        idx = np.flatnonzero(np.abs(self.amplitudes) > tol)
        return {int(i): complex(self.amplitudes[i]) for i in idx}

    def restrict(self, width: int) -> "StateVector":
        """Drop the qubits at index >= ``width``, which must all be |0>."""
        amps = self.amplitudes
        tail = amps[1 << width:]
        if tail.size and np.max(np.abs(tail)) > 1e-12:
            raise ValueError("high qubits are not in |0>; cannot restrict")
        return StateVector(amps[: 1 << width], width)


class DensityMatrix:
    def __init__(self, matrix, width: int | None = None):
        mat = np.array(matrix, dtype=np.complex128)
        if width is None:
            width = int(mat.shape[0]).bit_length() - 1
        if mat.shape != (1 << width, 1 << width):
            raise ValueError(f"expected a {1 << width}-square matrix, got {mat.shape}")
        mat.setflags(write=False)
        self.matrix = mat
        self.width = width

    def __repr__(self):
        return f"DensityMatrix(width={self.width}, trace={self.trace():.6g})"

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) <= tol)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])


def basis_state(index: int, width: int) -> StateVector:
    amps = np.zeros(1 << width, dtype=np.complex128)
    amps[index] = 1
    return StateVector(amps, width)


def to_density(state: StateVector) -> DensityMatrix:
    a = state.amplitudes
    return DensityMatrix(np.outer(a, a.conj()), state.width)


def _gate_matrix(g: Gate):
    if g.kind == "H":
        return (1, 1, 1, -1)  # unscaled; caller tracks the sqrt(2)
    if g.kind == "SX":
        return (0.5 + 0.5j, 0.5 - 0.5j, 0.5 - 0.5j, 0.5 + 0.5j)
    if g.kind == "RZ":
        return (np.exp(-0.5j * g.angle), 0, 0, np.exp(0.5j * g.angle))
    raise AssertionError(g.kind)


def _masks(g: Gate, shift: int = 0) -> tuple[int, int]:
    mask = value = 0
    for q, pol in g.controls:
        mask |= 1 << (q + shift)
        if pol:
            value |= 1 << (q + shift)
    return mask, value


def _apply_gate(vec: np.ndarray, g: Gate, shift: int = 0, conj: bool = False) -> int:
    """Apply ``g`` (on bits offset by ``shift``); returns the number of unscaled H applied."""
    if g.kind in ("X", "CX", "MCX"):
        mask, value = _masks(g, shift)
        kernels.apply_mcx(vec, mask, value, g.target + shift)
        return 0
    m = _gate_matrix(g)
    if conj:
        m = tuple(np.conj(v) for v in m)
    kernels.apply_1q(vec, *(complex(v) for v in m), g.target + shift)
    return 1 if g.kind == "H" else 0


def _rescale(vec: np.ndarray, h_count: int) -> np.ndarray:
    if h_count:
        vec = np.ldexp(vec.real, -(h_count // 2)) + 1j * np.ldexp(vec.imag, -(h_count // 2))
        if h_count % 2:
            vec *= _INV_SQRT2
    return vec


def run_statevector(circuit: Circuit, initial: StateVector | None = None) -> StateVector:
    w = circuit.width
    if w > MAX_SV_WIDTH:
        raise WidthLimitError(f"statevector simulation is capped at {MAX_SV_WIDTH} qubits (got {w})")
    if initial is None:
        vec = np.zeros(1 << w, dtype=np.complex128)
        vec[0] = 1
    else:
        if initial.width != w:
            raise ValueError(f"state width {initial.width} != circuit width {w}")
        vec = np.array(initial.amplitudes, dtype=np.complex128)
    h_count = 0
    for g in circuit.gates:
        h_count += _apply_gate(vec, g)
    return StateVector(_rescale(vec, h_count), w)


def run_density(circuit: Circuit, initial: DensityMatrix | None = None) -> DensityMatrix:
    w = circuit.width
    if w > MAX_DM_WIDTH:
        raise WidthLimitError(f"density-matrix simulation is capped at {MAX_DM_WIDTH} qubits (got {w})")
    if initial is None:
        vec = np.zeros(1 << (2 * w), dtype=np.complex128)
        vec[0] = 1
    else:
        if initial.width != w:
            raise ValueError(f"state width {initial.width} != circuit width {w}")
        vec = np.array(initial.matrix, dtype=np.complex128).reshape(-1)
    h_count = 0
    for g in circuit.gates:
        h_count += _apply_gate(vec, g, shift=w)
        h_count += _apply_gate(vec, g, shift=0, conj=True)
    return DensityMatrix(_rescale(vec, h_count).reshape(1 << w, 1 << w), w)


def sample_counts(state: StateVector, shots: int, seed: int | None = None) -> dict[str, int]:
    """Multinomial measurement record, keys MSB-first bitstrings of full width."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    probs = state.probabilities()
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, probs)
    return {format(int(i), f"0{state.width}b"): int(draws[i]) for i in np.flatnonzero(draws)}


def marginal_counts(counts: dict[str, int], keep: int) -> dict[str, int]:
    """Keep the ``keep`` lowest qubits (the rightmost characters)."""
    out: dict[str, int] = {}
    for bits, c in counts.items():
        key = bits[-keep:]
        out[key] = out.get(key, 0) + c
    return out


# -- noise -------------------------------------------------------------------

_I2 = np.eye(2, dtype=np.complex128)
_PX = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_PY = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_PZ = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def kraus_operators(channel: str, gamma: float) -> list[np.ndarray]:
    """Single-qubit Kraus set for one of :data:`CHANNELS`."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    keep, hit = math.sqrt(1 - gamma), math.sqrt(gamma)
    if channel == "amplitude-damping":
        return [np.array([[1, 0], [0, keep]], dtype=np.complex128),
                np.array([[0, hit], [0, 0]], dtype=np.complex128)]
    if channel == "phase-damping":
        return [keep * _I2,
                np.array([[hit, 0], [0, 0]], dtype=np.complex128),
                np.array([[0, 0], [0, hit]], dtype=np.complex128)]
    if channel == "bit-flip":
        return [keep * _I2, hit * _PX]
    if channel == "phase-flip":
        return [keep * _I2, hit * _PZ]
    if channel == "bit-phase-flip":
        return [keep * _I2, hit * _PY]
    if channel == "depolarizing":
        third = math.sqrt(gamma / 3)
        return [keep * _I2, third * _PX, third * _PY, third * _PZ]
    raise ValueError(f"unknown channel {channel!r}; expected one of {CHANNELS}")


@dataclass(frozen=True)
class NoiseSpec:
    """Which channel, how strong, on which qubits, composed how.

    ``mode="cptp"`` applies the single-qubit channel to each listed qubit in
    turn (every Kraus-index combination). ``mode="paper"`` evaluates the
    two-term global sum ``sum_{m in {0,1}} (K_m x ... x K_m) rho (...)^dagger``
    with one shared index on all qubits; it is generally not trace preserving.
    """

    channel: str
    gamma: float
    qubits: tuple[int, ...] | None = None
    mode: str = "cptp"

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise ValueError(f"unknown channel {self.channel!r}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.mode not in ("cptp", "paper"):
            raise ValueError(f"mode must be 'cptp' or 'paper', got {self.mode!r}")
        if self.qubits is not None:
            object.__setattr__(self, "qubits", tuple(self.qubits))


def _apply_on_all(vec: np.ndarray, k: np.ndarray, qubits: Sequence[int], w: int) -> None:
    kc = k.conj()
    for q in qubits:
        kernels.apply_1q(vec, *(complex(v) for v in k.ravel()), q + w)
        kernels.apply_1q(vec, *(complex(v) for v in kc.ravel()), q)


def apply_noise_channel(rho: DensityMatrix, spec: NoiseSpec) -> DensityMatrix:
    w = rho.width
    if w > MAX_DM_WIDTH:
        raise WidthLimitError(f"density-matrix noise is capped at {MAX_DM_WIDTH} qubits (got {w})")
    qubits = tuple(range(w)) if spec.qubits is None else spec.qubits
    if any(not 0 <= q < w for q in qubits):
        raise ValueError(f"noise qubits {qubits} outside width {w}")
    ks = kraus_operators(spec.channel, spec.gamma)
    vec = np.array(rho.matrix, dtype=np.complex128).reshape(-1)
    if not qubits:
        return DensityMatrix(vec.reshape(rho.matrix.shape), w)
    if spec.mode == "cptp":
        for q in qubits:
            acc = np.zeros_like(vec)
            for k in ks:
                tmp = vec.copy()
                _apply_on_all(tmp, k, (q,), w)
                acc += tmp
            vec = acc
    else:
        acc = np.zeros_like(vec)
        for k in ks[:2]:
            tmp = vec.copy()
            _apply_on_all(tmp, k, qubits, w)
            acc += tmp
        vec = acc
    return DensityMatrix(vec.reshape(rho.matrix.shape), w)


def _as_matrix(obj) -> np.ndarray:
    if isinstance(obj, DensityMatrix):
        return obj.matrix
    if isinstance(obj, StateVector):
        return to_density(obj).matrix
    return np.asarray(obj, dtype=np.complex128)


def _drop_noise(vals: np.ndarray) -> np.ndarray:
    """Zero eigenvalues indistinguishable from rounding error (their sqrt would not be)."""
    cut = vals.size * np.finfo(float).eps * max(float(np.max(np.abs(vals), initial=0.0)), 1.0)
    return np.where(vals > cut, vals, 0.0)


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(mat)
    vals = np.sqrt(_drop_noise(vals))
    return (vecs * vals) @ vecs.conj().T


def state_fidelity(rho, sigma, *, method: str = "auto", tol: float = 1e-10) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``.

    ``method="auto"`` takes the pure-state shortcut ``<psi|sigma|psi>`` when
    ``rho`` has purity 1; ``"uhlmann"`` forces the eigendecomposition route.
    """
    a, b = _as_matrix(rho), _as_matrix(sigma)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    for name, m in (("rho", a), ("sigma", b)):
        scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
        if np.max(np.abs(m - m.conj().T), initial=0.0) > tol * scale * 10:
            raise ValueError(f"{name} is not Hermitian")
    if method not in ("auto", "pure", "uhlmann"):
        raise ValueError(f"unknown method {method!r}")
    tr = float(np.real(np.trace(a)))
    purity = float(np.real(np.vdot(a, a)))  # Tr(a^2) for Hermitian a
    if method == "pure" or (method == "auto" and abs(purity - tr * tr) <= 1e-9 * max(1.0, tr * tr)):
        j = int(np.argmax(np.real(np.diag(a))))
        psi = a[:, j] / math.sqrt(float(np.real(a[j, j])))
        f = float(np.real(np.vdot(psi, b @ psi)))
    else:
        s = _psd_sqrt(a)
        vals = np.linalg.eigvalsh(s @ b @ s)
        f = float(np.sum(np.sqrt(_drop_noise(vals))) ** 2)
    return min(max(f, 0.0), 1.0) if abs(tr - 1) < 1e-8 else max(f, 0.0)


@dataclass(frozen=True)
class SweepPoint:
    channel: str
    gamma: float
    fidelity: float
    trace: float


def noise_sweep(state: StateVector, channels: str | Iterable[str] = CHANNELS,
                gammas: Iterable[float] = tuple(i / 10 for i in range(11)),
                mode: str = "cptp", qubits: Sequence[int] | None = None) -> list[SweepPoint]:
    """Fidelity of ``state`` against its noisy image, channel-major, gamma ascending."""
    if isinstance(channels, str):
        channels = (channels,)
    channels = sorted(channels, key=CHANNELS.index)
    gammas = sorted(float(g) for g in gammas)
    if any(not 0 <= g <= 1 for g in gammas):
        raise ValueError("gamma grid must lie in [0, 1]")
    rho = to_density(state)
    psi = state.amplitudes
    points = []
    for ch in channels:
        for g in gammas:
            noisy = apply_noise_channel(rho, NoiseSpec(ch, g, qubits, mode))
            f = float(np.real(np.vdot(psi, noisy.matrix @ psi)))
            points.append(SweepPoint(ch, g, f, noisy.trace()))
    return points


def sweep_csv(points: Iterable[SweepPoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["channel", "gamma", "fidelity", "trace"])
    for p in points:
        writer.writerow([p.channel, f"{p.gamma:.6g}", f"{p.fidelity:.12g}", f"{p.trace:.12g}"])
    return buf.getvalue()
