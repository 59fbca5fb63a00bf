"""Gray images, NEQR states and circuits, and reconstruction from counts.

Register layout for a ``2^n x 2^n`` image (``w = 2n + 8`` qubits):

* qubits ``0 .. n-1``      X (column) bits, LSB first
* qubits ``n .. 2n-1``     Y (row) bits, LSB first
* qubits ``2n .. 2n+7``    pixel value bits ``c0 .. c7``

so the basis index of ``|f(Y,X)>|YX>`` is ``v * 4**n + Y * 2**n + X`` and its
MSB-first bitstring reads ``c7..c0 y_{n-1}..y0 x_{n-1}..x0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .qcircuit import Circuit, controlled_x, h
from .qsim import StateVector

__all__ = [
    "GrayImage",
    "ImageSizeError",
    "Coverage",
    "VALUE_BITS",
    "data_width",
    "basis_index",
    "split_basis_index",
    "coordinate_controls",
    "neqr_state",
    "build_naive_neqr_circuit",
    "reconstruct_image",
    "perfect_counts",
]

VALUE_BITS = 8


class ImageSizeError(ValueError):
    """Side length is not a power of two, or the pixel count is wrong."""


@dataclass(frozen=True)
class GrayImage:
    n: int
    pixels: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ImageSizeError(f"order must be >= 1, got {self.n}")
        pixels = tuple(int(p) for p in self.pixels)
        if len(pixels) != 4 ** self.n:
            raise ImageSizeError(f"order {self.n} needs {4 ** self.n} pixels, got {len(pixels)}")
        if any(not 0 <= p <= 255 for p in pixels):
            raise ValueError("pixel intensities must lie in [0, 255]")
        object.__setattr__(self, "pixels", pixels)

    @property
    def side(self) -> int:
        return 1 << self.n

    def __getitem__(self, yx: tuple[int, int]) -> int:
        y, x = yx
        return self.pixels[y * self.side + x]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "GrayImage":
        side = len(rows)
        if side < 2 or side & (side - 1) or any(len(r) != side for r in rows):
            raise ImageSizeError(f"image must be square with power-of-two side, got {side} rows")
        return cls(side.bit_length() - 1, tuple(p for r in rows for p in r))

    @classmethod
    def from_array(cls, arr) -> "GrayImage":
        return cls.from_rows(np.asarray(arr, dtype=np.int64).tolist())

    @classmethod
    def from_pixels(cls, pixels: Sequence[int]) -> "GrayImage":
        count = len(pixels)
        n = (count.bit_length() - 1) // 2
        if count < 4 or 4 ** n != count:
            raise ImageSizeError(f"{count} pixels is not 4**n")
        return cls(n, tuple(pixels))

    def to_array(self) -> np.ndarray:
        return np.array(self.pixels, dtype=np.uint8).reshape(self.side, self.side)

    def by_position(self) -> dict[str, int]:
        """Pixel values keyed by the ``YX`` bitstring, e.g. ``{'00': 255, ...}``."""
        return {format(i, f"0{2 * self.n}b"): p for i, p in enumerate(self.pixels)}


def data_width(n: int) -> int:
    return 2 * n + VALUE_BITS


def basis_index(value: int, y: int, x: int, n: int) -> int:
    return (value << (2 * n)) | (y << n) | x


def split_basis_index(k: int, n: int) -> tuple[int, int, int]:
    mask = (1 << n) - 1
    return k >> (2 * n), (k >> n) & mask, k & mask


def coordinate_controls(eta: int, n: int) -> tuple[tuple[int, bool], ...]:
    """Controls selecting coordinate ``eta = Y*2^n + X`` (zero bits as negative controls)."""
    return tuple((q, bool((eta >> q) & 1)) for q in range(2 * n))


def neqr_state(image: GrayImage) -> StateVector:
    n = image.n
    amps = np.zeros(1 << data_width(n), dtype=np.complex128)
    amp = 2.0 ** -n
    for eta, v in enumerate(image.pixels):
        amps[(v << (2 * n)) | eta] = amp
    return StateVector(amps, data_width(n))


def build_naive_neqr_circuit(image: GrayImage) -> Circuit:
    """H on every coordinate qubit, then one fully-controlled X per set pixel bit."""
    n = image.n
    gates = [h(q) for q in range(2 * n)]
    for eta, v in enumerate(image.pixels):
        ctrls = coordinate_controls(eta, n)
        for i in range(VALUE_BITS):
            if (v >> i) & 1:
                gates.append(controlled_x(ctrls, 2 * n + i))
    return Circuit(data_width(n), gates)


@dataclass(frozen=True)
class Coverage:
    missing: tuple[tuple[int, int], ...]
    shots: int

    @property
    def complete(self) -> bool:
        return not self.missing


def reconstruct_image(counts: Mapping[str, int], n: int) -> tuple[GrayImage, Coverage]:
    """Most frequent value per coordinate; ties go to the smaller value, gaps to 0."""
    width = data_width(n)
    best: dict[int, tuple[int, int]] = {}  # eta -> (count, value)
    total = 0
    for bits, c in counts.items():
        if len(bits) != width or set(bits) - {"0", "1"}:
            raise ValueError(f"bitstring {bits!r} is not a {width}-bit basis label")
        total += c
        if c <= 0:
            continue
        v, y, x = split_basis_index(int(bits, 2), n)
        eta = (y << n) | x
        cur = best.get(eta)
        if cur is None or c > cur[0] or (c == cur[0] and v < cur[1]):
            best[eta] = (c, v)
    side = 1 << n
    pixels = [best[eta][1] if eta in best else 0 for eta in range(side * side)]
    missing = tuple(divmod(eta, side) for eta in range(side * side) if eta not in best)
    return GrayImage(n, tuple(pixels)), Coverage(missing, total)


def perfect_counts(state: StateVector, shots: int) -> dict[str, int]:
    """Noise-free expected counts ``round(shots * |amp|^2)`` for every populated basis state."""
    probs = state.probabilities()
    return {
        format(int(i), f"0{state.width}b"): int(round(shots * probs[i]))
        for i in np.flatnonzero(probs > 1e-15)
    }

