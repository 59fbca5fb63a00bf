"""Logistic-map diffusion plus affine position scrambling, classical and as circuits.

Encryption XORs every pixel with two keystream bytes taken at its original
coordinate, then moves it to ``(tY + Q, sX + P) mod 2^n``. Decryption undoes
the move and XORs again.
"""
from __future__ import annotations

import json
import math
import os
import random
from dataclasses import dataclass
from typing import Sequence

from .qcircuit import Circuit, Gate, x
from .qimage import GrayImage, data_width
from .synth import synthesize_controlled_xor

__all__ = [
    "EncryptionKey",
    "InvalidKeyError",
    "Keystream",
    "mod_inverse",
    "logistic_keystream",
    "diffuse",
    "gat_forward",
    "gat_inverse",
    "encrypt",
    "decrypt",
    "build_adder_mod_circuit",
    "build_gat_circuit",
    "build_inverse_gat_circuit",
    "build_diffusion_circuit",
    "gat_register_layout",
    "load_key",
    "save_key",
    "key_to_dict",
    "key_from_dict",
    "random_key",
    "keyspace_summary",
]

DELTA_RANGE = (3.85, 4.0)


class InvalidKeyError(ValueError):
    pass


@dataclass(frozen=True)
class EncryptionKey:
    n: int
    P: int
    Q: int
    s: int
    t: int
    L0: float
    delta: float

    def __post_init__(self):
        if self.n < 1:
            raise InvalidKeyError(f"grid order must be >= 1, got {self.n}")
        top = (1 << self.n) - 1
        for name in ("P", "Q"):
            val = getattr(self, name)
            if not 1 <= val <= top:
                raise InvalidKeyError(f"{name} must lie in [1, {top}], got {val}")
        for name in ("s", "t"):
            val = getattr(self, name)
            if val < 1 or val % 2 == 0:
                raise InvalidKeyError(f"{name} must be a positive odd integer, got {val}")
        if not 0.0 < self.L0 < 1.0:
            raise InvalidKeyError(f"L0 must lie in (0, 1), got {self.L0!r}")
        lo, hi = DELTA_RANGE
        if not lo <= self.delta <= hi:
            raise InvalidKeyError(f"delta must lie in [{lo}, {hi}], got {self.delta!r}")

    @property
    def modulus(self) -> int:
        return 1 << self.n


@dataclass(frozen=True)
class Keystream:
    J: tuple[int, ...]
    T: tuple[int, ...]

    def __post_init__(self):
        if len(self.J) != len(self.T):
            raise ValueError("J and T differ in length")
        if tuple(reversed(self.J)) != tuple(self.T):
            raise ValueError("T must be J reversed")

    def __len__(self) -> int:
        return len(self.J)

    @classmethod
    def from_j(cls, j: Sequence[int]) -> "Keystream":
        j = tuple(int(v) & 0xFF for v in j)
        return cls(j, j[::-1])


def mod_inverse(a: int, n: int) -> int:
    """Inverse of odd ``a`` modulo ``2**n`` by the extended Euclidean algorithm."""
    m = 1 << n
    if a % 2 == 0:
        raise ValueError(f"{a} is even and has no inverse modulo 2**{n}")
    old_r, r = a % m, m
    old_s, s = 1, 0
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
    return old_s % m


def logistic_keystream(key: EncryptionKey) -> Keystream:
    """``J[eta] = round(256 * L_eta) mod 256`` for ``eta = 0 .. 4**n - 1``; ``T`` is ``J`` reversed.

    The byte is taken from ``L_eta`` before the map advances, and ``round`` is
    half-up (``floor(x + 0.5)``).
    """
    level = key.L0
    j = []
    for _ in range(4 ** key.n):
        j.append(math.floor(level * 256 + 0.5) % 256)
        level = key.delta * level * (1 - level)
    return Keystream.from_j(j)


def diffuse(image: GrayImage, ks: Keystream) -> GrayImage:
    if len(ks) != len(image.pixels):
        raise ValueError(f"keystream length {len(ks)} != pixel count {len(image.pixels)}")
    return GrayImage(image.n, tuple(p ^ a ^ b for p, a, b in zip(image.pixels, ks.J, ks.T)))


def gat_forward(y: int, x_: int, key: EncryptionKey, n: int | None = None) -> tuple[int, int]:
    n = key.n if n is None else n
    m = 1 << n
    if not (0 <= y < m and 0 <= x_ < m):
        raise ValueError(f"coordinate ({y}, {x_}) outside a {m}x{m} grid")
    return (key.t * y + key.Q) % m, (key.s * x_ + key.P) % m


def _negate(v: int, n: int) -> int:
    # two's complement: bitwise complement plus one
    mask = (1 << n) - 1
    return ((~v & mask) + 1) & mask


def gat_inverse(y: int, x_: int, key: EncryptionKey, n: int | None = None) -> tuple[int, int]:
    n = key.n if n is None else n
    m = 1 << n
    if not (0 <= y < m and 0 <= x_ < m):
        raise ValueError(f"coordinate ({y}, {x_}) outside a {m}x{m} grid")
    s_inv, t_inv = mod_inverse(key.s, n), mod_inverse(key.t, n)
    return (t_inv * (y + _negate(key.Q, n))) % m, (s_inv * (x_ + _negate(key.P, n))) % m


def _check_order(image: GrayImage, key: EncryptionKey) -> None:
    if image.n != key.n:
        raise InvalidKeyError(f"key is for order {key.n}, image has order {image.n}")


def encrypt(image: GrayImage, key: EncryptionKey) -> GrayImage:
    _check_order(image, key)
    mixed = diffuse(image, logistic_keystream(key))
    side = image.side
    out = [0] * len(mixed.pixels)
    for eta, v in enumerate(mixed.pixels):
        y2, x2 = gat_forward(*divmod(eta, side), key)
        out[y2 * side + x2] = v
    return GrayImage(image.n, tuple(out))


def decrypt(image: GrayImage, key: EncryptionKey) -> GrayImage:
    _check_order(image, key)
    side = image.side
    out = [0] * len(image.pixels)
    for eta, v in enumerate(image.pixels):
        y, x_ = gat_inverse(*divmod(eta, side), key)
        out[y * side + x_] = v
    return diffuse(GrayImage(image.n, tuple(out)), logistic_keystream(key))


# -- circuits ----------------------------------------------------------------

def _cx(ctl: int, tgt: int) -> Gate:
    return Gate("CX", tgt, ((ctl, True),))


def _ccx(a: int, b: int, tgt: int) -> Gate:
    return Gate("MCX", tgt, ((a, True), (b, True)))


def _adder_gates(a: Sequence[int], b: Sequence[int], carry: Sequence[int]) -> list[Gate]:
    """Ripple-carry ``b <- (a + b) mod 2^n``; ``carry[i]`` holds the carry into bit ``i+1``."""
    n = len(a)
    gates: list[Gate] = []
    for i in range(n - 1):
        gates += [_ccx(a[i], b[i], carry[i]), _cx(a[i], b[i])]
        if i:
            gates.append(_ccx(carry[i - 1], b[i], carry[i]))
    top = n - 1
    gates.append(_cx(a[top], b[top]))
    if top:
        gates.append(_cx(carry[top - 1], b[top]))
    for i in range(n - 2, -1, -1):
        if i:
            gates.append(_ccx(carry[i - 1], b[i], carry[i]))
        gates += [_cx(a[i], b[i]), _ccx(a[i], b[i], carry[i])]
        # b[i] <- a ^ b ^ carry_in
        gates.append(_cx(a[i], b[i]))
        if i:
            gates.append(_cx(carry[i - 1], b[i]))
    return gates


def build_adder_mod_circuit(n: int) -> Circuit:
    """``|A>|B> -> |A>|(A + B) mod 2^n>`` with ``n - 1`` carry ancillas restored to zero.

    Layout: A on qubits ``0..n-1``, B on ``n..2n-1``, carries on ``2n..3n-2``.
    For ``n = 1`` this is a single CX.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    a = list(range(n))
    b = list(range(n, 2 * n))
    carry = list(range(2 * n, 3 * n - 1))
    return Circuit(3 * n - 1 if n > 1 else 2, _adder_gates(a, b, carry), carry)


def gat_register_layout(n: int) -> dict[str, list[int]]:
    """Qubits of the scrambling circuit: X, Y, P (receives X'), Q (receives Y'), carries."""
    return {
        "X": list(range(0, n)),
        "Y": list(range(n, 2 * n)),
        "P": list(range(2 * n, 3 * n)),
        "Q": list(range(3 * n, 4 * n)),
        "carry": list(range(4 * n, 5 * n - 1)),
    }


def _load_constant(reg: Sequence[int], value: int) -> list[Gate]:
    return [x(q) for j, q in enumerate(reg) if (value >> j) & 1]


def _affine_circuit(n: int, s: int, t: int, p_const: int | None, q_const: int | None) -> Circuit:
    lay = gat_register_layout(n)
    gates: list[Gate] = []
    if p_const is not None:
        gates += _load_constant(lay["P"], p_const)
    if q_const is not None:
        gates += _load_constant(lay["Q"], q_const)
    for _ in range(s):
        gates += _adder_gates(lay["X"], lay["P"], lay["carry"])
    for _ in range(t):
        gates += _adder_gates(lay["Y"], lay["Q"], lay["carry"])
    width = 5 * n - 1 if n > 1 else 4
    return Circuit(width, gates, lay["carry"])


def build_gat_circuit(key: EncryptionKey, n: int | None = None, *, load_key: bool = True) -> Circuit:
    """Adds X into P ``s`` times and Y into Q ``t`` times.

    On basis input ``|Y>|X>|Q>|P>`` this yields ``|Y>|X>|tY+Q>|sX+P>`` (mod
    ``2^n``). With ``load_key`` the P and Q registers start at zero and are
    first loaded with the key's P and Q, so they end holding ``X'`` and ``Y'``.
    """
    n = key.n if n is None else n
    if load_key:
        return _affine_circuit(n, key.s, key.t, key.P, key.Q)
    return _affine_circuit(n, key.s, key.t, None, None)


def build_inverse_gat_circuit(key: EncryptionKey, n: int | None = None) -> Circuit:
    """Same adder network as :func:`build_gat_circuit`, run with the inverse map.

    ``X = s^-1 X' + s^-1 (~P + 1)``: the offset register is preloaded with the
    classically folded constant ``s^-1 (~P + 1) mod 2^n`` and ``X'`` (on the X
    register) is added ``s^-1`` times; likewise for Y.
    """
    n = key.n if n is None else n
    m = 1 << n
    s_inv, t_inv = mod_inverse(key.s, n), mod_inverse(key.t, n)
    p_const = (s_inv * _negate(key.P, n)) % m
    q_const = (t_inv * _negate(key.Q, n)) % m
    return _affine_circuit(n, s_inv, t_inv, p_const, q_const)


def build_diffusion_circuit(ks: Keystream, n: int, *, minimize: bool = False) -> Circuit:
    """Two coordinate-controlled XOR stages on the NEQR registers: ``J`` then ``T``."""
    if len(ks) != 4 ** n:
        raise ValueError(f"keystream length {len(ks)} does not match order {n}")
    gates = synthesize_controlled_xor(ks.J, n, minimize=minimize)
    gates += synthesize_controlled_xor(ks.T, n, minimize=minimize)
    return Circuit(data_width(n), gates)


# -- key files ---------------------------------------------------------------

def key_to_dict(key: EncryptionKey) -> dict:
    return {
        "n": key.n, "P": key.P, "Q": key.Q, "s": key.s, "t": key.t,
        "L0": format(key.L0, ".17g"), "delta": format(key.delta, ".17g"),
    }


def key_from_dict(data: dict) -> EncryptionKey:
    try:
        return EncryptionKey(
            n=int(data["n"]), P=int(data["P"]), Q=int(data["Q"]),
            s=int(data["s"]), t=int(data["t"]),
            L0=float(data["L0"]), delta=float(data["delta"]),
        )
    except KeyError as exc:
        raise InvalidKeyError(f"key file is missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidKeyError):
            raise
        raise InvalidKeyError(f"malformed key field: {exc}") from exc


def _parse_flat(text: str) -> dict:
    data = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":"
        if sep not in line:
            raise InvalidKeyError(f"cannot parse key line {line!r}")
        k, v = line.split(sep, 1)
        data[k.strip()] = v.strip()
    return data


def load_key(path: str | os.PathLike) -> EncryptionKey:
    """Read a JSON key file, or flat ``name = value`` lines."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = _parse_flat(text)
    if not isinstance(data, dict):
        raise InvalidKeyError("key file must hold an object")
    return key_from_dict(data)


def save_key(path: str | os.PathLike, key: EncryptionKey) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(key_to_dict(key), fh, indent=2)
        fh.write("\n")


def random_key(n: int, seed: int | None = None) -> EncryptionKey:
    rng = random.Random(seed)
    top = (1 << n) - 1
    odd = list(range(1, top + 1, 2))
    l0 = rng.random()
    while l0 == 0.0:
        l0 = rng.random()
    return EncryptionKey(
        n=n, P=rng.randint(1, top), Q=rng.randint(1, top),
        s=rng.choice(odd), t=rng.choice(odd),
        L0=l0, delta=rng.uniform(*DELTA_RANGE),
    )


def keyspace_summary(n: int) -> dict:
    """Bit counts for the affine and chaotic key parts.

    ``affine_register_bits`` counts n-qubit registers for P, Q, s, t;
    ``affine_valid_log2`` counts only keys that pass validation. The chaotic
    part is counted as two IEEE doubles (52 fraction bits each), a finite
    stand-in for real-valued parameters. Both additive and multiplicative
    combinations are reported.
    """
    reg_bits = 4 * n
    valid = ((1 << n) - 1) ** 2 * (1 << (n - 1)) ** 2
    chaos_bits = 2 * 52
    ka, kl = 2.0 ** reg_bits, 2.0 ** chaos_bits
    return {
        "n": n,
        "affine_register_bits": reg_bits,
        "affine_valid_log2": math.log2(valid) if valid else float("-inf"),
        "chaotic_bits": chaos_bits,
        "additive_log2": math.log2(ka + kl),
        "multiplicative_log2": reg_bits + chaos_bits,
        "note": "L0 and delta are real-valued, so the ideal keyspace is unbounded",
    }
