"""Full-register encryption/decryption circuits and the naive vs compressed cost table.

Layout for order ``n`` (data registers first, as in :mod:`qimcrypt.qimage`)::

    0 .. 2n+7        X, Y, value bits
    2n+8 .. 3n+7     P register, ends holding X' (or X when decrypting)
    3n+8 .. 4n+7     Q register, ends holding Y' (or Y when decrypting)
    4n+8 ..          adder carries, then any ancillas added by compression

The scrambled image is read from ``(value, Q, P)``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass

from .cipher import (
    EncryptionKey,
    build_gat_circuit,
    build_inverse_gat_circuit,
    gat_register_layout,
    logistic_keystream,
)
from .qcircuit import (
    Circuit,
    Gate,
    circuit_depth,
    count_controlled,
    quantum_cost,
    transpile_to_basis,
)
from .qimage import GrayImage, build_naive_neqr_circuit, data_width
from .synth import factor_shared_controls, synthesize_controlled_xor, synthesize_minimized_encoder

__all__ = [
    "VARIANTS",
    "CostRow",
    "cipher_layout",
    "encoder_circuit",
    "encryption_circuit",
    "decryption_circuit",
    "cost_row",
    "synth_report",
    "rows_csv",
    "rows_table",
]

VARIANTS = ("naive", "minimized", "factored")


def cipher_layout(n: int) -> dict[str, list[int]]:
    d = data_width(n)
    return {
        "X": list(range(0, n)),
        "Y": list(range(n, 2 * n)),
        "value": list(range(2 * n, d)),
        "P": list(range(d, d + n)),
        "Q": list(range(d + n, d + 2 * n)),
        "carry": list(range(d + 2 * n, d + 3 * n - 1)),
    }


def _gat_mapping(n: int) -> list[int]:
    lay, full = gat_register_layout(n), cipher_layout(n)
    mapping = [0] * (5 * n - 1 if n > 1 else 4)
    for reg in ("X", "Y", "P", "Q", "carry"):
        for src, dst in zip(lay[reg], full[reg]):
            mapping[src] = dst
    return mapping


def _full_width(n: int) -> int:
    return data_width(n) + 3 * n - 1 if n > 1 else data_width(n) + 2


def encoder_circuit(image: GrayImage, variant: str = "naive") -> Circuit:
    if variant == "naive":
        return build_naive_neqr_circuit(image)
    if variant == "minimized":
        return synthesize_minimized_encoder(image)
    if variant == "factored":
        return factor_shared_controls(synthesize_minimized_encoder(image))
    raise ValueError(f"unknown variant {variant!r}")


def _diffusion_gates(key: EncryptionKey, minimize: bool, coord: list[int] | None = None) -> list[Gate]:
    n = key.n
    ks = logistic_keystream(key)
    gates = synthesize_controlled_xor(ks.J, n, minimize=minimize)
    gates += synthesize_controlled_xor(ks.T, n, minimize=minimize)
    if coord is None:
        return gates
    mapping = coord + list(range(2 * n, data_width(n)))
    return [g.remap(mapping) for g in gates]


def _finish(base: Circuit, variant: str) -> Circuit:
    return factor_shared_controls(base) if variant == "factored" else base


def encryption_circuit(image: GrayImage, key: EncryptionKey, variant: str = "naive") -> Circuit:
    """Prepare the plain image, diffuse the values, scramble positions into P, Q."""
    n = key.n
    if image.n != n:
        raise ValueError("image and key orders differ")
    minimize = variant != "naive"
    prep = encoder_circuit(image, "naive" if not minimize else "minimized")
    full = Circuit(_full_width(n), prep.gates, cipher_layout(n)["carry"])
    full = full.extend(_diffusion_gates(key, minimize))
    full = full.compose(build_gat_circuit(key), _gat_mapping(n))
    return _finish(full, variant)


def decryption_circuit(cipher: GrayImage, key: EncryptionKey, variant: str = "naive") -> Circuit:
    """Prepare the cipher image, unscramble positions into P, Q, undo diffusion there."""
    n = key.n
    if cipher.n != n:
        raise ValueError("image and key orders differ")
    minimize = variant != "naive"
    lay = cipher_layout(n)
    prep = encoder_circuit(cipher, "naive" if not minimize else "minimized")
    full = Circuit(_full_width(n), prep.gates, lay["carry"])
    full = full.compose(build_inverse_gat_circuit(key), _gat_mapping(n))
    full = full.extend(_diffusion_gates(key, minimize, lay["P"] + lay["Q"]))
    return _finish(full, variant)


@dataclass(frozen=True)
class CostRow:
    stage: str
    variant: str
    x: int
    cx: int
    toffoli: int
    mcx: int
    controlled: int
    basis_cx: int
    basis_cost: int
    depth: int
    width: int
    cost_ratio: float


def cost_row(stage: str, variant: str, circuit: Circuit, baseline_cost: int | None = None) -> CostRow:
    tally = count_controlled(circuit)
    basis = transpile_to_basis(circuit)
    cost = quantum_cost(basis)
    return CostRow(
        stage=stage, variant=variant,
        x=tally["x"], cx=tally["cx"], toffoli=tally["toffoli"], mcx=tally["mcx"],
        controlled=tally["cx"] + tally["toffoli"] + tally["mcx"],
        basis_cx=count_controlled(basis)["cx"],
        basis_cost=cost, depth=circuit_depth(basis), width=basis.width,
        cost_ratio=cost / baseline_cost if baseline_cost else 1.0,
    )


def synth_report(image: GrayImage, key: EncryptionKey | None = None) -> list[CostRow]:
    """Rows for the encoder and, given a key, the encryption and decryption circuits."""
    from .cipher import encrypt

    stages = [("NEQR", lambda v: encoder_circuit(image, v))]
    if key is not None:
        cipher = encrypt(image, key)
        stages.append(("Encryption", lambda v: encryption_circuit(image, key, v)))
        stages.append(("Decryption", lambda v: decryption_circuit(cipher, key, v)))
    rows = []
    for stage, build in stages:
        base = None
        for variant in VARIANTS:
            row = cost_row(stage, variant, build(variant), base)
            if base is None:
                base = row.basis_cost
            rows.append(row)
    return rows


def rows_csv(rows) -> str:
    buf = io.StringIO()
    fields = list(CostRow.__dataclass_fields__)
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        d = asdict(r)
        d["cost_ratio"] = f"{r.cost_ratio:.4f}"
        w.writerow(d)
    return buf.getvalue()


def rows_table(rows) -> str:
    lines = [line.split(",") for line in rows_csv(rows).strip().splitlines()]
    widths = [max(len(r[i]) for r in lines) for i in range(len(lines[0]))]
    out = []
    for j, r in enumerate(lines):
        out.append("  ".join(c.rjust(widths[i]) for i, c in enumerate(r)))
        if j == 0:
            out.append("  ".join("-" * w for w in widths))
    return "\n".join(out) + "\n"
