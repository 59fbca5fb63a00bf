"""Regenerate ``tests/fixtures/derived.json`` from the oracles in ``oracles.py``.

Run ``python3 tests/gen_fixtures.py``; ``test_fixtures.py`` checks the
committed file is what this script produces.
"""
from __future__ import annotations

import json
import random
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))
import oracles  # noqa: E402

OUT = Path(__file__).parent / "fixtures" / "derived.json"

PLAIN = [255, 0, 200, 100]
L0 = "0.5557924316949603"
DELTA = "3.9816188727791215"
GRID = [i / 10 for i in range(11)]


def _cipher(pixels, l0):
    j = oracles.keystream_mp(l0, DELTA, 4)
    return oracles.cipher_pipeline(pixels, 1, 1, 1, 1, 1, j)


def _covers():
    rng = random.Random(7)
    planes = [sorted(i for i, p in enumerate(PLAIN) if (p >> b) & 1) for b in range(8)]
    out = {"test_image_planes": [[on, oracles.min_disjoint_cover_size(on, 2)] for on in planes]}
    cases = []
    for v in (3, 4):
        for _ in range(12):
            on = sorted(m for m in range(1 << v) if rng.random() < 0.55)
            cases.append([v, on, oracles.min_disjoint_cover_size(on, v)])
    out["random"] = cases
    return out


def _noise():
    psi = oracles.neqr_amplitudes(PLAIN, 1)
    sweeps = {
        ch: [oracles.pauli_fidelity(psi, ch, g) for g in GRID]
        for ch in ("bit-flip", "phase-flip", "bit-phase-flip", "depolarizing")
    }
    return {
        "grid": GRID,
        "pauli_sweeps": sweeps,
        "amplitude_damping_f1": oracles.amplitude_damping_endpoint_fidelity(psi),
    }


def build() -> dict:
    cipher = _cipher(PLAIN, L0)
    cipher_px = _cipher([254, 0, 200, 100], L0)
    cipher_l0 = _cipher(PLAIN, "0.6")
    j = oracles.keystream_mp(L0, DELTA, 4)
    diff_key = [abs(a - b) for a, b in zip(cipher, cipher_l0)]
    return {
        "keystream": {
            "paper": j,
            "l0_0.6": oracles.keystream_mp("0.6", DELTA, 4),
        },
        "diffused": [p ^ a ^ b for p, a, b in zip(PLAIN, j, j[::-1])],
        "cipher": {"paper": cipher, "pixel_change": cipher_px, "l0_0.6": cipher_l0},
        "mod_inverse": {
            "3,2": oracles.inverse_by_search(3, 2),
            "5,4": oracles.inverse_by_search(5, 4),
            "3,3": oracles.inverse_by_search(3, 3),
        },
        "naive_mcx_count": oracles.popcount_total(PLAIN),
        "metrics": {
            "r_plain_cipher": oracles.pearson(PLAIN, cipher),
            "mse_plain_cipher": sum((a - b) ** 2 for a, b in zip(PLAIN, cipher)) / 4,
            "diff_pixel_change": [abs(a - b) for a, b in zip(cipher, cipher_px)],
            "diff_key_change": diff_key,
            "uaci_key_change": 100 * sum(diff_key) / (4 * 255),
        },
        "covers": _covers(),
        "noise": _noise(),
    }


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return round(float(obj), 12)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def render() -> str:
    return json.dumps(_clean(build()), indent=1, sort_keys=True) + "\n"


if __name__ == "__main__":
    OUT.parent.mkdir(exist_ok=True)
    OUT.write_text(render())
    print(f"wrote {OUT}")
