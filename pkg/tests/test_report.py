import numpy as np
import pytest

from qimcrypt.cipher import EncryptionKey, encrypt, random_key
from qimcrypt.qimage import GrayImage, neqr_state
from qimcrypt.qsim import run_statevector
from qimcrypt.report import (
    VARIANTS,
    cipher_layout,
    decryption_circuit,
    encoder_circuit,
    encryption_circuit,
    rows_csv,
    rows_table,
    synth_report,
)


def read_registers(circ, n):
    """Distribution over (Q, P, value) after simulating ``circ`` from |0>."""
    probs = run_statevector(circ).probabilities()
    lay = cipher_layout(n)
    out = {}
    for i in np.flatnonzero(probs > 1e-12):
        reg = {name: sum(((int(i) >> q) & 1) << j for j, q in enumerate(lay[name]))
               for name in ("value", "P", "Q")}
        key = (reg["Q"], reg["P"])
        assert key not in out, "coordinate seen with two values"
        out[key] = (reg["value"], probs[i])
    return out


def image_from(regs, n):
    side = 1 << n
    return GrayImage(n, tuple(regs[(y, x)][0] for y in range(side) for x in range(side)))


@pytest.mark.parametrize("variant", VARIANTS)
def test_encoder_variants_equal(test_image, variant):
    out = run_statevector(encoder_circuit(test_image, variant)).restrict(10)
    assert np.array_equal(out.amplitudes, neqr_state(test_image).amplitudes)


def test_unknown_variant(test_image):
    with pytest.raises(ValueError):
        encoder_circuit(test_image, "magic")


@pytest.mark.parametrize("variant", VARIANTS)
def test_encryption_circuit_n1(test_image, paper_key, variant):
    regs = read_registers(encryption_circuit(test_image, paper_key, variant), 1)
    assert image_from(regs, 1) == encrypt(test_image, paper_key)


@pytest.mark.parametrize("variant", VARIANTS)
def test_decryption_circuit_n1(test_image, paper_key, variant):
    cipher = encrypt(test_image, paper_key)
    regs = read_registers(decryption_circuit(cipher, paper_key, variant), 1)
    assert image_from(regs, 1) == test_image


def test_cipher_circuits_n2():
    rng = np.random.default_rng(8)
    img = GrayImage(2, tuple(int(v) for v in rng.integers(0, 256, 16)))
    k = EncryptionKey(2, 3, 1, 3, 1, 0.41, 3.93)
    regs = read_registers(encryption_circuit(img, k, "factored"), 2)
    assert image_from(regs, 2) == encrypt(img, k)
    regs = read_registers(decryption_circuit(encrypt(img, k), k, "minimized"), 2)
    assert image_from(regs, 2) == img


def test_order_mismatch(test_image):
    with pytest.raises(ValueError):
        encryption_circuit(test_image, random_key(2, 1))


def test_synth_report_rows(test_image, paper_key):
    rows = synth_report(test_image, paper_key)
    assert [(r.stage, r.variant) for r in rows] == [
        (s, v) for s in ("NEQR", "Encryption", "Decryption") for v in VARIANTS]
    neqr = {r.variant: r for r in rows if r.stage == "NEQR"}
    assert neqr["naive"].toffoli == 14 and neqr["naive"].cost_ratio == 1.0
    assert neqr["minimized"].controlled < neqr["naive"].controlled
    assert neqr["factored"].basis_cost <= 0.6 * neqr["naive"].basis_cost
    assert neqr["factored"].width == 11
    for r in rows:
        assert r.depth <= r.basis_cost
    text = rows_csv(rows)
    assert text.splitlines()[0].startswith("stage,variant,x,cx,toffoli")
    assert len(text.strip().splitlines()) == 10
    assert "NEQR" in rows_table(rows)
    assert len(synth_report(test_image)) == 3
