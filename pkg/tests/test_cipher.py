import json
import random

import numpy as np
import pytest

import oracles
from qimcrypt.cipher import (
    EncryptionKey,
    InvalidKeyError,
    Keystream,
    build_adder_mod_circuit,
    build_diffusion_circuit,
    build_gat_circuit,
    build_inverse_gat_circuit,
    decrypt,
    diffuse,
    encrypt,
    gat_forward,
    gat_inverse,
    keyspace_summary,
    load_key,
    logistic_keystream,
    mod_inverse,
    random_key,
    save_key,
)
from qimcrypt.qimage import GrayImage, neqr_state
from qimcrypt.qsim import basis_state, run_statevector

L0 = 0.5557924316949603
DELTA = 3.9816188727791215


def key(**kw):
    base = dict(n=1, P=1, Q=1, s=1, t=1, L0=L0, delta=DELTA)
    base.update(kw)
    return EncryptionKey(**base)


def run_basis(circ, index):
    out = run_statevector(circ, basis_state(index, circ.width)).nonzero(1e-9)
    assert len(out) == 1
    (k, amp), = out.items()
    assert abs(amp - 1) < 1e-9
    return k


@pytest.mark.parametrize("kw", [
    dict(P=0), dict(Q=2), dict(s=2), dict(t=0), dict(L0=0.0), dict(L0=1.0),
    dict(delta=3.84), dict(delta=4.01), dict(n=0),
])
def test_invalid_keys(kw):
    with pytest.raises(InvalidKeyError):
        key(**kw)


def test_mod_inverse_examples(derived):
    assert mod_inverse(1, 5) == 1
    assert mod_inverse(3, 2) == derived["mod_inverse"]["3,2"] == 3
    assert mod_inverse(5, 4) == derived["mod_inverse"]["5,4"] == 13
    with pytest.raises(ValueError):
        mod_inverse(4, 3)


def test_mod_inverse_exhaustive():
    for n in range(1, 9):
        for a in range(1, 1 << n, 2):
            assert mod_inverse(a, n) == oracles.inverse_by_search(a, n)


def test_keystream_paper(derived):
    ks = logistic_keystream(key())
    assert list(ks.J) == derived["keystream"]["paper"] == [142, 252, 17, 63]
    assert list(ks.T) == [63, 17, 252, 142]
    ks6 = logistic_keystream(key(L0=0.6))
    assert list(ks6.J) == derived["keystream"]["l0_0.6"] == [154, 245, 43, 143]
    assert ks6.T[0] == ks6.J[3] and ks6.T[3] == ks6.J[0]


def test_keystream_matches_high_precision_for_short_runs():
    # double and 60-digit iterations agree over the first dozen steps
    k = key(n=2, L0=0.3141592653589793, delta=3.9)
    assert list(logistic_keystream(k).J)[:12] == oracles.keystream_mp(
        "0.3141592653589793", "3.9", 12)


def test_keystream_validation():
    with pytest.raises(ValueError):
        Keystream((1, 2), (1, 2))
    assert Keystream.from_j([1, 2]).T == (2, 1)


def test_diffuse(test_image, derived):
    ks = logistic_keystream(key())
    out = diffuse(test_image, ks)
    assert list(out.pixels) == derived["diffused"] == [78, 237, 37, 213]
    assert diffuse(out, ks) == test_image
    assert diffuse(test_image, Keystream.from_j([0] * 4)) == test_image
    with pytest.raises(ValueError):
        diffuse(test_image, Keystream.from_j([0] * 16))


def test_gat_examples():
    k = key()
    assert gat_forward(0, 0, k) == (1, 1)
    assert gat_inverse(1, 1, k) == (0, 0)
    assert gat_forward(3, 3, key(n=2)) == (0, 0)
    k3 = key(n=3, s=3, P=5)
    assert gat_forward(0, 6, k3)[1] == 7
    assert gat_inverse(0, 7, k3)[1] == 6 == (3 * (7 - 5)) % 8
    with pytest.raises(ValueError):
        gat_forward(2, 0, k)


def test_gat_bijection_and_inverse():
    for n in range(1, 5):
        for seed in range(5):
            k = random_key(n, seed)
            side = 1 << n
            images = {gat_forward(y, x, k) for y in range(side) for x in range(side)}
            assert len(images) == side * side
            for y in range(side):
                for x in range(side):
                    assert gat_inverse(*gat_forward(y, x, k), k) == (y, x)


def test_encrypt_golden(test_image, derived):
    c = encrypt(test_image, key())
    assert c.by_position() == {"00": 213, "01": 37, "10": 237, "11": 78}
    assert list(c.pixels) == derived["cipher"]["paper"]
    assert decrypt(c, key()) == test_image


def test_encrypt_variants(derived):
    px = encrypt(GrayImage(1, (254, 0, 200, 100)), key())
    assert list(px.pixels) == derived["cipher"]["pixel_change"] == [213, 37, 237, 79]
    k6 = encrypt(GrayImage(1, (255, 0, 200, 100)), key(L0=0.6))
    assert list(k6.pixels) == derived["cipher"]["l0_0.6"] == [113, 22, 222, 234]


def test_wrong_key_fails(test_image):
    c = encrypt(test_image, key())
    assert decrypt(c, key(L0=0.6)) != test_image


def test_order_mismatch(test_image):
    with pytest.raises(InvalidKeyError):
        encrypt(test_image, key(n=2))


def test_encrypt_matches_pipeline_oracle():
    rng = random.Random(9)
    for n in (1, 2, 3):
        k = random_key(n, rng.randrange(10 ** 6))
        px = [rng.randrange(256) for _ in range(4 ** n)]
        j = list(logistic_keystream(k).J)
        expect = oracles.cipher_pipeline(px, n, k.P, k.Q, k.s, k.t, j)
        assert list(encrypt(GrayImage(n, tuple(px)), k).pixels) == expect


def test_roundtrip_many():
    rng = random.Random(2024)
    for n in (1, 2, 3, 4):
        for _ in range(100):
            k = random_key(n, rng.randrange(10 ** 9))
            img = GrayImage(n, tuple(rng.randrange(256) for _ in range(4 ** n)))
            c = encrypt(img, k)
            assert sorted(c.pixels) == sorted(diffuse(img, logistic_keystream(k)).pixels)
            assert decrypt(c, k) == img


@pytest.mark.parametrize("n", [1, 2, 3])
def test_adder_exhaustive(n, backend):
    circ = build_adder_mod_circuit(n)
    if n == 1:
        assert [g.kind for g in circ.gates] == ["CX"]
    m = 1 << n
    for a in range(m):
        for b in range(m):
            out = run_basis(circ, a | (b << n))
            assert out == a | (((a + b) % m) << n)


def _gat_io(circ, n, y, x):
    out = run_basis(circ, x | (y << n))
    mask = (1 << n) - 1
    assert out & ((1 << (2 * n)) - 1) == x | (y << n)
    assert out >> (4 * n) == 0, "carries not restored"
    return (out >> (3 * n)) & mask, (out >> (2 * n)) & mask


@pytest.mark.parametrize("k", [
    EncryptionKey(1, 1, 1, 1, 1, L0, DELTA),
    EncryptionKey(2, 1, 1, 3, 1, L0, DELTA),
    EncryptionKey(2, 3, 2, 1, 3, L0, DELTA),
])
def test_gat_circuit_exhaustive(k, backend):
    n = k.n
    circ = build_gat_circuit(k)
    inv = build_inverse_gat_circuit(k)
    for y in range(1 << n):
        for x in range(1 << n):
            assert _gat_io(circ, n, y, x) == gat_forward(y, x, k)
            assert _gat_io(inv, n, y, x) == gat_inverse(y, x, k)


def test_gat_adder_repetitions():
    k = EncryptionKey(2, 1, 1, 3, 1, L0, DELTA)
    one = len(build_adder_mod_circuit(2).gates)
    body = [g for g in build_gat_circuit(k, load_key=False).gates]
    assert len(body) == (k.s + k.t) * one


def test_gat_circuit_preloaded_registers():
    k = EncryptionKey(2, 3, 2, 1, 3, L0, DELTA)
    circ = build_gat_circuit(k, load_key=False)
    for y in range(4):
        for x in range(4):
            for q in range(4):
                for p in range(4):
                    out = run_basis(circ, x | y << 2 | p << 4 | q << 6)
                    assert (out >> 4) & 3 == (k.s * x + p) % 4
                    assert (out >> 6) & 3 == (k.t * y + q) % 4


def test_diffusion_circuit(test_image, backend):
    ks = logistic_keystream(key())
    circ = build_diffusion_circuit(ks, 1)
    out = run_statevector(circ, neqr_state(test_image))
    expect = neqr_state(GrayImage(1, (78, 237, 37, 213)))
    assert np.array_equal(out.amplitudes, expect.amplitudes)
    twice = run_statevector(circ.compose(circ), neqr_state(test_image))
    assert np.array_equal(twice.amplitudes, neqr_state(test_image).amplitudes)
    assert build_diffusion_circuit(Keystream.from_j([0] * 4), 1).gates == ()
    mini = build_diffusion_circuit(ks, 1, minimize=True)
    assert np.array_equal(run_statevector(mini, neqr_state(test_image)).amplitudes, expect.amplitudes)


def test_diffusion_circuit_random_n2(backend):
    rng = random.Random(4)
    k = random_key(2, 77)
    ks = logistic_keystream(k)
    img = GrayImage(2, tuple(rng.randrange(256) for _ in range(16)))
    for minimize in (False, True):
        out = run_statevector(build_diffusion_circuit(ks, 2, minimize=minimize), neqr_state(img))
        assert np.array_equal(out.amplitudes, neqr_state(diffuse(img, ks)).amplitudes)


def test_key_file_roundtrip(tmp_path):
    k = random_key(3, 5)
    path = tmp_path / "k.json"
    save_key(path, k)
    data = json.loads(path.read_text())
    assert isinstance(data["L0"], str) and len(data["L0"].replace("0.", "", 1)) <= 17
    assert load_key(path) == k
    assert logistic_keystream(load_key(path)) == logistic_keystream(k)


def test_flat_key_file(tmp_path):
    path = tmp_path / "k.txt"
    path.write_text(f"# key\nn = 1\nP = 1\nQ = 1\ns = 1\nt = 1\nL0 = {L0!r}\ndelta: {DELTA!r}\n")
    assert load_key(path) == key()


@pytest.mark.parametrize("text", ['{"n": 1}', '{"n":1,"P":1,"Q":1,"s":2,"t":1,"L0":"0.5","delta":"3.9"}',
                                  '{"n":1,"P":"x","Q":1,"s":1,"t":1,"L0":"0.5","delta":"3.9"}', "[1, 2]"])
def test_bad_key_files(tmp_path, text):
    path = tmp_path / "k.json"
    path.write_text(text)
    with pytest.raises(InvalidKeyError):
        load_key(path)


def test_keyspace_summary():
    ks = keyspace_summary(3)
    assert ks["affine_register_bits"] == 12
    assert ks["multiplicative_log2"] == 12 + 104
    assert ks["additive_log2"] == pytest.approx(np.log2(2.0 ** 12 + 2.0 ** 104))
    assert ks["affine_valid_log2"] == pytest.approx(np.log2(7 * 7 * 4 * 4))
