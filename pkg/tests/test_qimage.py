import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from qimcrypt.qimage import (
    GrayImage,
    ImageSizeError,
    basis_index,
    build_naive_neqr_circuit,
    coordinate_controls,
    neqr_state,
    perfect_counts,
    reconstruct_image,
    split_basis_index,
)
from qimcrypt.qsim import run_statevector, sample_counts


def images(max_n=3):
    return st.integers(1, max_n).flatmap(
        lambda n: st.lists(st.integers(0, 255), min_size=4 ** n, max_size=4 ** n)
        .map(lambda px: GrayImage(n, tuple(px)))
    )


def test_image_validation():
    with pytest.raises(ImageSizeError):
        GrayImage(1, (1, 2, 3))
    with pytest.raises(ValueError):
        GrayImage(1, (1, 2, 3, 256))
    with pytest.raises(ImageSizeError):
        GrayImage.from_rows([[1, 2, 3], [1, 2, 3], [1, 2, 3]])
    img = GrayImage.from_rows([[255, 0], [200, 100]])
    assert img[1, 0] == 200 and img.side == 2
    assert img.by_position() == {"00": 255, "01": 0, "10": 200, "11": 100}
    assert GrayImage.from_array(img.to_array()) == img


def test_basis_index_roundtrip():
    for n in (1, 2):
        for v in (0, 7, 255):
            for y in range(1 << n):
                for x in range(1 << n):
                    k = basis_index(v, y, x, n)
                    assert split_basis_index(k, n) == (v, y, x)


def test_neqr_state_test_image(test_image):
    state = neqr_state(test_image)
    nz = state.nonzero()
    assert nz == {basis_index(v, y, x, 1): 0.5 for (y, x), v in
                  {(0, 0): 255, (0, 1): 0, (1, 0): 200, (1, 1): 100}.items()}
    assert abs(state.norm() - 1) < 1e-12


def test_neqr_state_all_zero():
    nz = neqr_state(GrayImage(1, (0, 0, 0, 0))).nonzero()
    assert nz == {0: 0.5, 1: 0.5, 2: 0.5, 3: 0.5}


def test_neqr_state_matches_loop_oracle():
    rng = np.random.default_rng(3)
    img = GrayImage(2, tuple(int(v) for v in rng.integers(0, 256, 16)))
    assert np.array_equal(neqr_state(img).amplitudes, oracles.neqr_amplitudes(img.pixels, 2))


def test_naive_circuit_counts(test_image, derived):
    circ = build_naive_neqr_circuit(test_image)
    kinds = [g.kind for g in circ.gates]
    assert kinds.count("H") == 2
    assert kinds.count("MCX") == derived["naive_mcx_count"] == 14
    assert all(g.num_controls == 2 for g in circ.gates if g.kind == "MCX")
    zero = build_naive_neqr_circuit(GrayImage(1, (0, 0, 0, 0)))
    assert [g.kind for g in zero.gates] == ["H", "H"]
    one = build_naive_neqr_circuit(GrayImage(1, (1, 0, 0, 0)))
    assert [g.kind for g in one.gates] == ["H", "H", "MCX"]
    assert one.gates[-1].controls == coordinate_controls(0, 1)


@settings(max_examples=25, deadline=None)
@given(images())
def test_naive_circuit_simulates_to_neqr(img):
    sim = run_statevector(build_naive_neqr_circuit(img))
    assert np.array_equal(sim.amplitudes, neqr_state(img).amplitudes)
    mcx = sum(1 for g in build_naive_neqr_circuit(img).gates if g.kind != "H")
    assert mcx == oracles.popcount_total(img.pixels)


@settings(max_examples=25, deadline=None)
@given(images())
def test_reconstruct_perfect_counts(img):
    rec, cov = reconstruct_image(perfect_counts(neqr_state(img), 4 ** img.n * 16), img.n)
    assert rec == img and cov.complete


def test_reconstruct_partial():
    rec, cov = reconstruct_image({"0" * 10: 5}, 1)
    assert rec.pixels == (0, 0, 0, 0)
    assert set(cov.missing) == {(0, 1), (1, 0), (1, 1)}
    assert cov.shots == 5


def test_reconstruct_tie_goes_to_smaller_value():
    a = format(basis_index(9, 0, 0, 1), "010b")
    b = format(basis_index(3, 0, 0, 1), "010b")
    rec, _ = reconstruct_image({a: 4, b: 4}, 1)
    assert rec[0, 0] == 3


def test_reconstruct_rejects_bad_labels():
    with pytest.raises(ValueError):
        reconstruct_image({"0101": 1}, 1)


def test_sampled_reconstruction(test_image):
    counts = sample_counts(neqr_state(test_image), 8192, seed=11)
    rec, cov = reconstruct_image(counts, 1)
    assert rec == test_image and cov.complete
