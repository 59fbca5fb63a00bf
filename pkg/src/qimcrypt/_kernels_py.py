"""Numpy fallback for the compiled kernels (same signatures, same in-place semantics)."""
import numpy as np

BACKEND = "numpy"


def _pairs(size: int, target: int) -> np.ndarray:
    half = np.arange(size >> 1, dtype=np.int64)
    low = (1 << target) - 1
    return ((half >> target) << (target + 1)) | (half & low)


def apply_mcx(state: np.ndarray, mask: int, value: int, target: int) -> None:
    i0 = _pairs(state.shape[0], target)
    if mask:
        i0 = i0[(i0 & mask) == value]
    i1 = i0 | (1 << target)
    state[i0], state[i1] = state[i1], state[i0].copy()


def apply_1q(state: np.ndarray, m00, m01, m10, m11, target: int) -> None:
    view = state.reshape(-1, 2, 1 << target)
    a = view[:, 0, :].copy()
    b = view[:, 1, :]
    view[:, 0, :] = m00 * a + m01 * b
    view[:, 1, :] = m10 * a + m11 * b
