# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled in-place amplitude kernels. Bit ``q`` of a basis index is qubit ``q``."""
from libc.stdint cimport uint64_t

BACKEND = "cython"


def apply_mcx(double complex[::1] state, uint64_t mask, uint64_t value, int target):
    """Swap amplitude pairs across ``target`` where ``index & mask == value``."""
    cdef Py_ssize_t half = state.shape[0] >> 1
    cdef uint64_t tb = (<uint64_t>1) << target
    cdef uint64_t low = tb - 1
    cdef uint64_t i, i0
    cdef double complex tmp
    with nogil:
        for i in range(<uint64_t>half):
            i0 = ((i >> target) << (target + 1)) | (i & low)
            if (i0 & mask) == value:
                tmp = state[i0]
                state[i0] = state[i0 | tb]
                state[i0 | tb] = tmp


def apply_1q(double complex[::1] state, double complex m00, double complex m01,
             double complex m10, double complex m11, int target):
    cdef Py_ssize_t half = state.shape[0] >> 1
    cdef uint64_t tb = (<uint64_t>1) << target
    cdef uint64_t low = tb - 1
    cdef uint64_t i, i0
    cdef double complex a, b
    with nogil:
        for i in range(<uint64_t>half):
            i0 = ((i >> target) << (target + 1)) | (i & low)
            a = state[i0]
            b = state[i0 | tb]
            state[i0] = m00 * a + m01 * b
            state[i0 | tb] = m10 * a + m11 * b
