"""Compiled vs numpy kernels on gate application and a noise sweep point.

    python3 benchmarks/bench_kernels.py [--width 20] [--repeat 5]
"""
import argparse
import time

import numpy as np

from qimcrypt import _kernels_py, kernels
from qimcrypt.qimage import GrayImage, neqr_state
from qimcrypt.qsim import NoiseSpec, apply_noise_channel, to_density

try:
    from qimcrypt import _kernels as compiled
except ImportError:
    compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def gate_loop(impl, vec, width):
    for t in range(width):
        impl.apply_mcx(vec, 0b11 << ((t + 1) % (width - 1)) & ~(1 << t), 0, t)
        impl.apply_1q(vec, 0.6, 0.8, 0.8, -0.6, t)


def noise_point(impl):
    kernels.apply_mcx, kernels.apply_1q = impl.apply_mcx, impl.apply_1q
    rho = to_density(neqr_state(GrayImage(1, (255, 0, 200, 100))))
    apply_noise_channel(rho, NoiseSpec("depolarizing", 0.3))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--width", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impls = [("numpy", _kernels_py)] + ([("cython", compiled)] if compiled else [])
    vec = np.zeros(1 << args.width, dtype=np.complex128)
    vec[0] = 1
    print(f"{'backend':8s} {'gates (s)':>10s} {'noise (s)':>10s}")
    for name, impl in impls:
        g = best_of(lambda: gate_loop(impl, vec, args.width), args.repeat)
        n = best_of(lambda: noise_point(impl), max(1, args.repeat // 2))
        print(f"{name:8s} {g:10.4f} {n:10.4f}")
    if compiled is None:
        print("compiled extension not built; only the numpy path was timed")


if __name__ == "__main__":
    main()
