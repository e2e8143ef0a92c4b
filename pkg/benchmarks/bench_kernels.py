"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from mrfmqc import _purepy

try:
    from mrfmqc import _kernels
except ImportError:
    _kernels = None


def bench_rotate(module, n_sites, repeat):
    rng = np.random.default_rng(0)
    dim = 4**n_sites
    amps = (rng.normal(size=dim) + 1j * rng.normal(size=dim)).astype(np.complex128)
    detuning = rng.normal(scale=1e3, size=dim // 2)
    timer = timeit.Timer(lambda: module.rotate_pairs(amps, 3, detuning, 100.0, 0.2, 5e-3))
    return min(timer.repeat(repeat, 20)) / 20


def bench_dipole(module, n, repeat):
    signs = np.where(np.random.default_rng(1).random(n) < 0.5, -1.0, 1.0)
    timer = timeit.Timer(lambda: module.dipole_fields(signs, -7.4e-6))
    return min(timer.repeat(repeat, 5)) / 5


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the numpy fallback is available")
    cases = [("rotate_pairs", f"{n} sites", bench_rotate, n) for n in (3, 5, 6)]
    cases += [("dipole_fields", f"{n} spins", bench_dipole, n) for n in (100, 1000, 4000)]
    print(f"{'kernel':<14}{'size':<12}{'numpy [us]':>12}{'cython [us]':>13}{'speedup':>9}")
    for name, size, fn, n in cases:
        slow = fn(_purepy, n, args.repeat) * 1e6
        if _kernels is None:
            print(f"{name:<14}{size:<12}{slow:>12.1f}{'-':>13}{'-':>9}")
            continue
        fast = fn(_kernels, n, args.repeat) * 1e6
        print(f"{name:<14}{size:<12}{slow:>12.1f}{fast:>13.1f}{slow / fast:>8.1f}x")


if __name__ == "__main__":
    main()
