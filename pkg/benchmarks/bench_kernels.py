#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the NumPy fallback.

Run after `pip install -e .`:

    python benchmarks/bench_kernels.py
"""
import time

import numpy as np

from relaysim.kernels import _pure

try:
    from relaysim.kernels import _speed
except ImportError:
    _speed = None


def bench(label, fn_pure, fn_ext, args, repeats=200):
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn_pure(*args)
    t_pure = (time.perf_counter() - t0) / repeats
    line = f"{label:<28s} pure {t_pure * 1e6:9.1f} us"
    if fn_ext is not None:
        t0 = time.perf_counter()
        for _ in range(repeats):
            fn_ext(*args)
        t_ext = (time.perf_counter() - t0) / repeats
        line += f"   cython {t_ext * 1e6:9.1f} us   speedup {t_pure / t_ext:5.2f}x"
    else:
        line += "   (compiled core not built)"
    print(line)


def main():
    rng = np.random.default_rng(0)

    theta = rng.standard_normal(100_000)
    bench("cis / 100k angles", _pure.cis,
          _speed.cis if _speed else None, (theta,), repeats=50)

    # steering table of an 60x120 panel for 20 rays
    alpha, beta = rng.standard_normal(20), rng.standard_normal(20)
    bench("upa_phases 60x120 x 20 rays", _pure.upa_phases,
          _speed.upa_phases if _speed else None, (alpha, beta, 60, 120), repeats=50)

    # per-slot cascade PSD reduction: 20x20 cluster pairs over 50 subbands
    L = rng.standard_normal((20, 20)) + 1j * rng.standard_normal((20, 20))
    a_rd, b_rd = rng.standard_normal(20), rng.uniform(0, 1e-6, 20)
    a_sr, b_sr = rng.standard_normal(20), rng.uniform(0, 1e-6, 20)
    freqs = np.linspace(-5e7, 5e7, 50)
    bench("cascade_response 20x20x50", _pure.cascade_response,
          _speed.cascade_response if _speed else None,
          (L, a_rd, b_rd, a_sr, b_sr, freqs), repeats=2000)

    Lv = rng.standard_normal(20) + 1j * rng.standard_normal(20)
    bench("direct_response 20x50", _pure.direct_response,
          _speed.direct_response if _speed else None,
          (Lv, a_sr, b_sr, freqs), repeats=2000)


if __name__ == "__main__":
    main()
