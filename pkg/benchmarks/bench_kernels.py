"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [--quick]

Both backends are loaded side by side; each row reports the best of
``--repeat`` runs and checks that the two backends return the same result.
"""

import argparse
import time

import numpy as np

from cminhash import _kernels_py
from cminhash.experiments import SyntheticPairSpec, synth_pair
from cminhash.permute import SCHEME_CODE, Scheme

try:
    from cminhash import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray) and a.dtype.kind == "f":
        return np.allclose(a, b, rtol=1e-12, atol=1e-15)
    return np.array_equal(a, b)


def cases(quick):
    trials = 20_000 if quick else 100_000
    v, w = synth_pair(SyntheticPairSpec(64, 16, 4, "random", 1))
    v0, w0 = v.nonzeros - 1, w.nonzeros - 1
    for scheme in (Scheme.MINHASH, Scheme.SIGMA_PI, Scheme.PI_PI):
        yield (f"mc_power_sums {scheme.value} D=64 K=64 T={trials}",
               lambda k, s=scheme: k.mc_power_sums(v0, w0, 64, SCHEME_CODE[s], 64, 1, 0, trials))
    x = SyntheticPairSpec(64, 16, 4, "random", 1).location_vector()
    codes64 = x.codes.astype(np.int64)
    yield "expectation_partials (64,16,4) k=1", lambda k: k.expectation_partials(codes64, 1, x.a, x.f)
    D = 8 if quick else 9
    small = SyntheticPairSpec(D, 4, 2, "random", 1).location_vector().codes.astype(np.int8)
    yield f"bruteforce_count D={D}", lambda k: k.bruteforce_count(small, 1)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the numpy fallback is available")
    print(f"{'kernel':<44} {'numpy s':>10} {'cython s':>10} {'speedup':>8}  match")
    for name, fn in cases(args.quick):
        t_py, r_py = best_of(lambda: fn(_kernels_py), args.repeat)
        if _kernels is None:
            print(f"{name:<44} {t_py:>10.4f} {'-':>10} {'-':>8}")
            continue
        t_cy, r_cy = best_of(lambda: fn(_kernels), args.repeat)
        print(f"{name:<44} {t_py:>10.4f} {t_cy:>10.4f} {t_py / t_cy:>7.1f}x  {same(r_py, r_cy)}")


if __name__ == "__main__":
    main()
