"""Time the compiled and numpy kernels on the same inputs.

    python3 benchmarks/bench_backends.py [--repeat 3] [--quick]

Prints one row per kernel with the best-of-N wall time for each backend,
the speedup, and whether the outputs agree.
"""
import argparse
import time

import numpy as np

from pntap import _backend
from pntap.chars import character_group
from pntap.lfunc import bernoulli_coefficients
from pntap.primes import base_primes


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(quick):
    hi = 10**7 if quick else 10**8
    base = base_primes(int(hi**0.5) + 1)
    chi = character_group(7).primitive_characters()[1]
    vals = chi.values()
    t = np.linspace(0, 100, 2000 if quick else 20000)
    sr = np.full_like(t, 0.5)
    bern = bernoulli_coefficients(30)
    return [
        (f"primes_between(2, {hi:.0e})", lambda k: k.primes_between(2, hi, base), np.array_equal),
        (f"class_sums(2, {hi:.0e}, q=101)", lambda k: k.class_sums(2, hi, 101, base),
         lambda a, b: np.array_equal(a[0], b[0]) and np.allclose(a[1], b[1], rtol=1e-12)),
        (f"progression_sum(2, {hi:.0e}, 101, 3)", lambda k: k.progression_sum(2, hi, 101, 3, base),
         lambda a, b: a[0] == b[0] and abs(a[1] - b[1]) <= 1e-12 * abs(a[1])),
        (f"dirichlet_block(q=7, {t.size} points, N=50)",
         lambda k: k.dirichlet_block(sr, t, vals.real.copy(), vals.imag.copy(), 7, 50, bern, True),
         lambda a, b: np.allclose(a, b, rtol=0, atol=1e-10)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    args = ap.parse_args()
    names = _backend.available()
    if "cython" not in names:
        print("compiled backend not built; only the numpy kernels are available")
    kernels = {n: _backend.get(n) for n in names}
    print(f"{'kernel':44s} " + " ".join(f"{n:>10s}" for n in names) + "   speedup  agree")
    for label, fn, same in cases(args.quick):
        times, outs = {}, {}
        for n, k in kernels.items():
            times[n], outs[n] = best_of(lambda: fn(k), args.repeat)
        row = f"{label:44s} " + " ".join(f"{times[n]:9.3f}s" for n in names)
        if len(names) == 2:
            row += f"   {times['python'] / times['cython']:6.1f}x  {same(outs['python'], outs['cython'])}"
        print(row)


if __name__ == "__main__":
    main()
