"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--size N] [--repeat R]

Both backends get identical inputs.  The script checks that they agree
(bit-identical for the sampling kernels, to rounding for the integrals) and
prints the best-of-R wall time of each.
"""

import argparse
import time

import numpy as np

from randsum._kernels import _fallback

try:
    from randsum._kernels import _core
except ImportError:  # extension not built
    _core = None


def _inputs(size, seed):
    rng = np.random.default_rng(seed)
    atoms = np.array([-2.0, -1.0, 0.0, 1.0, 3.0])
    cdf = np.cumsum([0.1, 0.2, 0.3, 0.25, 0.15])
    cdf[-1] = 1.0
    counts = rng.poisson(20, size)
    n = rng.poisson(20, size)
    m = rng.poisson(20, size)
    b = rng.random(size) < 0.3
    draws = _fallback.gap_draws(n, m, b)
    support = np.arange(0.0, 400.0)
    pa = rng.dirichlet(np.ones(support.size))
    pb = rng.dirichlet(np.ones(support.size))
    z = np.sort(rng.standard_normal(size))
    F = np.arange(1, size + 1) / size
    return {
        "compound_sums": (counts, cdf, atoms, rng.random(int(counts.sum()))),
        "coupled_gaps": (n, m, b, cdf, atoms, rng.random(int(draws.sum()))),
        "cdf_l1": (support, pa, support + 0.5, pb),
        "normal_l1": (z, F),
    }


def _best(fn, args, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _core is None:
        print("compiled extension not available; only the fallback can be timed")
    print(f"{'kernel':<15}{'python (s)':>12}{'compiled (s)':>14}{'speedup':>10}  agreement")
    for name, kargs in _inputs(args.size, args.seed).items():
        t_py, r_py = _best(getattr(_fallback, name), kargs, args.repeat)
        if _core is None:
            print(f"{name:<15}{t_py:>12.4f}{'-':>14}{'-':>10}")
            continue
        t_c, r_c = _best(getattr(_core, name), kargs, args.repeat)
        if name in ("compound_sums", "coupled_gaps"):
            agree = "identical" if np.array_equal(r_py, r_c) else "MISMATCH"
        else:
            agree = f"rel diff {abs(r_py - r_c) / max(abs(r_py), 1e-300):.1e}"
        print(f"{name:<15}{t_py:>12.4f}{t_c:>14.4f}{t_py / t_c:>10.1f}  {agree}")


if __name__ == "__main__":
    main()
