"""Compare the compiled node-sum kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--sizes 2000 8000 32000] [--repeat 200]

Prints the median time per call for each kernel and grid size, the speedup,
and the largest relative difference between the two backends.
"""

import argparse
import statistics
import time

import numpy as np

from normsol import _fallback
from normsol.radial import make_grid

try:
    from normsol import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None


def _time(fn, repeat):
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def _cases(n):
    g3 = make_grid(3, 40.0, n, "geometric", 1.0005)
    g2 = make_grid(2, 40.0, n, "geometric", 1.0005)
    u3 = np.exp(-0.5 * g3.r**2)
    u2 = 0.5 * np.exp(-0.5 * g2.r**2)
    return {
        "power_sums": (lambda k: k.power_sums(u3, g3.weights, 1.1, 50.0, 4.0, 6.0, 2)),
        "exp_sums": (lambda k: k.exp_sums(u2, g2.weights, 1.1, 50.0, 6.0, 2)),
        "dirichlet_sum": (lambda k: k.dirichlet_sum(u3, g3.coupling)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", type=int, nargs="+", default=[2000, 8000, 32000])
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels are not built; only the fallback is available")
        return 1
    print(f"{'kernel':<15}{'M':>8}{'numpy [us]':>14}{'compiled [us]':>15}{'speedup':>10}{'max rel diff':>15}")
    for n in args.sizes:
        for name, call in _cases(n).items():
            ref, got = np.array(call(_fallback)), np.array(call(_ckernels))
            diff = float(np.max(np.abs(got - ref) / np.maximum(np.abs(ref), 1e-300)))
            t_py = _time(lambda: call(_fallback), args.repeat)
            t_c = _time(lambda: call(_ckernels), args.repeat)
            print(f"{name:<15}{n:>8}{t_py * 1e6:>14.1f}{t_c * 1e6:>15.1f}{t_py / t_c:>10.2f}{diff:>15.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
