"""Time the compiled RK4 kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from qctl import _kernels_py

try:
    from qctl import _kernels
except ImportError:
    _kernels = None


def cases(rng):
    for n in (4, 8, 12, 20):
        A = rng.standard_normal((n, n)) / np.sqrt(n) - 1.5 * np.eye(n)
        Q = rng.standard_normal((n, n))
        Q = Q - Q.T
        yield n, A, Q, rng.standard_normal(n)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--steps", type=int, default=10000)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled kernels not built; only the fallback is available")
    backends = [("python", _kernels_py)] + ([("cython", _kernels)] if _kernels else [])
    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'n':>4}" + "".join(f"{b:>12}" for b, _ in backends) + f"{'speedup':>10}")
    for n, A, Q, x0 in cases(rng):
        Z = np.zeros((n, n))
        jobs = {
            "rk4_linear": lambda k: k.rk4_linear(A, x0, 1e-3, args.steps),
            "rk4_lyapunov": lambda k: k.rk4_lyapunov(A, Q, Z, Z, 1e-3, args.steps, False),
        }
        for name, job in jobs.items():
            t = [min(timeit.repeat(lambda: job(k), number=1, repeat=args.repeat)) for _, k in backends]
            speed = f"{t[0] / t[1]:>9.1f}x" if len(t) > 1 else ""
            print(f"{name:<14}{n:>4}" + "".join(f"{x * 1e3:>10.2f}ms" for x in t) + speed)


if __name__ == "__main__":
    main()
