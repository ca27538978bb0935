"""Time the compiled and pure-Python series kernels on the same workloads.

    python3 benchmarks/bench_kernel.py [--repeat 5]

Each row reports the best wall time per call and the compiled speed-up.
Results are checked for agreement before timing.
"""
import argparse
import timeit

import numpy as np

from fracsurv import chf
from fracsurv.model import ModelParams, cdf, pdf, quantile

GRID = np.linspace(0.0, 94.512, 513)[1:-1]
SET = ModelParams(34.025, 34.094, 1.483, 94.512)


def workloads():
    z = -np.linspace(0.1, 140.0, 512)
    return {
        "log_chf_signed, 512 z in [-140, 0]": lambda: chf.log_chf_signed(34.025, 35.094, z),
        "log_chf_signed, scalar z=-140": lambda: chf.log_chf_signed(34.025, 35.094, -140.0),
        "chf_1f1, 512 z in [0, 50]": lambda: chf.chf_1f1(0.5, 1.5, -z[z > -50]),
        "cdf + pdf on 512 points": lambda: (cdf(SET, GRID), pdf(SET, GRID)),
        "quantile of 1000 uniforms": lambda: quantile(SET, np.linspace(0.001, 0.999, 1000)),
    }


def run(backend, fn, repeat):
    chf.use_backend(backend)
    out = fn()
    n = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-6)))
    best = min(timeit.repeat(fn, number=n, repeat=repeat)) / n
    return best, out


def same(a, b):
    a = a if isinstance(a, tuple) else (a,)
    b = b if isinstance(b, tuple) else (b,)
    return all(np.allclose(x, y, rtol=1e-12, atol=0, equal_nan=True) for x, y in zip(a, b))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    previous = chf.BACKEND
    try:
        chf.use_backend("compiled")
    except ImportError:
        print("compiled kernel not built; nothing to compare")
        return
    print(f"{'workload':38s} {'compiled':>12s} {'python':>12s} {'speed-up':>9s}")
    for name, fn in workloads().items():
        tc, oc = run("compiled", fn, args.repeat)
        tp, op = run("python", fn, args.repeat)
        flag = "" if same(oc, op) else "  MISMATCH"
        print(f"{name:38s} {tc * 1e3:10.3f}ms {tp * 1e3:10.3f}ms {tp / tc:8.1f}x{flag}")
    chf.use_backend(previous)


if __name__ == "__main__":
    main()
