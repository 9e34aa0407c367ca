"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 20]

Prints per-call timings and the speedup for each workload, after checking
that both backends agree to 1e-12.
"""
import argparse
import sys
import timeit

import numpy as np

from edslab import _kernels_py
from edslab.exterior import multi_indices

try:
    from edslab import _ckernels
except ImportError:
    _ckernels = None


def workloads(rng):
    # (label, function name, args)
    out = []
    for m, k, batch in ((8, 2, 2000), (12, 3, 500), (16, 2, 500), (10, 5, 100)):
        combos = np.asarray(multi_indices(m, k))
        coeffs = rng.standard_normal((4, combos.shape[0]))
        vecs = rng.standard_normal((batch, m, k))
        out.append((f"eval_batch m={m} k={k} B={batch}", "eval_batch", (coeffs, combos, vecs)))
    for n in (5, 10, 50):
        ang = 2 * np.pi * np.arange(n) / n
        z = np.column_stack([np.cos(ang), np.sin(ang)]) + 0.05 * rng.standard_normal((n, 2))
        out.append((f"point_frames n={n}", "point_frames", (z,)))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; only the numpy fallback is available", file=sys.stderr)
        return 1
    rng = np.random.default_rng(args.seed)
    print(f"{'workload':36s} {'numpy [us]':>12s} {'cython [us]':>12s} {'speedup':>8s}")
    for label, name, fargs in workloads(rng):
        py_fn, c_fn = getattr(_kernels_py, name), getattr(_ckernels, name)
        ref, got = py_fn(*fargs), c_fn(*fargs)
        for a, b in zip(np.atleast_1d(ref) if name == "eval_batch" else ref,
                        np.atleast_1d(got) if name == "eval_batch" else got):
            if not np.allclose(a, b, rtol=1e-12, atol=1e-12):
                print(f"{label}: backends disagree", file=sys.stderr)
                return 1
        t_py = min(timeit.repeat(lambda: py_fn(*fargs), number=1, repeat=args.repeat)) * 1e6
        t_c = min(timeit.repeat(lambda: c_fn(*fargs), number=1, repeat=args.repeat)) * 1e6
        print(f"{label:36s} {t_py:12.1f} {t_c:12.1f} {t_py / t_c:8.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
