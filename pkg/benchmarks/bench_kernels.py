"""Time the jitted kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py --sets 20 --repeat 5

Both paths must agree on every input; a mismatch aborts the run.
"""

import argparse
import time

import numpy as np

from mcllc import _kernels
from mcllc.alloc import strategy_allocate
from mcllc.dbf import CoreArrays, hi_horizon, lo_horizon
from mcllc.workload import GenParams, derive_seeds, gen_taskset


def build_inputs(n_sets, seed, utilisation):
    scans, tables = [], []
    for k in range(n_sets):
        ts = gen_taskset(GenParams(utilisation=utilisation, seeds=derive_seeds(seed, k)))
        alloc = strategy_allocate(ts, "Z")
        arrs = CoreArrays.build(ts.tasks, alloc)
        # a scaled-looking deadline so the H scan has carry-over offsets
        hi = np.nonzero(arrs.hi)[0]
        arrs.DL[hi] = np.maximum(arrs.CL[hi], arrs.D[hi] * 3 // 4)
        h_lo, h_hi = lo_horizon(arrs), hi_horizon(arrs)
        if h_lo is not None:
            scans.append(("lo", (arrs.T, arrs.DL, arrs.CL, h_lo)))
        if h_hi is not None:
            scans.append(("hi", (*arrs.hi_view(), h_hi)))
        width = ts.cache.total_pages
        rng = np.random.default_rng(k)
        tables.append((rng.integers(0, 1 << 40, size=(len(ts), width + 1), dtype=np.int64), width))
    return scans, tables


def timed(fn, inputs, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = [fn(*args) for args in inputs]
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sets", type=int, default=20)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--utilisation", type=float, default=0.2)
    args = p.parse_args(argv)

    if not _kernels.NUMBA_AVAILABLE:
        print("numba unavailable or disabled; only the numpy path can be timed")
    scans, tables = build_inputs(args.sets, args.seed, args.utilisation)
    cases = [
        ("scan_lo_points", [a for kind, a in scans if kind == "lo"]),
        ("scan_hi_points", [a for kind, a in scans if kind == "hi"]),
        ("mckp_suffix", tables),
    ]
    print(f"{'kernel':<16}{'calls':>7}{'numpy s':>12}{'numba s':>12}{'speedup':>10}")
    for name, inputs in cases:
        t_np, ref = timed(_kernels.numpy_impl[name], inputs, args.repeat)
        if _kernels.NUMBA_AVAILABLE:
            fn = getattr(_kernels, name)
            fn(*inputs[0])  # compile outside the timed region
            t_nb, got = timed(fn, inputs, args.repeat)
            same = all(np.array_equal(np.asarray(a), np.asarray(b)) for a, b in zip(ref, got))
            if not same:
                raise SystemExit(f"{name}: numba and numpy results differ")
            print(f"{name:<16}{len(inputs):>7}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>10.1f}")
        else:
            print(f"{name:<16}{len(inputs):>7}{t_np:>12.4f}{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
