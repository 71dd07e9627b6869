"""Benchmark the compiled row-reduction kernel against the pure fallback.

Two workloads: raw reduction of random integer matrices of growing size, and
the end-to-end constraint analysis of a small random-netlist corpus (the
engine's dominant use of the kernel).

Run from the repository root:

    python benchmarks/bench_backends.py [--corpus N]
"""

from __future__ import annotations

import argparse
import random
import time

from diracsim.ratlin import _pure

try:
    from diracsim.ratlin import _speedups
except ImportError:
    _speedups = None


def bench_raw(kernel, matrices, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        copies = [[row[:] for row in m] for m in matrices]
        t0 = time.perf_counter()
        for m in copies:
            kernel.reduce_int_rows(m, len(m[0]) if m else 0)
        best = min(best, time.perf_counter() - t0)
    return best


def random_matrices(rng, count, rows, cols, span):
    return [[[rng.randint(-span, span) for _ in range(cols)]
             for _ in range(rows)] for _ in range(count)]


def bench_corpus(n_netlists, seed=20250810):
    """End-to-end: closed-form chains cross-checked against the generic CAD."""
    from diracsim import circuits as circ
    from diracsim.selftest import random_netlist
    rng = random.Random(seed)
    nets = [circ.build_spaces(random_netlist(rng)) for _ in range(n_netlists)]
    t0 = time.perf_counter()
    for cs in nets:
        circ.constraint_chain(cs)
    return time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--corpus", type=int, default=40,
                        help="netlists for the end-to-end workload")
    args = parser.parse_args()

    if _speedups is None:
        print("compiled kernel not built; only the pure backend is available")
        return

    rng = random.Random(1)
    print(f"{'workload':<34}{'pure':>10}{'compiled':>10}{'speedup':>9}")
    for rows, cols, count, span in ((8, 8, 400, 9), (16, 24, 200, 9),
                                    (32, 48, 80, 9), (48, 80, 40, 9),
                                    (24, 24, 100, 10 ** 12)):
        mats = random_matrices(rng, count, rows, cols, span)
        tp = bench_raw(_pure, mats)
        tc = bench_raw(_speedups, mats)
        label = f"rref {rows}x{cols} x{count} (|a|<={span:g})"
        print(f"{label:<34}{tp:>9.3f}s{tc:>9.3f}s{tp / tc:>8.1f}x")

    import os
    import subprocess
    import sys
    # end-to-end comparison needs a fresh interpreter per backend because the
    # kernel is chosen at import time
    code = (f"from benchmarks.bench_backends import bench_corpus; "
            f"print(bench_corpus({args.corpus}))")
    times = {}
    for backend, env_val in (("compiled", ""), ("pure", "1")):
        env = dict(os.environ)
        if env_val:
            env["DIRACSIM_PURE"] = env_val
        else:
            env.pop("DIRACSIM_PURE", None)
        out = subprocess.run([sys.executable, "-c", code], env=env,
                             capture_output=True, text=True, check=True)
        times[backend] = float(out.stdout.strip().splitlines()[-1])
    label = f"constraint chains x{args.corpus}"
    print(f"{label:<34}{times['pure']:>9.3f}s{times['compiled']:>9.3f}s"
          f"{times['pure'] / times['compiled']:>8.1f}x")


if __name__ == "__main__":
    main()
