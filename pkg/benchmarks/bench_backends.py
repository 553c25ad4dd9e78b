"""Time the compiled kernel against the pure-Python loop.

    python3 benchmarks/bench_backends.py [--iters 20000] [--repeat 3]

Each bundled scenario runs with early stopping disabled so both backends do
the same amount of work; the table reports the best of ``--repeat`` runs.
"""
import argparse
import time

import numpy as np

from drtool import backend
from drtool.scenario import bundled_scenarios, load_scenario


def best_time(sc, iters, name, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        X, *_ = backend.iterate(sc.spec.op_a, sc.spec.op_b, sc.spec.start, iters, None, 0, name)
        times.append(time.perf_counter() - t0)
    return min(times), X


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iters", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    if not backend.COMPILED:
        print("compiled kernel not available; nothing to compare")
        return 1
    print(f"{'scenario':32s} {'python s':>10s} {'compiled s':>11s} {'speedup':>8s}  same")
    for path in bundled_scenarios():
        sc = load_scenario(path)
        tp, xp = best_time(sc, args.iters, "python", args.repeat)
        tc, xc = best_time(sc, args.iters, "compiled", args.repeat)
        same = np.array_equal(xp, xc)
        print(f"{sc.name:32s} {tp:10.4f} {tc:11.4f} {tp / tc:7.1f}x  {same}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
