"""Throughput of the slot loop under the numba and pure-numpy backends.

    python3 benchmarks/bench_sim.py --slots 200000

Both backends consume the same random chunks, so the script also checks
that they return identical counters.
"""

import argparse
import time

import numpy as np

from ehrelay.radio import NetworkConfig
from ehrelay.sim.engine import run


def timed(config, backend, slots, seed, repeat):
    best, stats = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        stats = run(config, seed=seed, n_slots=slots, warmup=0, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, stats


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--slots", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    config = NetworkConfig.from_db(10, 15, 10, -5, -5, 1.5)
    # compile outside the timed region
    run(config, seed=0, n_slots=1000, warmup=0, backend="numba")

    results = {}
    for backend in ("numba", "numpy"):
        secs, stats = timed(config, backend, args.slots, args.seed, args.repeat)
        results[backend] = stats
        print(f"{backend:>6}: {secs:8.3f} s  {args.slots / secs:12.0f} slots/s")

    a, b = results["numba"], results["numpy"]
    same = (np.array_equal(a.occupancy, b.occupancy)
            and np.array_equal(a.condition_counts, b.condition_counts)
            and np.array_equal(a.buffer1_hist, b.buffer1_hist)
            and np.array_equal(a.buffer2_hist, b.buffer2_hist)
            and a.final_state == b.final_state)
    print(f"identical counters: {same}")
    return 0 if same else 1


if __name__ == "__main__":
    raise SystemExit(main())
