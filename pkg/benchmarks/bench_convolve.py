"""Timing comparison of the compiled direct-convolution core against the
pure-Python fallback.

Run:  python3 benchmarks/bench_convolve.py
The fallback is forced in a subprocess through SQFN_FORCE_FALLBACK=1, so
one invocation reports both backends.
"""
import json
import os
import subprocess
import sys
import time

import numpy as np


def _bench_once() -> dict:
    import sqfn.grid as g
    from sqfn.backend import BACKEND

    box = g.interval(-8, 8)
    results = {"backend": BACKEND}
    rng = np.random.default_rng(0)
    for h, reps in ((2.0 ** -7, 20), (2.0 ** -9, 5)):
        f = g.sample(box, h, lambda x: np.exp(-x * x))
        f = f.with_values(f.values + 0.01 * rng.normal(size=f.values.shape))
        k = g.sample(g.interval(-1, 1), h,
                     lambda x: np.maximum(1.0 - np.abs(x), 0.0))
        g.convolve(f, k, method="direct")  # warm up
        best = np.inf
        for _ in range(reps):
            t0 = time.perf_counter()
            g.convolve(f, k, method="direct")
            best = min(best, time.perf_counter() - t0)
        results[f"direct_h={h:g}_ms"] = round(1000 * best, 3)
    return results


def main() -> int:
    if os.environ.get("SQFN_BENCH_CHILD"):
        print(json.dumps(_bench_once()))
        return 0
    rows = []
    for force in ("0", "1"):
        env = dict(os.environ, SQFN_BENCH_CHILD="1",
                   SQFN_FORCE_FALLBACK=force)
        proc = subprocess.run([sys.executable, __file__],
                              capture_output=True, text=True, env=env)
        if proc.returncode != 0:
            print(proc.stderr, file=sys.stderr)
            return 1
        rows.append(json.loads(proc.stdout))
    for row in rows:
        print(row)
    if rows[0]["backend"] != rows[1]["backend"]:
        keys = [k for k in rows[0] if k.endswith("_ms")]
        for k in keys:
            speedup = rows[1][k] / rows[0][k]
            print(f"{k}: compiled is {speedup:.1f}x the fallback")
    return 0


if __name__ == "__main__":
    sys.exit(main())
