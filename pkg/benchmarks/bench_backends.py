#!/usr/bin/env python3
"""Time the numba kernels against the pure-numpy fallback.

Each backend runs in its own interpreter because the choice is fixed at
import time by ``SMOOTHDISC_NO_NUMBA``.

Usage:
    python3 benchmarks/bench_backends.py [--n-brute 18] [--walks 200] [--repeat 3]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
import numpy as np
from smoothdisc import backend
from smoothdisc.kernels import brute_force, gs_walk_batch
from smoothdisc.walk import LSQ_RCOND, LSQ_RESIDUAL_TOL, SNAP_TOL

n_brute, walks, repeat = map(int, sys.argv[1:4])
rng = np.random.default_rng(7)

def unit_columns(d, n):
    G = rng.standard_normal((d, n))
    return G / np.linalg.norm(G, axis=0)

def best_of(fn):
    fn()  # warm-up, includes compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out

V = unit_columns(6, n_brute)
t_brute, (val, _) = best_of(lambda: brute_force(V))

W = unit_columns(10, 50)
coins = rng.random((walks, 50))
t_walk, (X, _, status) = best_of(lambda: gs_walk_batch(W, coins, LSQ_RCOND, LSQ_RESIDUAL_TOL, SNAP_TOL))
print(json.dumps({"backend": backend(), "brute_s": t_brute, "brute_value": float(val),
                  "walk_s": t_walk, "walk_checksum": int(np.asarray(X).sum()),
                  "walk_failures": int(np.count_nonzero(status))}))
"""


def run(no_numba: bool, args) -> dict:
    env = dict(os.environ)
    env["SMOOTHDISC_NO_NUMBA"] = "1" if no_numba else "0"
    out = subprocess.run([sys.executable, "-c", CHILD, str(args.n_brute), str(args.walks), str(args.repeat)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-brute", type=int, default=18, help="columns for exhaustive search (6 rows)")
    ap.add_argument("--walks", type=int, default=200, help="walk samples on a 10x50 matrix")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    fast = run(False, args)
    slow = run(True, args)
    print(f"{'kernel':<22}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for key, label in (("brute_s", f"brute force n={args.n_brute}"), ("walk_s", f"walk x{args.walks}")):
        print(f"{label:<22}{fast[key]:>12.4f}{slow[key]:>12.4f}{slow[key] / fast[key]:>10.1f}")
    same = abs(fast["brute_value"] - slow["brute_value"]) <= 1e-12
    print(f"brute-force values agree: {same}  (numba {fast['brute_value']:.12g}, numpy {slow['brute_value']:.12g})")
    print(f"walk failures: numba {fast['walk_failures']}, numpy {slow['walk_failures']}")
    if fast["backend"] != "numba":
        print("note: numba unavailable, both runs used the numpy fallback")


if __name__ == "__main__":
    main()
