"""Brute-force oracle scan of the single-input corpus functions.

Evaluates the high-precision relative error on a fixed grid of one million
points per function and prints where the error peaks.  Used once to pin the
``known_witness_regions`` in :mod:`fperr.corpus`; the numbers are kept in the
notes next to the repository, not recomputed by the test suite.

Phase one is a global grid (log-spaced magnitudes plus a linear band around
the origin).  A plain grid cannot land within 1e-11 of a cancellation root,
so phase two zooms in on the largest peaks with successively narrower
linear grids.

    python scripts/scan_witness_regions.py [--points 1000000] [--out scan.json]
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

from fperr.corpus import registry
from fperr.exceptions import OracleDomainError
from fperr.oracle import OracleConfig, oracle_relative_error

CFG = OracleConfig(precision_bits=128)
PEAKS = 4
ROUNDS = 5


def logspace(a, b, n):
    return [10.0 ** (a + (b - a) * i / (n - 1)) for i in range(n)]


def linspace(a, b, n):
    return [a + (b - a) * i / (n - 1) for i in range(n)]


def err(f, x):
    if not f.in_domain((x,)):
        return None
    try:
        e = oracle_relative_error(f, (x,), CFG)
    except OracleDomainError:
        return None
    return None if math.isnan(e) else e


def global_grid(f, n):
    lo, hi = f.domain[0]
    n_log = n * 2 // 3
    mags = logspace(-30, 6, n_log // 2 if lo < 0 else n_log)
    pts = list(mags) + ([-m for m in mags] if lo < 0 else [])
    pts += linspace(max(lo, -8.0), min(hi, 8.0), n - len(pts))
    return sorted({x for x in pts if lo <= x <= hi})


def peaks(scored, k):
    """Largest local maxima of the (x, error) sequence, one per neighbourhood."""
    local = [i for i in range(len(scored))
             if scored[i][1] >= scored[max(i - 1, 0)][1] and scored[i][1] >= scored[min(i + 1, len(scored) - 1)][1]]
    local.sort(key=lambda i: -scored[i][1])
    out = []
    for i in local:
        x = scored[i][0]
        if any(abs(x - y) <= 1e-3 * max(abs(x), abs(y), 1e-300) for y, _ in out):
            continue
        left = scored[max(i - 1, 0)][0]
        right = scored[min(i + 1, len(scored) - 1)][0]
        out.append((x, (left, right)))
        if len(out) == k:
            break
    return out


def zoom(f, window, budget):
    lo, hi = window
    per = budget // ROUNDS
    best = (lo, -1.0)
    for _ in range(ROUNDS):
        for x in linspace(lo, hi, per):
            e = err(f, x)
            if e is not None and e > best[1]:
                best = (x, e)
        half = (hi - lo) * 1e-2
        lo, hi = best[0] - half, best[0] + half
        if hi - lo < 4e-16 * max(abs(best[0]), 1e-300):
            break
    return best


def scan(f, n):
    t0 = time.perf_counter()
    grid = global_grid(f, n * 3 // 5)
    scored = [(x, e) for x in grid if (e := err(f, x)) is not None]
    top = peaks(scored, PEAKS)
    budget = (n - len(grid)) // max(len(top), 1)
    found = []
    for x, window in top:
        bx, be = zoom(f, window, budget)
        found.append({"seed_x": x, "window": list(window), "best_x": bx, "best_err": be})
    worst = max(scored, key=lambda p: p[1])
    return {"function": f.id, "grid_points": len(grid), "zoom_points": budget * len(top),
            "grid_max": {"x": worst[0], "err": worst[1]}, "peaks": found,
            "seconds": time.perf_counter() - t0}


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=1_000_000)
    ap.add_argument("--only", nargs="*")
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    results = []
    for e in registry():
        f = e.function
        if f.arity != 1 or (args.only and f.id not in args.only):
            continue
        r = scan(f, args.points)
        results.append(r)
        print(json.dumps(r), flush=True)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(results, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
