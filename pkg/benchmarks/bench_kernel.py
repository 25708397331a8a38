"""Timing of the compiled integration kernel against the pure-Python fallback.

Runs the same trajectories through both backends, checks that they agree and
prints the wall time per call and the speed-up.

    python benchmarks/bench_kernel.py [--repeat 5]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from pucci_phase import _kernel_py
from pucci_phase.classify import gamma_seed
from pucci_phase.flow import Budget
from pucci_phase.params import make_params

try:
    from pucci_phase import _kernel as _compiled
except ImportError:
    _compiled = None

CASES = [
    ("laplacian p=5 (center)", make_params(1, 1, "plus", 3, 0), 5.0, 60.0),
    ("M+ N=4 p=8 (blow-up)", make_params(1, 2, "plus", 4, 0), 8.0, 40.0),
    ("M+ N=4 p=9.5 (spiral)", make_params(1, 2, "plus", 4, 0), 9.5, 60.0),
    ("M- N=3 p=2.345 (cycle)", make_params(1, 2, "minus", 3, 0), 2.345, 200.0),
]


def run(kernel_fn, prm, p, horizon, budget):
    s = gamma_seed(p, prm)
    return kernel_fn(0.0, s.X, s.Z, 1, prm.field_vector(p), horizon, budget.rtol,
                     budget.atol, budget.hmax, int(budget.max_steps), 1,
                     (1e6, 1e6, 1e8, 5.0), [], (0.0, 0.0, 0.0, 1.0), 0)


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _compiled is None:
        print("compiled kernel not built; run `pip install -e . --no-build-isolation`")
        return
    budget = Budget()
    print(f"{'case':28s} {'steps':>7s} {'python [s]':>11s} {'compiled [s]':>13s} "
          f"{'speed-up':>9s} {'max |dX|':>10s}")
    for name, prm, p, horizon in CASES:
        tp, rp = best_time(lambda: run(_kernel_py.integrate_kernel, prm, p, horizon, budget),
                           max(1, args.repeat // 2))
        tc, rc = best_time(lambda: run(_compiled.integrate_kernel, prm, p, horizon, budget),
                           args.repeat)
        xp, xc = np.asarray(rp[1]), np.asarray(rc[1])
        n = min(len(xp), len(xc))
        diff = float(np.max(np.abs(xp[:n] - xc[:n]))) if len(xp) == len(xc) else float("nan")
        print(f"{name:28s} {len(xc):7d} {tp:11.4f} {tc:13.5f} {tp / tc:8.1f}x {diff:10.2e}")


if __name__ == "__main__":
    main()
