"""Compare the numba and pure-numpy kernels.

    python benchmarks/bench_kernels.py [--repeat 3]

Reports best-of-N wall time per kernel and backend, and checks that both
backends agree on the outputs.
"""

import argparse
import math
import time

import numpy as np

from levy_liouville import _backend, kernels
from levy_liouville.generator_semigroup import sampling_plan
from levy_liouville.levy_core import Atoms, LevyTriplet, RadialDensity, RadialProfile


def best_of(fn, repeat):
    fn()  # warm-up (numba compiles or loads its cache here)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--grid", type=int, default=1 << 20)
    ap.add_argument("--paths", type=int, default=1 << 18)
    args = ap.parse_args()

    backends = ["numpy"] + (["numba"] if _backend._numba_available() else [])

    locs = np.array([[3.0 ** k * math.pi] for k in range(9)])
    masses = 0.5 ** np.arange(9)
    xi = np.linspace(-4.0, 4.0, args.grid)[:, None]
    comp = np.zeros(9, dtype=bool)

    t = LevyTriplet(
        [0.5], [[1.0]],
        (Atoms([[1.0], [-0.3], [2.5]], [1.0, 2.0, 0.5]),
         RadialDensity(RadialProfile("power", 1.0, 1.5), 0.2, 3.0, 1)),
    )
    plan = sampling_plan(t, 1.0)
    key = kernels.seed_key(7)

    rows, outputs = [], {}
    for b in backends:
        ta, ya = best_of(lambda: kernels.atom_exponent(xi, locs, masses, comp, backend=b), args.repeat)
        ts, ys = best_of(lambda: kernels.sample_increments(plan, key, 0, args.paths, backend=b),
                         args.repeat)
        outputs[b] = (ya, ys)
        rows.append((b, ta, ts))

    print(f"{'backend':<8} {'atom_exponent':>16} {'sample_increments':>20}")
    print(f"{'':<8} {f'({args.grid} freqs)':>16} {f'({args.paths} paths)':>20}")
    for b, ta, ts in rows:
        print(f"{b:<8} {ta:>14.4f} s {ts:>18.4f} s")
    if len(backends) == 2:
        (a1, s1), (a2, s2) = outputs["numpy"], outputs["numba"]
        print(f"speed-up: exponent x{rows[0][1] / rows[1][1]:.1f}, sampler x{rows[0][2] / rows[1][2]:.1f}")
        print(f"max |difference|: exponent {np.abs(a1 - a2).max():.2e}, sampler {np.abs(s1 - s2).max():.2e}")


if __name__ == "__main__":
    main()
