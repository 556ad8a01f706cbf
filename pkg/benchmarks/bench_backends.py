"""Compare the numba and pure-numpy evolution kernels.

    python benchmarks/bench_backends.py [--records N] [--repeats R]

Both backends must return identical attractor data; the script exits
non-zero if they disagree.
"""
import argparse
import sys
import time

import numpy as np

from nidwca.engine import EvolutionParams
from nidwca.kernels import evolve_batch
from nidwca.rules import RuleVector


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--records", type=int, default=5000)
    p.add_argument("--cells", type=int, default=41)
    p.add_argument("--chromosomes", type=int, default=5)
    p.add_argument("--repeats", type=int, default=3)
    args = p.parse_args(argv)

    rng = np.random.default_rng(0)
    params = EvolutionParams(quantization_eps=1 / 8)
    states = rng.random((args.records, args.cells))
    chromosomes = [RuleVector.from_genes(rng.integers(0, 16, args.cells))
                   for _ in range(args.chromosomes)]
    # compile outside the timed region
    evolve_batch(states[:8], chromosomes[0].genes, params.max_steps, params.quantization_eps,
                 params.max_cycle_len, "numba")

    totals = {"numba": 0.0, "numpy": 0.0}
    for c in chromosomes:
        results = {}
        for backend in totals:
            t, out = _time(lambda: evolve_batch(states, c.genes, params.max_steps,
                                                params.quantization_eps, params.max_cycle_len,
                                                backend), args.repeats)
            totals[backend] += t
            results[backend] = out
        for a, b in zip(results["numba"], results["numpy"]):
            if not np.array_equal(a, b):
                print("backends disagree", file=sys.stderr)
                return 1
    n = len(chromosomes)
    print(f"{args.records} records x {args.cells} cells, {n} rule vectors, best of {args.repeats}")
    for backend, t in totals.items():
        print(f"  {backend:6s} {1000 * t / n:9.1f} ms per evolution")
    print(f"  speedup {totals['numpy'] / totals['numba']:.1f}x, outputs identical")
    return 0


if __name__ == "__main__":
    sys.exit(main())
