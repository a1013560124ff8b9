"""Outer-minus-inner support gap on random single-state binary models.

With one decoder and one eavesdropper state the two bounds describe the same
region, so the gap measures only how far the two searches are apart.
"""

import argparse
import time

import numpy as np

from keyregion.discrete import DiscreteCompoundModel
from keyregion.info import CondDist
from keyregion.search import corollary1_gap


def random_models(seed, count):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        rows = lambda: rng.dirichlet([1.0, 1.0], size=2)
        yield DiscreteCompoundModel(rng.dirichlet([2.0, 2.0]), rows(), [rows()], [rows()])


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--models", type=int, default=5)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--budget", type=int, default=50_000)
    args = p.parse_args()
    bsc = DiscreteCompoundModel([0.5, 0.5], CondDist.identity(2), [CondDist.bsc(0.1)], [CondDist.bsc(0.3)])
    named = [("bsc(0.1)/bsc(0.3)", bsc)] + [(f"random {i}", m) for i, m in enumerate(random_models(args.seed, args.models))]
    for name, m in named:
        t0 = time.perf_counter()
        r = corollary1_gap(m, budget=args.budget, caps=(4, 3))
        print(f"{name:<20} gap {r.gap:.3e} bits  ({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
